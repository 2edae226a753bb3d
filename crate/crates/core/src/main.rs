fn main() {
    std::process::exit(digit_goldbach::cli::run(std::env::args().collect()));
}
