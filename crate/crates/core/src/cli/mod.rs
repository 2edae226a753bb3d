//! Command-line front end: argument parsing, configuration files, dispatch
//! and rendering.

pub mod config;
pub mod render;

use std::io::Write;
use std::path::PathBuf;

use clap::builder::PossibleValuesParser;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::approximant::{
    deviation_scan, f_chi_growth, f_chi_q, filter_zeros_a, lambda_q, lambda_q_table, load_zeros, FChiTable, Integrand,
    ScanPlan, ZeroSet, DEFAULT_SIGMA0,
};
use crate::characters::{
    fraction_pair_sweep, hensel_reduction_check, square_root_sweep, w_sum_sweep, weil_sweep, CharacterGroup, IntPoly,
    W_CELL_BUDGET,
};
use crate::counting::{
    chernoff_bound, count_representations, decompose_conditional, domination_experiment, lower_bound_sweep,
    sensitivity_sweep, PairSet, RepCountQuery,
};
use crate::digits::{big_to_u64, DigitSystem};
use crate::error::{Error, Result};
use crate::measures::{cis, fourier_transform, l1_norm, large_sieve_sum, ProductMeasure, Theta};
use crate::numtheory::{gcd, primes_up_to};
use crate::verify::{
    correction_term_experiment, divisibility_experiment, divisor_moment_experiment, sample_odd_targets, timed, verify,
    verify_range, LhsMode, ZeroPoint, DEFAULT_P_MAX,
};
use config::{locate_path, merge_args, parse_config, parse_list, ExperimentConfig, EXPERIMENTS};

/// Largest number of targets handled by one `count` or `verify` invocation.
pub const TARGET_LIST_CAP: u64 = 100_000;

/// Brute-force oracles run under `--check` only up to this target.
pub const ORACLE_LIMIT: u64 = 5000;

#[derive(Debug, Parser)]
#[command(
    name = "digit-goldbach",
    version,
    about = "Sums of three primes avoiding a base-g digit: counts, decompositions, character sums and verification",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Base.
    #[arg(long, global = true, default_value_t = 10)]
    pub g: u32,
    /// Forbidden digit.
    #[arg(long, global = true, default_value_t = 7)]
    pub b: u32,
    /// Target, any size where the command allows it.
    #[arg(id = "target", long = "N", global = true)]
    pub n: Option<String>,
    /// Approximant level.
    #[arg(id = "level", long = "Q", global = true)]
    pub q: Option<f64>,
    /// Truncation point of the singular series.
    #[arg(long = "p-max", global = true, default_value_t = DEFAULT_P_MAX)]
    pub p_max: u64,
    /// CSV of zeros: beta,gamma,modulus,char_index,multiplicity.
    #[arg(long, global = true)]
    pub zeros: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// key=value file supplying any flag; the command line wins.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Exit with status 3 if the command's built-in assertions fail.
    #[arg(long, global = true)]
    pub check: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count representations of N by m restricted summands.
    Count {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long)]
        include_zero: bool,
        #[arg(long)]
        coprime: bool,
        /// Count every target from N to this value.
        #[arg(long)]
        upto: Option<u64>,
    },
    /// Split the law of x1 given x1 + x2 = N into product measures.
    Decompose {
        #[arg(long)]
        include_zero: bool,
        /// Reveal carries only at positions above this one.
        #[arg(long)]
        reveal_above: Option<usize>,
    },
    /// Fourier transform, L¹ norm and large-sieve sums of the digit measure.
    Fourier {
        #[command(subcommand)]
        what: FourierCmd,
    },
    /// Character-sum bounds and their sweeps.
    Charsum {
        #[command(subcommand)]
        what: CharsumCmd,
    },
    /// Fourier approximants of the von Mangoldt function.
    Approximant {
        #[command(subcommand)]
        what: ApproxCmd,
    },
    /// Compare the weighted prime count with the main term.
    Verify(VerifyArgs),
    /// Run a named experiment with key=value parameters.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Subcommand)]
pub enum FourierCmd {
    /// μ̂(num/den + offset) for the measure of k-digit members.
    Transform {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        num: i64,
        #[arg(long, default_value_t = 3)]
        den: u64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        offset: f64,
    },
    /// Riemann-sum estimate of ∫|μ̂|.
    L1 {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = 4)]
        oversampling: u64,
    },
    /// Σ |μ̂(a/b + β)| over Q ≤ b < 2Q with d | b.
    Sieve {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = 1)]
        d: u64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        beta: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum CharsumCmd {
    /// Bound check for the twisted two-character sums over prime powers.
    WSum {
        #[arg(long, default_value_t = 31)]
        odd_max: u64,
        #[arg(long, default_value_t = 4)]
        a_max: u32,
        #[arg(long, default_value_t = 8)]
        two_max: u32,
        #[arg(long, default_value_t = W_CELL_BUDGET)]
        budget: u64,
    },
    /// Weil bound over all monic polynomials and characters mod p.
    Weil {
        #[arg(long, default_value_t = 61)]
        prime_max: u64,
        #[arg(long, default_value_t = 4)]
        deg_max: usize,
    },
    /// Stationary-phase reduction for every character mod p^{2α} (or p^{2α+1}).
    Hensel {
        #[arg(long, default_value_t = 5)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        alpha: u32,
        /// Use the modulus p^{2α+1}.
        #[arg(long)]
        odd: bool,
        /// Coefficients of f, constant term first.
        #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
        f: String,
        /// Coefficients of the phase polynomial, constant term first.
        #[arg(long = "poly-g", default_value = "0,1", allow_hyphen_values = true)]
        poly_g: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        a: i64,
    },
    /// Square-root counts modulo every prime power up to a limit.
    Squares {
        #[arg(long, default_value_t = 10_000)]
        limit: u64,
    },
    /// Counts of b1/p^{a1} + b2/p^{a2} ≡ t/p^{a2}.
    Fractions {
        #[arg(long, default_value = "2,3,5")]
        primes: String,
        #[arg(long, default_value_t = 4)]
        a_max: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum ApproxCmd {
    /// Λ_Q(n), or a table up to `upto`.
    LambdaQ {
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long)]
        upto: Option<u64>,
    },
    /// F_{χ,Q}(n) by the direct sum and by the periodic table.
    FChiQ {
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, default_value_t = 5)]
        modulus: u64,
        #[arg(long, default_value_t = 1)]
        index: u64,
    },
    /// Sampled sup over θ of |Σ (Λ − Λ_{Q,σ0})(n) e(nθ)| for one or more Q.
    Deviation {
        #[arg(long = "M", default_value_t = 1_000_000)]
        m: u64,
        /// Comma-separated Q values; defaults to --Q.
        #[arg(long = "q-list")]
        q_list: Option<String>,
        #[arg(long, default_value_t = 512)]
        farey: u64,
        #[arg(long, default_value_t = 1 << 16)]
        grid: usize,
        /// Weight by the indicator of the restricted set.
        #[arg(long)]
        restricted: bool,
        /// Keep only zeros with 1 − β ≤ A·lnln M/ln M.
        #[arg(long = "A")]
        a: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SIGMA0)]
        sigma0: f64,
    },
    /// Smallest C with |F_{χ,Q}(n)| ≤ C·τ(n)·(ln Q)³.
    Growth {
        #[arg(long, default_value_t = 1000)]
        n_max: u64,
        #[arg(long, default_value_t = 20)]
        modulus_max: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fft,
    Exact,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Inclusive range `lo..hi` or `lo..hi:step`.
    #[arg(long)]
    pub range: Option<String>,
    /// Draw this many odd targets from the range using --seed.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Comma-separated targets.
    #[arg(long)]
    pub list: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Fft)]
    pub mode: ModeArg,
    /// Record wall-clock time (makes output non-reproducible).
    #[arg(long)]
    pub runtime: bool,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_parser = PossibleValuesParser::new(EXPERIMENTS))]
    pub name: String,
    /// key=value, repeatable.
    #[arg(long = "param", short = 'p')]
    pub params: Vec<String>,
}

/// What a command produced: the JSON document, its CSV rows and named checks.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub value: Value,
    pub rows: Vec<Value>,
    pub checks: Vec<(String, bool)>,
}

impl Outcome {
    fn single<T: Serialize>(x: &T) -> Result<Outcome> {
        let value = to_value(x)?;
        Ok(Outcome { rows: vec![value.clone()], value, checks: Vec::new() })
    }

    fn table<T: Serialize, R: Serialize>(x: &T, rows: &[R]) -> Result<Outcome> {
        Ok(Outcome { value: to_value(x)?, rows: rows.iter().map(to_value).collect::<Result<_>>()?, checks: Vec::new() })
    }

    fn check(mut self, name: &str, ok: bool) -> Outcome {
        self.checks.push((name.to_string(), ok));
        self
    }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Diagnostic(e.to_string()))
}

impl Command {
    fn path(&self) -> Vec<&'static str> {
        match self {
            Command::Count { .. } => vec!["count"],
            Command::Decompose { .. } => vec!["decompose"],
            Command::Fourier { what } => vec![
                "fourier",
                match what {
                    FourierCmd::Transform { .. } => "transform",
                    FourierCmd::L1 { .. } => "l1",
                    FourierCmd::Sieve { .. } => "sieve",
                },
            ],
            Command::Charsum { what } => vec![
                "charsum",
                match what {
                    CharsumCmd::WSum { .. } => "w-sum",
                    CharsumCmd::Weil { .. } => "weil",
                    CharsumCmd::Hensel { .. } => "hensel",
                    CharsumCmd::Squares { .. } => "squares",
                    CharsumCmd::Fractions { .. } => "fractions",
                },
            ],
            Command::Approximant { what } => vec![
                "approximant",
                match what {
                    ApproxCmd::LambdaQ { .. } => "lambda-q",
                    ApproxCmd::FChiQ { .. } => "f-chi-q",
                    ApproxCmd::Deviation { .. } => "deviation",
                    ApproxCmd::Growth { .. } => "growth",
                },
            ],
            Command::Verify(_) => vec!["verify"],
            Command::Experiment(_) => vec!["experiment"],
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 success, 1 argument error, 2 resource cap, 3 failed `--check`.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match parse(&argv) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn clap_exit(e: clap::Error) -> i32 {
    let _ = e.print();
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
        _ => 1,
    }
}

/// Parses once to find the subcommand and config file, then again with the
/// file's entries placed ahead of the command-line flags.
pub fn parse(argv: &[String]) -> std::result::Result<Cli, i32> {
    let first = Cli::try_parse_from(argv).map_err(clap_exit)?;
    let Some(path) = &first.global.config else { return Ok(first) };
    let entries = std::fs::read_to_string(path)
        .map_err(Error::from)
        .and_then(|text| parse_config(&text))
        .map_err(|e| {
            eprintln!("error: config {}: {e}", path.display());
            1
        })?;
    let names = first.command.path();
    let positions = locate_path(argv, &names).ok_or_else(|| {
        eprintln!("error: could not locate the subcommand in the arguments");
        1
    })?;
    Cli::try_parse_from(merge_args(argv, &positions, &entries)).map_err(clap_exit)
}

fn execute(cli: &Cli) -> Result<i32> {
    let outcome = match cli.global.threads {
        Some(0) => return Err(Error::arg("threads must be positive")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Diagnostic(e.to_string()))?
            .install(|| dispatch(cli))?,
        None => dispatch(cli)?,
    };
    let text = match cli.global.format {
        Format::Json => render::to_json(&outcome.value)?,
        Format::Csv => render::to_csv(&outcome.rows)?,
    };
    match &cli.global.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if cli.global.check {
        for (name, ok) in &outcome.checks {
            eprintln!("check {name}: {}", if *ok { "pass" } else { "FAIL" });
        }
        if outcome.checks.iter().any(|c| !c.1) {
            return Ok(3);
        }
    }
    Ok(0)
}

pub fn dispatch(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Count { m, include_zero, coprime, upto } => cmd_count(g, *m, *include_zero, *coprime, *upto),
        Command::Decompose { include_zero, reveal_above } => cmd_decompose(g, *include_zero, *reveal_above),
        Command::Fourier { what } => cmd_fourier(g, what),
        Command::Charsum { what } => cmd_charsum(what),
        Command::Approximant { what } => cmd_approximant(g, what),
        Command::Verify(v) => cmd_verify(g, v),
        Command::Experiment(e) => cmd_experiment(g, e),
    }
}

impl GlobalArgs {
    fn target(&self) -> Result<BigUint> {
        let s = self.n.as_deref().ok_or_else(|| Error::arg("this command needs --N"))?;
        parse_big(s)
    }

    fn target_or(&self, default: u64) -> Result<BigUint> {
        match &self.n {
            Some(s) => parse_big(s),
            None => Ok(BigUint::from(default)),
        }
    }

    fn small_target_or(&self, default: u64) -> Result<u64> {
        let n = self.target_or(default)?;
        big_to_u64(&n).ok_or_else(|| Error::range("target does not fit in 64 bits"))
    }

    fn level(&self, default: f64) -> f64 {
        self.q.unwrap_or(default)
    }
}

fn parse_big(s: &str) -> Result<BigUint> {
    let t = s.trim().replace('_', "");
    if let Some((m, e)) = t.split_once(['e', 'E']) {
        let m: BigUint = m.parse().map_err(|_| Error::arg(format!("bad integer {s}")))?;
        let e: u32 = e.parse().map_err(|_| Error::arg(format!("bad exponent in {s}")))?;
        return Ok(m * BigUint::from(10u32).pow(e));
    }
    t.parse().map_err(|_| Error::arg(format!("bad integer {s}")))
}

fn list_arg<T: std::str::FromStr>(name: &str, s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    parse_list(s).map_err(|e| Error::arg(format!("--{name}: {e}")))
}

#[derive(Debug, Serialize)]
struct CountRow {
    #[serde(rename = "N")]
    n: String,
    g: u32,
    b: u32,
    k: u32,
    m: usize,
    include_zero: bool,
    coprime_to_g: bool,
    count: String,
}

/// Counts for every target `≤ limit` by convolving membership indicators.
fn brute_counts(limit: u64, sys: &DigitSystem, m: usize, include_zero: bool, coprime: bool) -> Vec<u128> {
    let g = sys.g as u64;
    let a: Vec<u128> = (0..=limit)
        .map(|x| {
            let member = if x == 0 { include_zero && !coprime } else { sys.is_restricted(x) && (!coprime || gcd(x, g) == 1) };
            member as u128
        })
        .collect();
    let conv = |u: &[u128], v: &[u128]| -> Vec<u128> {
        (0..=limit as usize).map(|t| (0..=t).map(|x| u[x] * v[t - x]).sum()).collect()
    };
    let two = conv(&a, &a);
    if m == 2 {
        two
    } else {
        conv(&a, &two)
    }
}

fn cmd_count(g: &GlobalArgs, m: usize, include_zero: bool, coprime: bool, upto: Option<u64>) -> Result<Outcome> {
    let n = g.target()?;
    let targets: Vec<BigUint> = match upto {
        None => vec![n],
        Some(u) => {
            let lo = big_to_u64(&n).ok_or_else(|| Error::range("--N too large for --upto"))?;
            if u < lo {
                return Err(Error::arg("--upto must be at least --N"));
            }
            Error::check_cap("number of targets", (u - lo + 1) as u128, TARGET_LIST_CAP as u128)?;
            (lo..=u).map(BigUint::from).collect()
        }
    };
    let rows: Vec<CountRow> = targets
        .iter()
        .map(|t| {
            let sys = DigitSystem::for_big_target(g.g, g.b, &t.max(&BigUint::from(1u32)).clone())?;
            let q = RepCountQuery::new(t.clone(), m, sys).include_zero(include_zero).coprime(coprime);
            Ok(CountRow {
                n: t.to_string(),
                g: g.g,
                b: g.b,
                k: sys.k,
                m,
                include_zero,
                coprime_to_g: coprime,
                count: count_representations(&q)?.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    let mut out = if rows.len() == 1 { Outcome::single(&rows[0])? } else { Outcome::table(&rows, &rows)? };
    let last = targets.last().and_then(big_to_u64);
    if let Some(limit) = last.filter(|&l| l <= ORACLE_LIMIT) {
        let sys = DigitSystem::for_target(g.g, g.b, limit.max(1))?;
        let brute = brute_counts(limit, &sys, m, include_zero, coprime);
        let ok = rows.iter().zip(&targets).all(|(r, t)| r.count == brute[big_to_u64(t).unwrap() as usize].to_string());
        out = out.check("brute_force_oracle", ok);
    }
    Ok(out)
}

fn cmd_decompose(g: &GlobalArgs, include_zero: bool, reveal_above: Option<usize>) -> Result<Outcome> {
    let t = g.target()?;
    let sys = DigitSystem::for_big_target(g.g, g.b, &t)?;
    let d = decompose_conditional(&t, &sys, include_zero, reveal_above)?;
    let mass = d.total_mass();
    let count = count_representations(&RepCountQuery::new(t.clone(), 2, sys).include_zero(include_zero))?;
    let value = json!({
        "N": t.to_string(),
        "g": g.g,
        "b": g.b,
        "k": sys.k,
        "include_zero": include_zero,
        "entries": to_value(&d.entries)?,
        "total_mass": mass.to_string(),
        "pair_count": count.to_string(),
    });
    let rows = d
        .entries
        .iter()
        .map(|e| {
            Ok(json!({
                "carries": to_value(&e.carries)?,
                "lengths": to_value(&e.lengths)?,
                "mass": e.measure.mass().to_string(),
                "measure": to_value(&e.measure)?,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome { value, rows, checks: Vec::new() }.check("mass_equals_pair_count", mass == count))
}

fn measure_for(g: &GlobalArgs, k: Option<u32>) -> Result<ProductMeasure> {
    let k = match k {
        Some(k) => k,
        None => match &g.n {
            Some(_) => DigitSystem::for_big_target(g.g, g.b, &g.target()?)?.k,
            None => 4,
        },
    };
    ProductMeasure::avoiding_digit(g.g, g.b, k as usize)
}

fn cmd_fourier(g: &GlobalArgs, what: &FourierCmd) -> Result<Outcome> {
    match what {
        FourierCmd::Transform { k, num, den, offset } => {
            let mu = measure_for(g, *k)?;
            let theta = Theta::new(*num, *den, *offset)?;
            let v = fourier_transform(&mu, &theta);
            let value = json!({"g": g.g, "b": g.b, "k": mu.k(), "theta": to_value(&theta)?, "re": v.re, "im": v.im, "abs": v.norm()});
            let mut out = Outcome { rows: vec![value.clone()], value, checks: Vec::new() };
            if mu.mass_f64() <= 1e4 {
                let r = crate::numtheory::rem(*num, *den);
                let direct: Complex64 = mu
                    .support(10_000)?
                    .iter()
                    .map(|&x| {
                        let exact = ((x % den) as u128 * r as u128 % *den as u128) as f64 / *den as f64;
                        cis(-(exact + (x as f64 * offset).rem_euclid(1.0)))
                    })
                    .sum();
                out = out.check("support_dft", (direct - v).norm() <= 1e-9 * v.norm().max(1.0));
            }
            Ok(out)
        }
        FourierCmd::L1 { k, oversampling } => {
            let mu = measure_for(g, *k)?;
            let est = l1_norm(&mu, *oversampling)?;
            let fitted = est.fitted_c;
            Ok(Outcome::single(&est)?.check("fitted_c_at_most_10", fitted <= 10.0))
        }
        FourierCmd::Sieve { k, d, beta } => {
            let mu = measure_for(g, *k)?;
            let q = g.level(100.0);
            if !(q >= 1.0) {
                return Err(Error::arg("--Q must be at least 1"));
            }
            let s = large_sieve_sum(&mu, q as u64, *d, *beta)?;
            let ok = s.fitted_c.is_finite();
            Ok(Outcome::single(&s)?.check("fitted_c_finite", ok))
        }
    }
}

fn cmd_charsum(what: &CharsumCmd) -> Result<Outcome> {
    match what {
        CharsumCmd::WSum { odd_max, a_max, two_max, budget } => {
            let cells = w_sum_sweep(*odd_max, *a_max, *two_max, *budget)?;
            let ok = cells.iter().all(|c| c.violations == 0);
            Ok(Outcome::table(&cells, &cells)?.check("no_violations", ok))
        }
        CharsumCmd::Weil { prime_max, deg_max } => {
            let rows = weil_sweep(*prime_max, *deg_max)?;
            let ok = rows.iter().all(|r| r.violations == 0);
            Ok(Outcome::table(&rows, &rows)?.check("no_violations", ok))
        }
        CharsumCmd::Hensel { p, alpha, odd, f, poly_g, a } => {
            let f = IntPoly(list_arg("f", f)?);
            let gp = IntPoly(list_arg("poly-g", poly_g)?);
            let e = 2 * alpha + *odd as u32;
            let q = crate::numtheory::checked_pow(*p, e).ok_or_else(|| Error::range("modulus overflows"))?;
            let group = CharacterGroup::new(q)?;
            let mut rows = Vec::new();
            let mut ok = true;
            for chi in group.characters() {
                match hensel_reduction_check(*p, *alpha, &f, &gp, &chi, *a) {
                    Ok(c) => {
                        ok &= c.matches;
                        let mut v = to_value(&c)?;
                        v["index"] = json!(chi.index());
                        rows.push(v);
                    }
                    Err(Error::Diagnostic(msg)) => rows.push(json!({"index": chi.index(), "q": q, "diagnostic": msg})),
                    Err(e) => return Err(e),
                }
            }
            Ok(Outcome { value: Value::Array(rows.clone()), rows, checks: Vec::new() }.check("both_sides_match", ok))
        }
        CharsumCmd::Squares { limit } => {
            let rows = square_root_sweep(*limit)?;
            let ok = rows.iter().all(|r| r.violations == 0);
            Ok(Outcome::table(&rows, &rows)?.check("no_violations", ok))
        }
        CharsumCmd::Fractions { primes, a_max } => {
            let ps: Vec<u64> = list_arg("primes", primes)?;
            let rows = fraction_pair_sweep(&ps, *a_max)?;
            let ok = rows.iter().all(|r| r.violations == 0);
            Ok(Outcome::table(&rows, &rows)?.check("no_violations", ok))
        }
    }
}

fn zero_set(g: &GlobalArgs, q: f64, sigma0: f64) -> Result<(ZeroSet, usize)> {
    match &g.zeros {
        Some(p) => {
            let loaded = load_zeros(p, q, sigma0)?;
            Ok((loaded.set, loaded.rejected.len()))
        }
        None => Ok((ZeroSet::empty(q, sigma0), 0)),
    }
}

fn cmd_approximant(g: &GlobalArgs, what: &ApproxCmd) -> Result<Outcome> {
    let q = g.level(10.0);
    match what {
        ApproxCmd::LambdaQ { n, upto } => {
            let hi = upto.unwrap_or(*n);
            if hi < *n {
                return Err(Error::arg("--upto must be at least --n"));
            }
            Error::check_cap("number of values", (hi - n + 1) as u128, TARGET_LIST_CAP as u128)?;
            let table = lambda_q_table(hi, q)?;
            let rows: Vec<Value> = (*n..=hi).map(|x| json!({"n": x, "Q": q, "value": table[x as usize]})).collect();
            let ok = (*n..=hi).all(|x| (lambda_q(x, q) - table[x as usize]).abs() <= 1e-9 * table[x as usize].abs().max(1.0));
            let value = if rows.len() == 1 { rows[0].clone() } else { Value::Array(rows.clone()) };
            Ok(Outcome { value, rows, checks: Vec::new() }.check("table_matches_direct", ok))
        }
        ApproxCmd::FChiQ { n, modulus, index } => {
            let chi = CharacterGroup::new(*modulus)?.character(*index)?;
            let direct = f_chi_q(*n, &chi, q)?;
            let table = FChiTable::new(&chi, q)?.eval(*n);
            let value = json!({
                "n": n, "modulus": modulus, "index": index, "Q": q,
                "re": direct.re, "im": direct.im, "abs": direct.norm(),
                "table_re": table.re, "table_im": table.im,
            });
            let ok = (direct - table).norm() <= 1e-9 * direct.norm().max(1.0);
            Ok(Outcome { rows: vec![value.clone()], value, checks: Vec::new() }.check("routes_agree", ok))
        }
        ApproxCmd::Deviation { m, q_list, farey, grid, restricted, a, sigma0 } => {
            let qs: Vec<f64> = match q_list {
                Some(s) => list_arg("q-list", s)?,
                None => vec![q],
            };
            let plan = ScanPlan { farey_limit: *farey, grid_size: *grid };
            let sys = if *restricted { Some(DigitSystem::for_target(g.g, g.b, *m)?) } else { None };
            let mut rows = Vec::new();
            let mut sups = Vec::new();
            let mut self_zero = true;
            for &qv in &qs {
                let (mut zs, rejected) = zero_set(g, qv, *sigma0)?;
                if let Some(a) = a {
                    zs = filter_zeros_a(&zs, *a, *m)?;
                }
                let scan = deviation_scan(*m, qv, &zs, &plan, sys.as_ref(), Integrand::VonMangoldt)?;
                let own = deviation_scan(*m, qv, &zs, &plan, sys.as_ref(), Integrand::SelfCheck)?;
                self_zero &= own.sup_estimate == 0.0;
                sups.push(scan.sup_over_m);
                let mut v = to_value(&scan)?;
                v["rejected_zeros"] = json!(rejected);
                rows.push(v);
            }
            let mut out = Outcome { value: Value::Array(rows.clone()), rows, checks: Vec::new() }.check("self_deviation_zero", self_zero);
            if qs.len() > 1 {
                out = out.check("strictly_decreasing", sups.windows(2).all(|w| w[1] < w[0]));
            }
            Ok(out)
        }
        ApproxCmd::Growth { n_max, modulus_max } => Outcome::single(&f_chi_growth(*n_max, *modulus_max, q)?),
    }
}

fn parse_range(s: &str) -> Result<(u64, u64, u64)> {
    let bad = || Error::arg(format!("range {s} is not lo..hi or lo..hi:step"));
    let (span, step) = match s.split_once(':') {
        Some((a, b)) => (a, b.parse::<u64>().map_err(|_| bad())?),
        None => (s, 1),
    };
    let (lo, hi) = span.split_once("..").ok_or_else(bad)?;
    let num = |x: &str| parse_big(x).ok().and_then(|v| big_to_u64(&v)).ok_or_else(bad);
    let (lo, hi) = (num(lo)?, num(hi)?);
    if lo > hi || step == 0 {
        return Err(bad());
    }
    Ok((lo, hi, step))
}

fn cmd_verify(g: &GlobalArgs, v: &VerifyArgs) -> Result<Outcome> {
    let mode = match v.mode {
        ModeArg::Fft => LhsMode::Fft,
        ModeArg::Exact => LhsMode::Exact,
    };
    let targets: Option<Vec<u64>> = match (&v.list, &v.range, v.sample) {
        (Some(l), None, None) => Some(list_arg("list", l)?),
        (None, Some(r), None) => {
            let (lo, hi, step) = parse_range(r)?;
            Error::check_cap("number of targets", ((hi - lo) / step + 1) as u128, TARGET_LIST_CAP as u128)?;
            Some((lo..=hi).step_by(step as usize).collect())
        }
        (None, Some(r), Some(count)) => {
            let (lo, hi, _) = parse_range(r)?;
            Error::check_cap("number of targets", count as u128, TARGET_LIST_CAP as u128)?;
            Some(sample_odd_targets(lo, hi, count, g.seed)?)
        }
        (None, None, None) => None,
        _ => return Err(Error::arg("use one of --N, --list, --range or --range with --sample")),
    };
    match targets {
        None => {
            let n = big_to_u64(&g.target()?).ok_or_else(|| Error::range("target does not fit in 64 bits"))?;
            let run = || verify(n, g.g, g.b, g.p_max, mode);
            let r = if v.runtime { timed(run)? } else { run()? };
            let invariant = r.main_term == r.singular_series_truncated * r.g_factor * r.coprime_count.to_f64().unwrap_or(f64::INFINITY);
            let mut out = Outcome::single(&r)?.check("main_term_invariant", invariant);
            if n % 2 == 1 {
                out = out.check("lhs_positive", r.lhs_weighted > 0.0);
            }
            Ok(out)
        }
        Some(ns) => {
            let start = std::time::Instant::now();
            let r = verify_range(&ns, g.g, g.b, g.p_max, mode)?;
            let mut value = to_value(&r)?;
            if v.runtime {
                value["runtime"] = json!(start.elapsed().as_secs_f64());
            }
            let rows = r.reports.iter().map(to_value).collect::<Result<Vec<_>>>()?;
            let band = r.summary.median_ratio.is_some_and(|m| (0.5..=2.0).contains(&m));
            Ok(Outcome { value, rows, checks: Vec::new() }
                .check("odd_lhs_positive", r.summary.odd_lhs_positive)
                .check("median_ratio_in_band", band)
                .check("no_failures", r.failures.is_empty()))
        }
    }
}

fn cmd_experiment(g: &GlobalArgs, e: &ExperimentArgs) -> Result<Outcome> {
    let cfg = ExperimentConfig::new(&e.name, &e.params, g.seed, g.out.clone(), g.threads)?;
    let out = run_experiment(g, &cfg)?;
    cfg.finish()?;
    Ok(out)
}

/// Lower tail `P[Bin(n, p) ≥ ⌈np'⌉]`, summed in log space.
fn binomial_upper_tail(n: u64, p: f64, p_prime: f64) -> f64 {
    let start = (n as f64 * p_prime - 1e-9).ceil().max(0.0) as u64;
    if p >= 1.0 {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_pmf = n as f64 * lq;
    let mut total = 0.0;
    for k in 0..=n {
        if k >= start {
            total += log_pmf.exp();
        }
        log_pmf += ((n - k) as f64).ln() - ((k + 1) as f64).ln() + lp - lq;
    }
    total.min(1.0)
}

fn run_experiment(g: &GlobalArgs, cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.name.as_str() {
        "sensitivity" => {
            let gg = g.g as u64 * g.g as u64;
            let s = sensitivity_sweep(g.g, g.b, cfg.get("from", gg)?, cfg.get("to", 100_000)?)?;
            let ok = s.max_ratio.is_finite();
            Ok(Outcome::single(&s)?.check("ratios_finite", ok))
        }
        "lower-bound" => {
            let g3 = (g.g as u64).pow(3);
            let s = lower_bound_sweep(g.g, g.b, cfg.get("from", g3)?, cfg.get("to", 100_000)?)?;
            let ok = s.holds;
            Ok(Outcome::single(&s)?.check("bound_holds", ok))
        }
        "domination" => {
            let t = match cfg.get_opt::<String>("T")? {
                Some(s) => parse_big(&s)?,
                None => g.target_or(1_000_001)?,
            };
            let positions: usize = cfg.get("positions", 5)?;
            let trials: usize = cfg.get("trials", 10_000)?;
            let gg = g.g;
            let root = (gg as f64).sqrt().floor() as u32;
            let set = PairSet::from_fn(gg, |x, y| (x + y).min(2 * gg - x - y) <= root);
            let sets: Vec<(usize, PairSet)> = (0..positions).map(|j| (j, set.clone())).collect();
            let sys = DigitSystem::for_big_target(gg, g.b, &t)?;
            let r = domination_experiment(&t, &sys, &sets, trials, g.seed)?;
            let ok = r.fitted_c.is_finite();
            Ok(Outcome::single(&r)?.check("dominated", ok))
        }
        "chernoff" => {
            let n: u64 = cfg.get("n", 100)?;
            let p: f64 = cfg.get("p", 0.1)?;
            let pp: f64 = cfg.get("p_prime", 0.2)?;
            let bound = chernoff_bound(n, p, pp)?;
            let exact = binomial_upper_tail(n, p, pp);
            let value = json!({"n": n, "p": p, "p_prime": pp, "bound": bound, "exact_tail": exact});
            Ok(Outcome { rows: vec![value.clone()], value, checks: Vec::new() }.check("bound_dominates", bound + 1e-12 >= exact))
        }
        "divisor-moment" => {
            let a: u32 = cfg.get("A", 2)?;
            let ts: Vec<u64> = cfg.list("T", &[1000, 10_000, 100_000, 1_000_000])?;
            let rows = divisor_moment_experiment(g.g, g.b, a, &ts)?;
            let ok = rows.iter().all(|r| r.exponent.is_finite() || r.moment == 1.0);
            Ok(Outcome::table(&rows, &rows)?.check("moments_finite", ok))
        }
        "divisibility" => {
            let n = g.target_or(1_000_001)?;
            let ds: Vec<u64> = cfg.list("d", &[1, 2, 10, 100, 1000, 10_000])?;
            let trials: u64 = cfg.get("trials", 10_000)?;
            let r = divisibility_experiment(&n, g.g, g.b, &ds, trials, g.seed)?;
            let ok = r.rows.iter().filter(|x| x.d == 1).all(|x| x.probability == 1.0);
            Ok(Outcome::table(&r, &r.rows)?.check("d1_certain", ok))
        }
        "correction-term" => {
            let n = g.small_target_or(10_000)?;
            let chi = |m: u64, i: u64| -> Result<_> { CharacterGroup::new(m)?.character(i) };
            let chi1 = chi(cfg.get("modulus1", 1)?, cfg.get("index1", 0)?)?;
            let chi2 = chi(cfg.get("modulus2", 5)?, cfg.get("index2", 2)?)?;
            let rho1 = ZeroPoint { beta: cfg.get("beta1", 0.5)?, gamma: cfg.get("gamma1", 0.0)? };
            let rho2 = ZeroPoint { beta: cfg.get("beta2", 0.5)?, gamma: cfg.get("gamma2", 0.0)? };
            let dump: bool = cfg.get("dump", false)?;
            let r = correction_term_experiment(n, g.g, g.b, &chi1, &chi2, rho1, rho2, g.level(10.0), dump)?;
            let ok = r.lhs_sum.is_finite();
            if dump {
                Ok(Outcome::table(&r, &r.terms)?.check("finite", ok))
            } else {
                Ok(Outcome::single(&r)?.check("finite", ok))
            }
        }
        "fchi-growth" => {
            let r = f_chi_growth(cfg.get("n_max", 1000)?, cfg.get("modulus_max", 20)?, g.level(10.0))?;
            let ok = r.fitted_c.is_finite();
            Ok(Outcome::single(&r)?.check("finite", ok))
        }
        other => Err(Error::arg(format!("unknown experiment {other}"))),
    }
}

/// Primes used by `--p-max`, exposed for callers that batch many targets.
pub fn singular_primes(p_max: u64) -> Vec<u64> {
    primes_up_to(p_max)
}
