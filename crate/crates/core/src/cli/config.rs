use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Experiments reachable through `experiment <name>`.
pub const EXPERIMENTS: [&str; 8] = [
    "sensitivity",
    "lower-bound",
    "domination",
    "chernoff",
    "divisor-moment",
    "divisibility",
    "correction-term",
    "fchi-growth",
];

/// `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse { line: i + 1, message: "expected key=value".into() });
        };
        let key = k.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(Error::Parse { line: i + 1, message: "empty key".into() });
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Rebuilds the argument vector as `prog, subcommands…, file flags…, remaining
/// command-line tokens`, so that command-line values, coming later, win.
///
/// `path` holds the positions of the subcommand tokens in `argv`. A value of
/// `true` becomes a bare switch and `false` drops the entry.
pub fn merge_args(argv: &[String], path: &[usize], entries: &[(String, String)]) -> Vec<String> {
    let mut out = vec![argv[0].clone()];
    out.extend(path.iter().map(|&i| argv[i].clone()));
    for (k, v) in entries {
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => {
                out.push(format!("--{k}"));
                out.push(v.clone());
            }
        }
    }
    out.extend(argv.iter().enumerate().skip(1).filter(|(i, _)| !path.contains(i)).map(|(_, a)| a.clone()));
    out
}

/// Positions of `names`, matched in order, within `argv[1..]`.
pub fn locate_path(argv: &[String], names: &[&str]) -> Option<Vec<usize>> {
    let mut at = 1;
    let mut out = Vec::new();
    for name in names {
        let j = (at..argv.len()).find(|&j| argv[j] == *name)?;
        out.push(j);
        at = j + 1;
    }
    Some(out)
}

/// A named experiment with its string parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    #[serde(skip)]
    used: RefCell<BTreeSet<String>>,
}

impl ExperimentConfig {
    pub fn new(name: &str, params: &[String], seed: u64, out: Option<PathBuf>, threads: Option<usize>) -> Result<Self> {
        if !EXPERIMENTS.contains(&name) {
            return Err(Error::arg(format!("unknown experiment {name}; expected one of {}", EXPERIMENTS.join(", "))));
        }
        let mut map = BTreeMap::new();
        for p in params {
            let (k, v) = p.split_once('=').ok_or_else(|| Error::arg(format!("parameter {p} is not key=value")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(ExperimentConfig { name: name.to_string(), params: map, seed, out, threads, used: RefCell::default() })
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.used.borrow_mut().insert(key.to_string());
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => parse_number(v).parse().map_err(|e| Error::arg(format!("parameter {key}: {e}"))),
        }
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.used.borrow_mut().insert(key.to_string());
        self.params
            .get(key)
            .map(|v| parse_number(v).parse().map_err(|e| Error::arg(format!("parameter {key}: {e}"))))
            .transpose()
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
        T: Clone,
    {
        self.used.borrow_mut().insert(key.to_string());
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => parse_list(v).map_err(|e| Error::arg(format!("parameter {key}: {e}"))),
        }
    }

    /// Fails on parameters no lookup asked for.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&String> = self.params.keys().filter(|k| !used.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::arg(format!("unknown parameters for {}: {unknown:?}", self.name)))
        }
    }
}

/// Accepts `1e6`-style integers alongside plain decimals.
fn parse_number(v: &str) -> String {
    if let Some((m, e)) = v.split_once(['e', 'E']) {
        if let (Ok(m), Ok(e)) = (m.parse::<u64>(), e.parse::<u32>()) {
            if let Some(x) = 10u64.checked_pow(e).and_then(|p| p.checked_mul(m)) {
                return x.to_string();
            }
        }
    }
    v.replace('_', "")
}

pub fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_number(s.trim()).parse::<T>().map_err(|e| format!("{s}: {e}")))
        .collect()
}
