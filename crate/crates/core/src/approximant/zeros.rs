use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::characters::{CharacterGroup, CharacterRef, DirichletCharacter};
use crate::error::{Error, Result};

/// One zero `ρ = β + iγ` of `L(s, χ)`, counted with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroDatum {
    pub beta: f64,
    pub gamma: f64,
    pub character: CharacterRef,
    pub multiplicity: u32,
}

/// Zeros with `1 − β ≤ σ0`, `|γ| ≤ Q` and conductor at most `Q`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroSet {
    pub q: f64,
    pub sigma0: f64,
    pub zeros: Vec<ZeroDatum>,
}

/// A row dropped by [`load_zeros`] because it lies outside the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadedZeros {
    pub set: ZeroSet,
    pub rejected: Vec<RejectedRow>,
}

impl ZeroSet {
    pub fn empty(q: f64, sigma0: f64) -> ZeroSet {
        ZeroSet { q, sigma0, zeros: Vec::new() }
    }

    /// Why `z` falls outside the window, if it does.
    pub fn window_violation(&self, z: &ZeroDatum) -> Option<String> {
        if !(z.beta > 0.0 && z.beta < 1.0) {
            return Some(format!("beta = {} is not in (0, 1)", z.beta));
        }
        if 1.0 - z.beta > self.sigma0 {
            return Some(format!("1 − beta = {} exceeds sigma0 = {}", 1.0 - z.beta, self.sigma0));
        }
        if z.gamma.abs() > self.q {
            return Some(format!("|gamma| = {} exceeds Q = {}", z.gamma.abs(), self.q));
        }
        if z.character.modulus as f64 > self.q {
            return Some(format!("conductor {} exceeds Q = {}", z.character.modulus, self.q));
        }
        None
    }

    /// Adds a zero after checking the window; out-of-window zeros are refused.
    pub fn push(&mut self, z: ZeroDatum) -> Result<()> {
        if let Some(r) = self.window_violation(&z) {
            return Err(Error::arg(r));
        }
        resolve(&z.character, &mut HashMap::new())?;
        self.zeros.push(z);
        Ok(())
    }

    /// The primitive character of each zero, in order.
    pub fn characters(&self) -> Result<Vec<DirichletCharacter>> {
        let mut groups = HashMap::new();
        self.zeros.iter().map(|z| resolve(&z.character, &mut groups)).collect()
    }

    /// Total count with multiplicity.
    pub fn count(&self) -> u64 {
        self.zeros.iter().map(|z| z.multiplicity as u64).sum()
    }
}

fn resolve(r: &CharacterRef, groups: &mut HashMap<u64, Arc<CharacterGroup>>) -> Result<DirichletCharacter> {
    let g = match groups.get(&r.modulus) {
        Some(g) => g.clone(),
        None => {
            let g = CharacterGroup::new(r.modulus)?;
            groups.insert(r.modulus, g.clone());
            g
        }
    };
    let chi = g.character(r.index)?;
    if !chi.is_primitive() {
        return Err(Error::arg(format!("character {} mod {} is not primitive", r.index, r.modulus)));
    }
    Ok(chi)
}

const HEADER: [&str; 5] = ["beta", "gamma", "modulus", "char_index", "multiplicity"];

/// Reads a zeros CSV (`beta,gamma,modulus,char_index,multiplicity`, `#` comments).
pub fn load_zeros(path: &Path, q: f64, sigma0: f64) -> Result<LoadedZeros> {
    let text = std::fs::read_to_string(path)?;
    parse_zeros(&text, q, sigma0)
}

pub fn parse_zeros(text: &str, q: f64, sigma0: f64) -> Result<LoadedZeros> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut set = ZeroSet::empty(q, sigma0);
    let mut rejected = Vec::new();
    let mut groups = HashMap::new();
    let mut seen_header = false;
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if !seen_header {
            if rec.iter().ne(HEADER) {
                return Err(Error::Parse { line, message: format!("expected header {}", HEADER.join(",")) });
            }
            seen_header = true;
            continue;
        }
        if rec.len() != HEADER.len() {
            return Err(Error::Parse { line, message: format!("expected {} fields, found {}", HEADER.len(), rec.len()) });
        }
        let field = |i: usize| &rec[i];
        let num = |i: usize| -> Result<f64> {
            field(i).parse::<f64>().map_err(|e| Error::Parse { line, message: format!("{}: {e}", HEADER[i]) })
        };
        let int = |i: usize| -> Result<u64> {
            field(i).parse::<u64>().map_err(|e| Error::Parse { line, message: format!("{}: {e}", HEADER[i]) })
        };
        let multiplicity = int(4)?;
        if multiplicity == 0 || multiplicity > u32::MAX as u64 {
            return Err(Error::Parse { line, message: "multiplicity must be a positive 32-bit integer".into() });
        }
        let z = ZeroDatum {
            beta: num(0)?,
            gamma: num(1)?,
            character: CharacterRef { modulus: int(2)?, index: int(3)? },
            multiplicity: multiplicity as u32,
        };
        if let Some(reason) = set.window_violation(&z) {
            rejected.push(RejectedRow { line, reason });
            continue;
        }
        resolve(&z.character, &mut groups).map_err(|e| Error::Parse { line, message: format!("unknown character: {e}") })?;
        set.zeros.push(z);
    }
    Ok(LoadedZeros { set, rejected })
}
