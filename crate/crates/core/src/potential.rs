//! Locally constant potentials on an SFT, their cylinder-wise minima at
//! smaller depth, and modulus-of-continuity data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::averaging::BoundedSequence;
use crate::error::{Error, Result};
use crate::sft::{Sft, Word};

/// A potential depending on the first `depth` symbols, stored as a table
/// indexed by the base-`K` code of the admissible `depth`-words.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    alphabet: usize,
    depth: usize,
    values: Vec<f64>,
    admissible: Vec<bool>,
    norm: f64,
}

/// JSON description. Either an explicit table
/// `{"depth":2,"values":{"00":0.0,"01":1.0,"10":2.0}}`, a symbol indicator
/// `{"indicator":"1"}`, or per-symbol values `{"first_digit":[0.0,1.0]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Table {
        depth: usize,
        values: BTreeMap<String, f64>,
        #[serde(default)]
        norm: Option<f64>,
    },
    Indicator {
        indicator: String,
    },
    FirstDigit {
        first_digit: Vec<f64>,
    },
}

/// `ε_n` (largest oscillation of the potential on `n`-cylinders) and `ρ_n`
/// (largest difference between values at points sharing their first `n`
/// symbols), for `n = 0..=depth`.
#[derive(Clone, Debug, Serialize)]
pub struct ModulusData {
    pub epsilon: Vec<f64>,
    pub rho: Vec<f64>,
}

impl ModulusData {
    /// `ε_n`, zero beyond the potential's depth.
    pub fn epsilon(&self, n: usize) -> f64 {
        self.epsilon.get(n).copied().unwrap_or(0.0)
    }

    pub fn rho(&self, n: usize) -> f64 {
        self.rho.get(n).copied().unwrap_or(0.0)
    }
}

fn code(alphabet: usize, w: &[u8]) -> usize {
    w.iter().fold(0, |c, &s| c * alphabet + s as usize)
}

fn decode(alphabet: usize, depth: usize, mut c: usize) -> Vec<u8> {
    let mut w = vec![0u8; depth];
    for slot in w.iter_mut().rev() {
        *slot = (c % alphabet) as u8;
        c /= alphabet;
    }
    w
}

impl Potential {
    /// Build from a function on admissible `depth`-words.
    pub fn from_fn(sft: &Sft, depth: usize, f: impl Fn(&[u8]) -> f64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidPotential("depth must be >= 1".into()));
        }
        let k = sft.alphabet_size();
        let size = k
            .checked_pow(depth as u32)
            .filter(|&s| s as u64 <= crate::sft::enum_cap())
            .ok_or_else(|| Error::InvalidPotential(format!("depth {depth} table is too large")))?;
        let mut values = vec![0.0; size];
        let mut admissible = vec![false; size];
        for w in sft.enumerate_words(depth)? {
            let c = code(k, &w);
            let v = f(&w);
            if !v.is_finite() {
                return Err(Error::InvalidPotential(format!(
                    "non-finite value on {}",
                    sft.format_word(&w)
                )));
            }
            values[c] = v;
            admissible[c] = true;
        }
        let norm = values
            .iter()
            .zip(&admissible)
            .filter(|(_, &a)| a)
            .fold(0.0f64, |m, (v, _)| m.max(v.abs()));
        Ok(Potential {
            alphabet: k,
            depth,
            values,
            admissible,
            norm,
        })
    }

    /// `𝟙[i_0 = a]`.
    pub fn indicator(sft: &Sft, a: u8) -> Result<Self> {
        if a as usize >= sft.alphabet_size() {
            return Err(Error::InvalidPotential(format!("symbol {a} outside the alphabet")));
        }
        Self::from_fn(sft, 1, |w| if w[0] == a { 1.0 } else { 0.0 })
    }

    /// `φ(i) = c_{i_0}`.
    pub fn first_digit(sft: &Sft, coefficients: &[f64]) -> Result<Self> {
        if coefficients.len() != sft.alphabet_size() {
            return Err(Error::InvalidPotential(format!(
                "{} coefficients for {} symbols",
                coefficients.len(),
                sft.alphabet_size()
            )));
        }
        Self::from_fn(sft, 1, |w| coefficients[w[0] as usize])
    }

    /// Table keyed by labelled words; the keys must be exactly the
    /// admissible words of that depth.
    pub fn from_table(sft: &Sft, depth: usize, table: &BTreeMap<String, f64>) -> Result<Self> {
        let mut parsed = BTreeMap::new();
        for (key, &v) in table {
            let w = sft
                .parse_word(key)
                .map_err(|e| Error::InvalidPotential(format!("key {key:?}: {e}")))?;
            if w.len() != depth {
                return Err(Error::InvalidPotential(format!(
                    "key {key:?} has length {}, expected {depth}",
                    w.len()
                )));
            }
            parsed.insert(w.0, v);
        }
        let missing: Vec<String> = sft
            .enumerate_words(depth)?
            .filter(|w| !parsed.contains_key(&w.0))
            .map(|w| sft.format_word(&w))
            .collect();
        if !missing.is_empty() {
            return Err(Error::InvalidPotential(format!(
                "missing admissible words: {}",
                missing.join(", ")
            )));
        }
        Self::from_fn(sft, depth, |w| parsed[w])
    }

    pub fn from_spec(sft: &Sft, spec: &PotentialSpec) -> Result<Self> {
        match spec {
            PotentialSpec::Table { depth, values, norm } => {
                let mut p = Self::from_table(sft, *depth, values)?;
                if let Some(b) = norm {
                    p = p.with_norm(*b)?;
                }
                Ok(p)
            }
            PotentialSpec::Indicator { indicator } => {
                let w = sft.parse_word(indicator)?;
                if w.len() != 1 {
                    return Err(Error::InvalidPotential(format!(
                        "indicator needs a single symbol, got {indicator:?}"
                    )));
                }
                Self::indicator(sft, w[0])
            }
            PotentialSpec::FirstDigit { first_digit } => Self::first_digit(sft, first_digit),
        }
    }

    /// Declare a larger sup-norm bound.
    pub fn with_norm(mut self, norm: f64) -> Result<Self> {
        if norm < self.norm {
            return Err(Error::InvalidPotential(format!(
                "declared norm {norm} is below max |value| {}",
                self.norm
            )));
        }
        self.norm = norm;
        Ok(self)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Admissible `depth`-words with their values, in lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<u8>, f64)> + '_ {
        self.admissible
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(c, _)| (decode(self.alphabet, self.depth, c), self.values[c]))
    }

    pub fn max_value(&self) -> f64 {
        self.entries().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.entries().map(|e| e.1).fold(f64::INFINITY, f64::min)
    }

    /// Value on the cylinder of the `depth`-word `w` (no admissibility check).
    #[inline]
    pub fn value(&self, w: &[u8]) -> f64 {
        self.values[code(self.alphabet, &w[..self.depth])]
    }

    /// Value at `σ^k(word)`.
    pub fn evaluate_on_orbit(&self, word: &[u8], k: usize) -> Result<f64> {
        if k + self.depth > word.len() {
            return Err(Error::OutOfRange {
                position: k,
                depth: self.depth,
                len: word.len(),
            });
        }
        let w = &word[k..k + self.depth];
        let c = code(self.alphabet, w);
        if !self.admissible[c] {
            return Err(Error::Inadmissible(format!("window at {k}")));
        }
        Ok(self.values[c])
    }

    /// Number of complete windows in a word of length `n`.
    pub fn windows(&self, n: usize) -> usize {
        (n + 1).saturating_sub(self.depth)
    }

    /// Sum over the complete windows of `word`.
    pub fn window_sum(&self, word: &[u8]) -> f64 {
        word.windows(self.depth).map(|w| self.value(w)).sum()
    }

    /// Average over the complete windows of `word`.
    pub fn word_average(&self, word: &[u8]) -> f64 {
        self.window_sum(word) / self.windows(word.len()) as f64
    }

    /// `φ_n`: on each `n`-cylinder, the minimum over admissible extensions.
    pub fn discretize(&self, sft: &Sft, n: usize) -> Result<Potential> {
        if n == 0 {
            return Err(Error::Precondition("discretization depth must be >= 1".into()));
        }
        if n >= self.depth {
            return Ok(self.clone());
        }
        let mins = self.cylinder_extrema(n);
        Potential::from_fn(sft, n, |w| mins[code(self.alphabet, w)].0)
    }

    /// `(min, max)` over admissible extensions of each `n`-word, by code.
    fn cylinder_extrema(&self, n: usize) -> Vec<(f64, f64)> {
        let k = self.alphabet;
        let mut out = vec![(f64::INFINITY, f64::NEG_INFINITY); k.pow(n as u32)];
        let shift = k.pow((self.depth - n) as u32);
        for (c, (&v, &a)) in self.values.iter().zip(&self.admissible).enumerate() {
            if a {
                let slot = &mut out[c / shift];
                slot.0 = slot.0.min(v);
                slot.1 = slot.1.max(v);
            }
        }
        out
    }

    /// `ε_n` and `ρ_n` for `n = 0..=depth`, by exhaustive enumeration.
    pub fn modulus(&self) -> ModulusData {
        let mut epsilon = Vec::with_capacity(self.depth + 1);
        epsilon.push(self.max_value() - self.min_value());
        for n in 1..self.depth {
            let e = self
                .cylinder_extrema(n)
                .into_iter()
                .filter(|(lo, hi)| lo <= hi)
                .fold(0.0f64, |m, (lo, hi)| m.max(hi - lo));
            epsilon.push(e);
        }
        epsilon.push(0.0);
        // pairs agreeing on at least n symbols lie in a common n-cylinder
        let rho = epsilon.clone();
        ModulusData { epsilon, rho }
    }

    pub fn orbit<'a>(&'a self, word: &'a [u8]) -> OrbitSequence<'a> {
        OrbitSequence { potential: self, word }
    }
}

/// `a_k = φ(σ^k x)` along a finite word.
pub struct OrbitSequence<'a> {
    potential: &'a Potential,
    word: &'a [u8],
}

impl BoundedSequence for OrbitSequence<'_> {
    fn value(&self, n: u64) -> f64 {
        let k = n as usize;
        self.potential.value(&self.word[k..k + self.potential.depth])
    }

    fn bound(&self) -> f64 {
        self.potential.norm
    }

    fn len(&self) -> Option<u64> {
        Some(self.potential.windows(self.word.len()) as u64)
    }
}

/// The depth-2 table `00 ↦ 0, 01 ↦ 1, 10 ↦ 2, 11 ↦ 3` restricted to the
/// admissible words of `sft` (binary alphabets only).
pub fn two_symbol_example(sft: &Sft) -> Result<Potential> {
    if sft.alphabet_size() != 2 {
        return Err(Error::InvalidPotential("example table needs a binary alphabet".into()));
    }
    Potential::from_fn(sft, 2, |w| (2 * w[0] + w[1]) as f64)
}

impl Word {
    /// Birkhoff average of `φ` over the complete windows of this word.
    pub fn average(&self, phi: &Potential) -> f64 {
        phi.word_average(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::plain_average;

    #[test]
    fn discretize_examples() {
        let full = Sft::full_shift(2);
        let phi = two_symbol_example(&full).unwrap();
        let d1 = phi.discretize(&full, 1).unwrap();
        assert_eq!(d1.value(&[0]), 0.0);
        assert_eq!(d1.value(&[1]), 2.0);
        assert_eq!(phi.discretize(&full, 2).unwrap(), phi);
        assert_eq!(d1.discretize(&full, 1).unwrap(), d1);

        let g = Sft::golden_mean();
        let psi = two_symbol_example(&g).unwrap();
        assert_eq!(psi.discretize(&g, 1).unwrap().value(&[1]), 2.0);

        let ind = Potential::indicator(&full, 1).unwrap();
        assert_eq!(ind.discretize(&full, 1).unwrap(), ind);
    }

    #[test]
    fn modulus_examples() {
        let full = Sft::full_shift(2);
        let phi = two_symbol_example(&full).unwrap();
        let m = phi.modulus();
        assert_eq!(m.epsilon(1), 1.0);
        assert_eq!(m.rho(0), 3.0);
        assert_eq!(m.epsilon(2), 0.0);
        let ind = Potential::indicator(&full, 1).unwrap();
        assert_eq!(ind.modulus().epsilon(1), 0.0);
    }

    #[test]
    fn orbit_evaluation() {
        let full = Sft::full_shift(2);
        let ind = Potential::indicator(&full, 1).unwrap();
        let w = [0u8, 1, 1, 0];
        assert_eq!(ind.evaluate_on_orbit(&w, 1).unwrap(), 1.0);
        assert_eq!(ind.evaluate_on_orbit(&w, 0).unwrap(), 0.0);
        assert!(ind.evaluate_on_orbit(&w, 4).is_err());
        let phi = two_symbol_example(&full).unwrap();
        assert_eq!(phi.evaluate_on_orbit(&[0, 1, 0], 1).unwrap(), 2.0);
        assert!(phi.evaluate_on_orbit(&[0, 1, 0], 2).is_err());
        assert_eq!(plain_average(&ind.orbit(&w), 4).unwrap(), 0.5);
    }

    #[test]
    fn table_keys_must_match_admissible_words() {
        let g = Sft::golden_mean();
        let mut t = BTreeMap::new();
        t.insert("00".to_string(), 0.0);
        t.insert("01".to_string(), 1.0);
        assert!(Potential::from_table(&g, 2, &t).is_err());
        t.insert("10".to_string(), 2.0);
        let p = Potential::from_table(&g, 2, &t).unwrap();
        assert_eq!(p.norm(), 2.0);
        t.insert("11".to_string(), 3.0);
        assert!(Potential::from_table(&g, 2, &t).is_err());
    }

    #[test]
    fn spec_forms_parse() {
        let g = Sft::golden_mean();
        let s: PotentialSpec =
            serde_json::from_str(r#"{"depth":2,"values":{"00":0.0,"01":1.0,"10":2.0}}"#).unwrap();
        assert_eq!(Potential::from_spec(&g, &s).unwrap().depth(), 2);
        let s: PotentialSpec = serde_json::from_str(r#"{"indicator":"1"}"#).unwrap();
        assert_eq!(Potential::from_spec(&g, &s).unwrap(), Potential::indicator(&g, 1).unwrap());
        let s: PotentialSpec = serde_json::from_str(r#"{"first_digit":[0.5,-1.0]}"#).unwrap();
        assert_eq!(Potential::from_spec(&g, &s).unwrap().norm(), 1.0);
    }
}
