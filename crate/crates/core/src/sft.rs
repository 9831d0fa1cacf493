//! One-sided subshifts of finite type: admissibility, primitivity, Perron
//! data, word enumeration, connecting words and the Parry measure.

use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{seeded_rng, SparseMatrix};

/// Default bound on the number of words any enumeration may produce.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 26;

/// Enumeration cap, overridable through `SFT_ENUM_CAP`.
pub fn enum_cap() -> u64 {
    std::env::var("SFT_ENUM_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ENUM_CAP)
}

/// A finite word over the alphabet `0..K`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }
}

impl std::ops::Deref for Word {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

/// Length of the common prefix `i ∧ j`.
pub fn agreement(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// `d(i, j) = e^{-(i ∧ j)}`; for finite words this is the distance between
/// any two points of the respective cylinders that first differ right after
/// the common prefix.
pub fn distance(a: &[u8], b: &[u8]) -> f64 {
    (-(agreement(a, b) as f64)).exp()
}

/// JSON description: `{"alphabet":["0","1"],"adjacency":[[1,1],[1,0]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SftSpec {
    #[serde(default)]
    pub alphabet: Option<Vec<String>>,
    pub adjacency: Vec<Vec<u8>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Sft {
    labels: Vec<String>,
    adjacency: Vec<Vec<bool>>,
    /// Smallest `r` with `A^r > 0`.
    r: usize,
    lambda: f64,
    /// Left and right Perron vectors with `Σ u_i v_i = 1`.
    left: Vec<f64>,
    right: Vec<f64>,
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let k = a.len();
    (0..k)
        .map(|i| (0..k).map(|j| (0..k).any(|l| a[i][l] && b[l][j])).collect())
        .collect()
}

/// Validate an adjacency matrix and compute its primitivity exponent and
/// Perron data.
pub fn build_sft(adjacency: Vec<Vec<u8>>) -> Result<Sft> {
    let k = adjacency.len();
    let labels = (0..k).map(|i| i.to_string()).collect();
    Sft::with_labels(adjacency, labels)
}

impl Sft {
    pub fn full_shift(k: usize) -> Sft {
        build_sft(vec![vec![1; k]; k]).expect("full shift is primitive")
    }

    pub fn golden_mean() -> Sft {
        build_sft(vec![vec![1, 1], vec![1, 0]]).expect("golden mean shift is primitive")
    }

    pub fn from_spec(spec: SftSpec) -> Result<Sft> {
        let k = spec.adjacency.len();
        let labels = spec.alphabet.unwrap_or_else(|| (0..k).map(|i| i.to_string()).collect());
        Sft::with_labels(spec.adjacency, labels)
    }

    pub fn with_labels(adjacency: Vec<Vec<u8>>, labels: Vec<String>) -> Result<Sft> {
        let k = adjacency.len();
        if k < 2 {
            return Err(Error::InvalidAdjacency(format!("need at least 2 symbols, got {k}")));
        }
        if k > 256 {
            return Err(Error::InvalidAdjacency(format!("at most 256 symbols supported, got {k}")));
        }
        if labels.len() != k {
            return Err(Error::InvalidAdjacency(format!(
                "{} labels for {k} symbols",
                labels.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if labels.iter().any(|l| l.is_empty() || !seen.insert(l)) {
            return Err(Error::InvalidAdjacency("labels must be nonempty and distinct".into()));
        }
        let mut a = Vec::with_capacity(k);
        for (i, row) in adjacency.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidAdjacency(format!("row {i} has length {}", row.len())));
            }
            if let Some(x) = row.iter().find(|&&x| x > 1) {
                return Err(Error::InvalidAdjacency(format!("entry {x} in row {i} is not 0/1")));
            }
            a.push(row.iter().map(|&x| x == 1).collect::<Vec<_>>());
        }

        let wielandt = (k - 1) * (k - 1) + 1;
        let mut power = a.clone();
        let mut r = None;
        for e in 1..=wielandt {
            if power.iter().all(|row| row.iter().all(|&x| x)) {
                r = Some(e);
                break;
            }
            if e < wielandt {
                power = bool_mul(&power, &a);
            }
        }
        let Some(r) = r else {
            let zeros: Vec<String> = power
                .iter()
                .enumerate()
                .flat_map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, &x)| !x)
                        .map(move |(j, _)| format!("({i},{j})"))
                })
                .take(8)
                .collect();
            return Err(Error::NotAperiodicIrreducible(format!(
                "A^{wielandt} (Wielandt bound) still has zero entries at {}",
                zeros.join(", ")
            )));
        };

        let m = SparseMatrix {
            rows: a
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, &x)| x)
                        .map(|(j, _)| (j, 1.0))
                        .collect()
                })
                .collect(),
        };
        let pr = m.perron(1e-15);
        let pl = m.transpose().perron(1e-15);
        let lambda = pr.root;
        let dot: f64 = pl.vector.iter().zip(&pr.vector).map(|(u, v)| u * v).sum();
        let left = pl.vector.iter().map(|u| u / dot).collect();
        Ok(Sft {
            labels,
            adjacency: a,
            r,
            lambda,
            left,
            right: pr.vector,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.adjacency.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn allowed(&self, a: u8, b: u8) -> bool {
        self.adjacency[a as usize][b as usize]
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    pub fn aperiodicity_exponent(&self) -> usize {
        self.r
    }

    /// Length of connecting words, `r - 1`.
    pub fn connector_len(&self) -> usize {
        self.r - 1
    }

    pub fn perron_root(&self) -> f64 {
        self.lambda
    }

    pub fn left_vector(&self) -> &[f64] {
        &self.left
    }

    pub fn right_vector(&self) -> &[f64] {
        &self.right
    }

    pub fn is_admissible(&self, w: &[u8]) -> bool {
        w.iter().all(|&s| (s as usize) < self.alphabet_size())
            && w.windows(2).all(|p| self.allowed(p[0], p[1]))
    }

    pub fn validate(&self, w: &[u8]) -> Result<()> {
        if let Some(s) = w.iter().find(|&&s| s as usize >= self.alphabet_size()) {
            return Err(Error::Inadmissible(format!("symbol {s} outside the alphabet")));
        }
        match w.windows(2).position(|p| !self.allowed(p[0], p[1])) {
            Some(i) => Err(Error::Inadmissible(format!(
                "transition {}→{} at position {i} of {}",
                self.labels[w[i] as usize],
                self.labels[w[i + 1] as usize],
                self.format_word(w)
            ))),
            None => Ok(()),
        }
    }

    /// Render a word with the declared labels (concatenated when every label
    /// is one character, space-separated otherwise).
    pub fn format_word(&self, w: &[u8]) -> String {
        let sep = if self.labels.iter().all(|l| l.chars().count() == 1) { "" } else { " " };
        w.iter()
            .map(|&s| self.labels[s as usize].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let single = self.labels.iter().all(|l| l.chars().count() == 1);
        let lookup = |tok: &str| {
            self.labels
                .iter()
                .position(|l| l == tok)
                .map(|i| i as u8)
                .ok_or_else(|| Error::Inadmissible(format!("unknown symbol {tok:?}")))
        };
        let symbols: Result<Vec<u8>> = if single {
            s.chars().filter(|c| !c.is_whitespace()).map(|c| lookup(&c.to_string())).collect()
        } else {
            s.split_whitespace().map(lookup).collect()
        };
        let w = Word(symbols?);
        self.validate(&w)?;
        Ok(w)
    }

    /// `#Σ_{A,n}` = sum of the entries of `A^{n-1}`, in floating point.
    pub fn word_count(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let k = self.alphabet_size();
        let mut ends = vec![1.0f64; k];
        for _ in 1..n {
            ends = (0..k)
                .map(|j| (0..k).filter(|&i| self.adjacency[i][j]).map(|i| ends[i]).sum())
                .collect();
        }
        ends.iter().sum()
    }

    /// Exact `#Σ_{A,n}`, saturating at `u128::MAX`.
    pub fn word_count_exact(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let k = self.alphabet_size();
        let mut ends = vec![1u128; k];
        for _ in 1..n {
            ends = (0..k)
                .map(|j| {
                    (0..k)
                        .filter(|&i| self.adjacency[i][j])
                        .fold(0u128, |s, i| s.saturating_add(ends[i]))
                })
                .collect();
        }
        ends.iter().fold(0u128, |s, &x| s.saturating_add(x))
    }

    fn check_cap(&self, n: usize) -> Result<()> {
        let count = self.word_count(n);
        let cap = enum_cap();
        if count > cap as f64 {
            return Err(Error::CapExceeded { requested: count, cap });
        }
        Ok(())
    }

    /// All admissible words of length `n` in lexicographic order.
    pub fn enumerate_words(&self, n: usize) -> Result<WordIter<'_>> {
        if n == 0 {
            return Err(Error::Precondition("word length must be >= 1".into()));
        }
        self.check_cap(n)?;
        Ok(WordIter {
            sft: self,
            n,
            current: None,
            done: false,
        })
    }

    /// Depth-first walk over the tree of admissible words up to length
    /// `max_len`, calling `visit(word)` on every nonempty prefix. Returning
    /// `false` prunes the subtree.
    pub fn walk_words(&self, max_len: usize, mut visit: impl FnMut(&[u8]) -> bool) -> Result<()> {
        if max_len == 0 {
            return Ok(());
        }
        self.check_cap(max_len)?;
        let k = self.alphabet_size() as u8;
        let mut stack: Vec<u8> = Vec::with_capacity(max_len);
        // `next[d]` is the next symbol to try at depth d.
        let mut next: Vec<u8> = vec![0];
        while let Some(&cand) = next.last() {
            let depth = next.len() - 1;
            if cand >= k {
                next.pop();
                stack.pop();
                continue;
            }
            *next.last_mut().unwrap() += 1;
            if depth > 0 && !self.allowed(stack[depth - 1], cand) {
                continue;
            }
            stack.truncate(depth);
            stack.push(cand);
            if visit(&stack) && depth + 1 < max_len {
                next.push(0);
            } else {
                stack.pop();
            }
        }
        Ok(())
    }

    /// `log λ`.
    pub fn topological_entropy(&self) -> f64 {
        self.lambda.ln()
    }

    /// Least-squares slope of `log #Σ_{A,n}` against `n` over `[lo, hi]`.
    pub fn entropy_from_counts(&self, lo: usize, hi: usize) -> f64 {
        let pts: Vec<(f64, f64)> = (lo..=hi).map(|n| (n as f64, self.word_count(n).ln())).collect();
        crate::numeric::slope_with_intercept(&pts)
    }

    pub fn connectors(&self) -> ConnectorTable {
        ConnectorTable::new(self)
    }

    /// Join the parts with the lexicographically first connecting words.
    pub fn admissible_concatenation(&self, parts: &[Word]) -> Result<Word> {
        self.connectors().concatenate(self, parts)
    }

    pub fn parry(&self) -> ParryMeasure {
        ParryMeasure::new(self)
    }

    /// All words `k` of length `len` with `a·k·b` admissible, in
    /// lexicographic order.
    pub fn joins(&self, a: u8, b: u8, len: usize) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(len);
        self.joins_rec(a, b, len, &mut cur, &mut out);
        out
    }

    fn joins_rec(&self, prev: u8, b: u8, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if left == 0 {
            if self.allowed(prev, b) {
                out.push(cur.clone());
            }
            return;
        }
        for s in 0..self.alphabet_size() as u8 {
            if self.allowed(prev, s) {
                cur.push(s);
                self.joins_rec(s, b, left - 1, cur, out);
                cur.pop();
            }
        }
    }
}

pub struct WordIter<'a> {
    sft: &'a Sft,
    n: usize,
    current: Option<Vec<u8>>,
    done: bool,
}

impl WordIter<'_> {
    /// Complete `w[..from]` with the lexicographically least admissible tail.
    fn fill_from(&self, w: &mut Vec<u8>, from: usize) -> bool {
        w.truncate(from);
        while w.len() < self.n {
            match w.last() {
                None => w.push(0),
                Some(&p) => match (0..self.sft.alphabet_size() as u8).find(|&s| self.sft.allowed(p, s)) {
                    Some(s) => w.push(s),
                    None => return false,
                },
            }
        }
        true
    }
}

impl Iterator for WordIter<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        let k = self.sft.alphabet_size() as u8;
        match self.current.take() {
            None => {
                let mut w = Vec::with_capacity(self.n);
                if !self.fill_from(&mut w, 0) {
                    self.done = true;
                    return None;
                }
                self.current = Some(w.clone());
                Some(Word(w))
            }
            Some(mut w) => {
                // advance the rightmost position that can be increased
                for pos in (0..self.n).rev() {
                    let start = w[pos] + 1;
                    let ok = (start..k).find(|&s| pos == 0 || self.sft.allowed(w[pos - 1], s));
                    if let Some(s) = ok {
                        w[pos] = s;
                        if self.fill_from(&mut w, pos + 1) {
                            self.current = Some(w.clone());
                            return Some(Word(w));
                        }
                    }
                }
                self.done = true;
                None
            }
        }
    }
}

/// For each ordered pair `(a, b)` the lexicographically first word `k` of
/// length `r - 1` with `a·k·b` admissible.
#[derive(Clone, Debug)]
pub struct ConnectorTable {
    len: usize,
    table: Vec<Vec<Vec<u8>>>,
}

impl ConnectorTable {
    pub fn new(sft: &Sft) -> Self {
        let k = sft.alphabet_size() as u8;
        let len = sft.connector_len();
        let table = (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| {
                        sft.joins(a, b, len)
                            .into_iter()
                            .next()
                            .expect("A^r > 0 guarantees a connector")
                    })
                    .collect()
            })
            .collect();
        ConnectorTable { len, table }
    }

    pub fn connector_len(&self) -> usize {
        self.len
    }

    pub fn get(&self, a: u8, b: u8) -> &[u8] {
        &self.table[a as usize][b as usize]
    }

    pub fn concatenate(&self, sft: &Sft, parts: &[Word]) -> Result<Word> {
        let mut out: Vec<u8> = Vec::new();
        for p in parts {
            if p.is_empty() {
                return Err(Error::Precondition("concatenation parts must be nonempty".into()));
            }
            sft.validate(p)?;
            if let Some(&last) = out.last() {
                out.extend_from_slice(self.get(last, p[0]));
            }
            out.extend_from_slice(p);
        }
        debug_assert!(sft.is_admissible(&out));
        Ok(Word(out))
    }
}

/// The measure of maximal entropy: a Markov chain with
/// `P[i][j] = A[i][j] v_j / (λ v_i)` and stationary law `π_i = u_i v_i`.
#[derive(Clone, Debug)]
pub struct ParryMeasure {
    pub transition: Vec<Vec<f64>>,
    pub stationary: Vec<f64>,
    initial: WeightedIndex<f64>,
    rows: Vec<WeightedIndex<f64>>,
}

impl ParryMeasure {
    pub fn new(sft: &Sft) -> Self {
        let k = sft.alphabet_size();
        let (u, v, lambda) = (sft.left_vector(), sft.right_vector(), sft.perron_root());
        let transition: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if sft.adjacency[i][j] { v[j] / (lambda * v[i]) } else { 0.0 })
                    .collect()
            })
            .collect();
        let stationary: Vec<f64> = (0..k).map(|i| u[i] * v[i]).collect();
        let initial = WeightedIndex::new(&stationary).expect("positive stationary vector");
        let rows = transition
            .iter()
            .map(|row| WeightedIndex::new(row).expect("every symbol has a successor"))
            .collect();
        ParryMeasure {
            transition,
            stationary,
            initial,
            rows,
        }
    }

    /// `log ν([w])`, `-∞` for inadmissible words.
    pub fn log_mass(&self, w: &[u8]) -> f64 {
        match w.first() {
            None => 0.0,
            Some(&a) => {
                let mut l = self.stationary[a as usize].ln();
                for p in w.windows(2) {
                    l += self.transition[p[0] as usize][p[1] as usize].ln();
                }
                l
            }
        }
    }

    /// `-Σ π_i P_ij log P_ij`.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (pi, row) in self.stationary.iter().zip(&self.transition) {
            for &p in row.iter().filter(|&&p| p > 0.0) {
                h -= pi * p * p.ln();
            }
        }
        h
    }

    pub fn sample_into(&self, n: usize, rng: &mut impl Rng, out: &mut Vec<u8>) {
        if n == 0 {
            return;
        }
        let mut s = self.initial.sample(rng);
        out.push(s as u8);
        for _ in 1..n {
            s = self.rows[s].sample(rng);
            out.push(s as u8);
        }
    }

    /// Continue a chain from `prev` for `n` further symbols.
    pub fn extend_from(&self, prev: u8, n: usize, rng: &mut impl Rng, out: &mut Vec<u8>) {
        let mut s = prev as usize;
        for _ in 0..n {
            s = self.rows[s].sample(rng);
            out.push(s as u8);
        }
    }

    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Word {
        let mut out = Vec::with_capacity(n);
        self.sample_into(n, rng, &mut out);
        Word(out)
    }
}

/// Draw a length-`n` word from the Parry measure, deterministically in `seed`.
pub fn parry_sample(sft: &Sft, n: usize, seed: u64) -> Word {
    sft.parry().sample(n, &mut seeded_rng(seed, 0))
}

impl fmt::Display for Sft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alphabet: {}", self.labels.join(" "))?;
        for row in &self.adjacency {
            let r: Vec<&str> = row.iter().map(|&x| if x { "1" } else { "0" }).collect();
            writeln!(f, "  {}", r.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN_LOG: f64 = 0.481_211_825_059_603_4;

    #[test]
    fn build_examples() {
        let full = Sft::full_shift(2);
        assert_eq!(full.aperiodicity_exponent(), 1);
        assert!((full.perron_root() - 2.0).abs() < 1e-12);
        let g = Sft::golden_mean();
        assert_eq!(g.aperiodicity_exponent(), 2);
        assert!((g.perron_root() - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        let err = build_sft(vec![vec![0, 1], vec![1, 0]]).unwrap_err();
        assert!(matches!(err, Error::NotAperiodicIrreducible(_)), "{err}");
        assert!(build_sft(vec![vec![1, 1], vec![0, 1]]).is_err());
        assert!(build_sft(vec![vec![1]]).is_err());
        assert!(build_sft(vec![vec![1, 2], vec![1, 1]]).is_err());
    }

    #[test]
    fn perron_normalisation() {
        for s in [Sft::golden_mean(), Sft::full_shift(3), build_sft(vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 0]]).unwrap()] {
            let dot: f64 = s.left_vector().iter().zip(s.right_vector()).map(|(u, v)| u * v).sum();
            assert!((dot - 1.0).abs() < 1e-12);
            assert!(s.left_vector().iter().chain(s.right_vector()).all(|&x| x > 0.0));
        }
    }

    #[test]
    fn enumeration_examples() {
        let g = Sft::golden_mean();
        let w: Vec<String> = g.enumerate_words(3).unwrap().map(|w| g.format_word(&w)).collect();
        assert_eq!(w, ["000", "001", "010", "100", "101"]);
        assert_eq!(Sft::full_shift(2).enumerate_words(4).unwrap().count(), 16);
        assert_eq!(g.enumerate_words(10).unwrap().count(), 144);
    }

    #[test]
    fn enumeration_respects_cap() {
        let err = Sft::full_shift(2).enumerate_words(40).err().unwrap();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn walk_visits_every_prefix() {
        let g = Sft::golden_mean();
        let mut counts = vec![0u64; 9];
        g.walk_words(8, |w| {
            counts[w.len()] += 1;
            true
        })
        .unwrap();
        for n in 1..=8 {
            assert_eq!(counts[n] as u128, g.word_count_exact(n));
        }
    }

    #[test]
    fn entropy_examples() {
        assert!((Sft::full_shift(2).topological_entropy() - 2f64.ln()).abs() < 1e-12);
        assert!((Sft::golden_mean().topological_entropy() - GOLDEN_LOG).abs() < 1e-12);
        assert!((Sft::full_shift(3).topological_entropy() - 3f64.ln()).abs() < 1e-12);
        let g = Sft::golden_mean();
        assert!((g.entropy_from_counts(10, 20) - GOLDEN_LOG).abs() < 0.01);
    }

    #[test]
    fn connectors_and_concatenation() {
        let g = Sft::golden_mean();
        let w = g.admissible_concatenation(&[Word(vec![1]), Word(vec![1])]).unwrap();
        assert_eq!(g.format_word(&w), "101");
        let f = Sft::full_shift(2);
        let w = f.admissible_concatenation(&[Word(vec![1, 0]), Word(vec![1])]).unwrap();
        assert_eq!(w.0, vec![1, 0, 1]);
        let parts = [Word(vec![1]), Word(vec![0, 1]), Word(vec![1, 0])];
        let w = g.admissible_concatenation(&parts).unwrap();
        assert_eq!(w.len(), 5 + 2 * g.connector_len());
        assert!(g.is_admissible(&w));
    }

    #[test]
    fn parry_is_stochastic_and_stationary() {
        let g = Sft::golden_mean();
        let p = g.parry();
        for row in &p.transition {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for j in 0..2 {
            let s: f64 = (0..2).map(|i| p.stationary[i] * p.transition[i][j]).sum();
            assert!((s - p.stationary[j]).abs() < 1e-12);
        }
        assert!((p.entropy() - GOLDEN_LOG).abs() < 1e-9);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((p.stationary[0] - phi * phi / (1.0 + phi * phi)).abs() < 1e-12);
    }

    #[test]
    fn parry_sampling_is_deterministic() {
        let g = Sft::golden_mean();
        assert_eq!(parry_sample(&g, 100, 7), parry_sample(&g, 100, 7));
        assert!(g.is_admissible(&parry_sample(&g, 1000, 3)));
    }

    #[test]
    fn labels_round_trip() {
        let s = Sft::from_spec(SftSpec {
            alphabet: Some(vec!["a".into(), "b".into()]),
            adjacency: vec![vec![1, 1], vec![1, 0]],
        })
        .unwrap();
        let w = s.parse_word("aab").unwrap();
        assert_eq!(s.format_word(&w), "aab");
        assert!(s.parse_word("abb").is_err());
    }

    #[test]
    fn cylinder_diameter() {
        let f = Sft::full_shift(2);
        let words: Vec<Word> = f.enumerate_words(6).unwrap().collect();
        for a in &words {
            for b in &words {
                let n = agreement(a, b);
                if n < 6 {
                    assert_eq!(distance(a, b), (-(n as f64)).exp());
                }
            }
        }
    }
}
