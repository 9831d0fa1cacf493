//! Weight sequences `s_n`, their partial sums `S_n`, the asymptotic ratio
//! `S_{n+1} / ((n+1) s_n)` and the interleaved `(n_k, m_k)` schedules built
//! for weights whose ratio is unbounded.
//!
//! Schedules for the harmonic weights outgrow every machine integer after two
//! or three entries (`S_{n_k} ≥ k 2^k` forces `n_k ≈ e^{k 2^k}`), so positions
//! are carried as [`Index`]: exact below `2^53`, by their natural logarithm
//! above it.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{RwLock, RwLockReadGuard};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest prefix materialised for the analytic families; beyond it partial
/// sums continue with an Euler–Maclaurin tail.
pub const CACHE_LIMIT: u64 = 1 << 22;

/// Positions at or above this are stored as logarithms.
pub const EXACT_LIMIT: u64 = 1 << 53;

/// A position in a weight sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Index {
    Exact(u64),
    /// Natural logarithm of a position too large for exact storage.
    Log(f64),
}

impl Index {
    pub fn ln(self) -> f64 {
        match self {
            Index::Exact(n) => (n as f64).ln(),
            Index::Log(l) => l,
        }
    }

    /// Position `e^l`, rounded when it is exactly representable.
    pub fn from_ln(l: f64) -> Index {
        if l < (EXACT_LIMIT as f64).ln() {
            Index::Exact(l.exp().round() as u64)
        } else {
            Index::Log(l)
        }
    }

    pub fn exact(self) -> Option<u64> {
        match self {
            Index::Exact(n) => Some(n),
            Index::Log(_) => None,
        }
    }

    /// `self / other` as a real number.
    pub fn ratio(self, other: Index) -> f64 {
        match (self, other) {
            (Index::Exact(a), Index::Exact(b)) => a as f64 / b as f64,
            _ => (self.ln() - other.ln()).exp(),
        }
    }

    pub fn next(self) -> Index {
        match self {
            Index::Exact(n) if n + 1 < EXACT_LIMIT => Index::Exact(n + 1),
            Index::Exact(n) => Index::Log(((n + 1) as f64).ln()),
            Index::Log(l) => Index::Log(l + (-l).exp().ln_1p()),
        }
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, other: &Index) -> Option<Ordering> {
        match (self, other) {
            (Index::Exact(a), Index::Exact(b)) => a.partial_cmp(b),
            _ => self.ln().partial_cmp(&other.ln()),
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Exact(n) => write!(f, "{n}"),
            Index::Log(l) => write!(f, "e^{l:.6}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightFamily {
    /// `s_n = 1`
    Constant,
    /// `s_n = (n+1)^d` with `-1 < d < 0`
    Power { d: f64 },
    /// `s_n = 1/(n+1)`
    Harmonic,
    /// A finite, positive, non-increasing list.
    Explicit(Vec<f64>),
}

#[derive(Debug, Default)]
struct SumCache {
    /// `sums[n] = S_n`
    sums: Vec<f64>,
    acc: CompensatedSum,
}

/// A decreasing, non-summable sequence of positive weights with a lazily
/// extended table of partial sums.
///
/// Reads of the materialised prefix may happen concurrently; extending the
/// table takes the write lock.
#[derive(Debug)]
pub struct WeightSequence {
    family: WeightFamily,
    cache: RwLock<SumCache>,
}

impl Clone for WeightSequence {
    fn clone(&self) -> Self {
        Self::with_family(self.family.clone())
    }
}

impl WeightSequence {
    fn with_family(family: WeightFamily) -> Self {
        WeightSequence {
            family,
            cache: RwLock::new(SumCache {
                sums: vec![0.0],
                acc: CompensatedSum::new(),
            }),
        }
    }

    pub fn constant() -> Self {
        Self::with_family(WeightFamily::Constant)
    }

    pub fn harmonic() -> Self {
        Self::with_family(WeightFamily::Harmonic)
    }

    /// `s_n = (n+1)^d`; `d = 0` gives the constant family.
    pub fn power(d: f64) -> Result<Self> {
        if !(d > -1.0 && d <= 0.0) {
            return Err(Error::InvalidWeights(format!(
                "power exponent must satisfy -1 < d <= 0, got {d}"
            )));
        }
        if d == 0.0 {
            return Ok(Self::constant());
        }
        Ok(Self::with_family(WeightFamily::Power { d }))
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeights("empty weight list".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "weight s_{i} = {v} is not a positive finite number"
                )));
            }
            if i > 0 && v > values[i - 1] {
                return Err(Error::InvalidWeights(format!(
                    "weights increase at n = {i}: {} < {v}",
                    values[i - 1]
                )));
            }
        }
        Ok(Self::with_family(WeightFamily::Explicit(values)))
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    /// Number of available weights, `None` for the infinite families.
    pub fn len(&self) -> Option<u64> {
        match &self.family {
            WeightFamily::Explicit(v) => Some(v.len() as u64),
            _ => None,
        }
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.family, WeightFamily::Explicit(_))
    }

    pub fn label(&self) -> String {
        match &self.family {
            WeightFamily::Constant => "constant".into(),
            WeightFamily::Power { d } => format!("power(d={d})"),
            WeightFamily::Harmonic => "harmonic".into(),
            WeightFamily::Explicit(v) => format!("explicit(len={})", v.len()),
        }
    }

    fn out_of_range(&self, index: impl fmt::Display) -> Error {
        Error::IndexOutOfRange {
            index: index.to_string(),
            available: match self.len() {
                Some(l) => format!("{l} weights"),
                None => "exact indices only".into(),
            },
        }
    }

    /// `s_n`.
    pub fn weight(&self, n: u64) -> Result<f64> {
        Ok(match &self.family {
            WeightFamily::Constant => 1.0,
            WeightFamily::Power { d } => ((n + 1) as f64).powf(*d),
            WeightFamily::Harmonic => 1.0 / (n + 1) as f64,
            WeightFamily::Explicit(v) => *v.get(n as usize).ok_or_else(|| self.out_of_range(n))?,
        })
    }

    /// `ln s_n`, also defined on logarithmic indices for the analytic families.
    pub fn ln_weight(&self, n: Index) -> Result<f64> {
        match (n, &self.family) {
            (Index::Exact(k), _) => Ok(self.weight(k)?.ln()),
            (Index::Log(_), WeightFamily::Constant) => Ok(0.0),
            (Index::Log(l), WeightFamily::Power { d }) => Ok(d * l),
            (Index::Log(l), WeightFamily::Harmonic) => Ok(-l),
            (Index::Log(_), WeightFamily::Explicit(_)) => Err(self.out_of_range(n)),
        }
    }

    fn ensure(&self, upto: u64) -> Result<()> {
        let target = match &self.family {
            WeightFamily::Constant => return Ok(()),
            WeightFamily::Explicit(v) => {
                if upto > v.len() as u64 {
                    return Err(self.out_of_range(upto));
                }
                upto
            }
            _ => upto.clamp(4096, CACHE_LIMIT),
        } as usize;
        if self.cache.read().expect("weight cache poisoned").sums.len() > target {
            return Ok(());
        }
        let mut cache = self.cache.write().expect("weight cache poisoned");
        let start = cache.sums.len();
        cache.sums.reserve(target + 1 - start.min(target + 1));
        for k in (start - 1)..target {
            let s = self.weight(k as u64)?;
            cache.acc.add(s);
            let v = cache.acc.value();
            cache.sums.push(v);
        }
        Ok(())
    }

    /// Read access to the partial sums up to `upto`, extending the table first.
    pub fn view(&self, upto: u64) -> Result<SumView<'_>> {
        self.ensure(upto)?;
        Ok(SumView {
            seq: self,
            cache: self.cache.read().expect("weight cache poisoned"),
        })
    }

    /// `S_n = s_0 + ... + s_{n-1}`.
    pub fn partial_sum(&self, n: u64) -> Result<f64> {
        self.view(n)?.sum(n)
    }

    /// `S_n` at a possibly logarithmic index.
    pub fn partial_sum_at(&self, n: Index) -> Result<f64> {
        match n {
            Index::Exact(k) => self.partial_sum(k),
            Index::Log(l) => self.log_sum(l).ok_or_else(|| self.out_of_range(n)),
        }
    }

    /// Asymptotic partial sum at `n = e^l`, for families where it is known.
    fn log_sum(&self, l: f64) -> Option<f64> {
        match self.family {
            WeightFamily::Harmonic => {
                let inv = (-l).exp();
                Some(l + EULER_GAMMA + 0.5 * inv - inv * inv / 12.0)
            }
            WeightFamily::Constant => Some(l.exp()),
            _ => None,
        }
    }

    /// `S_{n+1} / ((n+1) s_n)`.
    pub fn ratio(&self, n: u64) -> Result<f64> {
        let view = self.view(n + 1)?;
        view.ratio(n)
    }

    /// The quantity whose records select `n_k`: `S_n / (n s_{n-1})`, which is
    /// the ratio evaluated at `n - 1`.
    pub fn growth(&self, n: Index) -> Result<f64> {
        let s = self.partial_sum_at(n)?;
        let prev = match n {
            Index::Exact(0) => {
                return Err(Error::Precondition("growth is defined for n >= 1".into()))
            }
            Index::Exact(k) => Index::Exact(k - 1),
            Index::Log(_) => n,
        };
        Ok(s * (-(n.ln() + self.ln_weight(prev)?)).exp())
    }

    /// Ratio diagnostics over the prefix `[0, horizon]`.
    pub fn classify(&self, horizon: u64) -> Result<RatioDiagnostics> {
        if horizon < 1 {
            return Err(Error::Precondition("classification horizon must be >= 1".into()));
        }
        let scan_to = match &self.family {
            WeightFamily::Explicit(v) => {
                if v.len() < 2 {
                    return Err(Error::InvalidWeights(
                        "need at least two weights to classify".into(),
                    ));
                }
                let len = v.len() as u64;
                let view = self.view(len)?;
                let total = view.sum(len)?;
                let half = view.sum(len / 2)?;
                if len >= 16 && total - half <= 1e-9 * total {
                    return Err(Error::InvalidWeights(format!(
                        "partial sums stall at {total}: the list looks summable"
                    )));
                }
                horizon.min(len - 1)
            }
            _ => horizon.min(CACHE_LIMIT - 1),
        };
        let view = self.view(scan_to + 1)?;
        let mut sup = f64::NEG_INFINITY;
        let mut argsup = 0;
        for n in 0..=scan_to {
            let r = view.ratio(n)?;
            if r > sup {
                sup = r;
                argsup = n;
            }
        }
        drop(view);
        let mut trend = Vec::new();
        let mut p = 1u64;
        while p < scan_to.max(horizon) {
            if p <= scan_to || !self.is_explicit() {
                trend.push((p, self.ratio(p)?));
            }
            p = p.saturating_mul(10);
        }
        let last = if self.is_explicit() { scan_to } else { horizon };
        trend.push((last, self.ratio(last)?));

        let classification = match &self.family {
            WeightFamily::Constant => Classification::Bounded { g: 1.0 },
            WeightFamily::Power { d } => Classification::Bounded { g: 1.0 / (1.0 + d) },
            WeightFamily::Harmonic => Classification::Unbounded,
            WeightFamily::Explicit(_) => Classification::Unknown,
        };
        Ok(RatioDiagnostics {
            horizon: scan_to,
            empirical_sup: sup,
            argsup,
            trend,
            classification,
        })
    }
}

/// Borrowed view of the partial-sum table.
pub struct SumView<'a> {
    seq: &'a WeightSequence,
    cache: RwLockReadGuard<'a, SumCache>,
}

impl SumView<'_> {
    #[inline]
    pub fn sum(&self, n: u64) -> Result<f64> {
        if let Some(&s) = self.cache.sums.get(n as usize) {
            return Ok(s);
        }
        match self.seq.family {
            WeightFamily::Constant => Ok(n as f64),
            WeightFamily::Power { d } => {
                let a = (self.cache.sums.len() - 1) as u64;
                Ok(self.cache.sums[a as usize] + power_tail(d, a, n))
            }
            WeightFamily::Harmonic => {
                let a = (self.cache.sums.len() - 1) as u64;
                Ok(self.cache.sums[a as usize] + power_tail(-1.0, a, n))
            }
            WeightFamily::Explicit(_) => Err(self.seq.out_of_range(n)),
        }
    }

    #[inline]
    pub fn ratio(&self, n: u64) -> Result<f64> {
        Ok(self.sum(n + 1)? / ((n + 1) as f64 * self.seq.weight(n)?))
    }
}

/// `Σ_{k=a}^{n-1} (k+1)^d` by Euler–Maclaurin, accurate once `a` is in the
/// thousands.
fn power_tail(d: f64, a: u64, n: u64) -> f64 {
    if n <= a {
        return 0.0;
    }
    let (x0, x1) = ((a + 1) as f64, (n + 1) as f64);
    let f = |x: f64| x.powf(d);
    let f1 = |x: f64| d * x.powf(d - 1.0);
    let f3 = |x: f64| d * (d - 1.0) * (d - 2.0) * x.powf(d - 3.0);
    let integral = if d == -1.0 {
        (x1 / x0).ln()
    } else {
        (x1.powf(d + 1.0) - x0.powf(d + 1.0)) / (d + 1.0)
    };
    integral + (f(x0) - f(x1)) / 2.0 + (f1(x1) - f1(x0)) / 12.0 - (f3(x1) - f3(x0)) / 720.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Classification {
    Bounded { g: f64 },
    Unbounded,
    /// Finite data cannot decide a limsup.
    Unknown,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Bounded { g } => write!(f, "bounded G={g}"),
            Classification::Unbounded => write!(f, "unbounded"),
            Classification::Unknown => write!(f, "unknown"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioDiagnostics {
    /// Last index actually scanned.
    pub horizon: u64,
    pub empirical_sup: f64,
    pub argsup: u64,
    /// `(n, ratio(n))` at powers of ten and at the horizon.
    pub trend: Vec<(u64, f64)>,
    pub classification: Classification,
}

/// How the raw record sequence is thinned into a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Thinning {
    /// Greedy smallest entries whose three certificates are all `≤ 2^{-k}`.
    Dyadic,
    /// Next record after the previous `m`, no certificate required.
    Consecutive,
    /// Smallest record with `n_k / m_k ≤ 2^{-k}`; the other two certificates
    /// are not required.
    IndexRatio,
    /// Supplied by the caller.
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// `k / S_{n_k}`
    pub count_over_sum: f64,
    /// `(S_{m_k} - S_{n_k}) / S_{m_k}`
    pub block_mass: f64,
    /// `n_k / m_k`
    pub index_ratio: f64,
}

impl Certificate {
    pub fn within(&self, bound: f64) -> bool {
        self.count_over_sum <= bound && self.block_mass <= bound && self.index_ratio <= bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleEntry {
    pub n: Index,
    pub m: Index,
    /// `M_k = S_{n_k} / (n_k s_{n_k - 1})`
    pub growth: f64,
    pub sum_n: f64,
    pub sum_m: f64,
    pub certificate: Certificate,
}

/// Interleaved indices `n_1 ≤ m_1 < n_2 ≤ m_2 < ...`, indexed from `k = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UbarSchedule {
    pub thinning: Thinning,
    pub entries: Vec<ScheduleEntry>,
}

impl UbarSchedule {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry `k`, counting from 1.
    pub fn entry(&self, k: usize) -> &ScheduleEntry {
        &self.entries[k - 1]
    }

    /// Every entry `k` carries certificates `≤ 2^{-k}`.
    pub fn is_certified(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(i, e)| e.certificate.within(0.5f64.powi(i as i32 + 1)))
    }

    /// `Σ_{ℓ ≤ k} (S_{m_ℓ} - S_{n_ℓ}) / S_{m_k}`.
    pub fn telescoping_sum(&self, k: usize) -> f64 {
        let num: CompensatedSum = self.entries[..k].iter().map(|e| e.sum_m - e.sum_n).collect();
        num.value() / self.entries[k - 1].sum_m
    }

    /// Largest exact `m_k`, if every index is exact.
    pub fn exact_extent(&self) -> Option<u64> {
        self.entries.last().and_then(|e| e.m.exact())
    }

    /// A caller-supplied schedule, validated for interleaving.
    pub fn custom(w: &WeightSequence, pairs: &[(u64, u64)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(pairs.len());
        for (i, &(n, m)) in pairs.iter().enumerate() {
            if n > m || (i > 0 && pairs[i - 1].1 >= n) {
                return Err(Error::Precondition(format!(
                    "schedule pairs must satisfy n_k <= m_k < n_(k+1); entry {} = ({n}, {m})",
                    i + 1
                )));
            }
            let sum_n = w.partial_sum(n)?;
            let sum_m = w.partial_sum(m)?;
            let growth = if n >= 1 { w.growth(Index::Exact(n))? } else { f64::NAN };
            entries.push(ScheduleEntry {
                n: Index::Exact(n),
                m: Index::Exact(m),
                growth,
                sum_n,
                sum_m,
                certificate: Certificate {
                    count_over_sum: (i + 1) as f64 / sum_n,
                    block_mass: if sum_m > 0.0 { (sum_m - sum_n) / sum_m } else { 0.0 },
                    index_ratio: if m > 0 { n as f64 / m as f64 } else { 1.0 },
                },
            });
        }
        Ok(UbarSchedule {
            thinning: Thinning::Custom,
            entries,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ScheduleOptions {
    pub thinning: Thinning,
    /// For explicit lists: the empirical ratio must exceed this within the horizon.
    pub ratio_threshold: f64,
    /// Exact scan length before switching to logarithmic search (harmonic only).
    pub scan_limit: u64,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        ScheduleOptions {
            thinning: Thinning::Dyadic,
            ratio_threshold: 10.0,
            scan_limit: CACHE_LIMIT,
        }
    }
}

/// Builds `count` schedule entries below `horizon`.
///
/// `n_k` runs over strict records of `S_n / (n s_{n-1})`; `m_k` is the least
/// `m ≥ n_k` with `S_{m+1} - S_{n_k} ≥ S_{n_k} M_k^{-1/2}`. With
/// [`Thinning::Dyadic`] the smallest admissible record is taken whose
/// certificates are all `≤ 2^{-k}`.
pub fn build_ubar_schedule(
    w: &WeightSequence,
    count: usize,
    horizon: Index,
    opts: &ScheduleOptions,
) -> Result<UbarSchedule> {
    let log_capable = matches!(w.family, WeightFamily::Harmonic);
    let scan_end: u64 = match &w.family {
        WeightFamily::Constant | WeightFamily::Power { .. } => {
            return Err(Error::Precondition(format!(
                "{} weights have bounded asymptotic ratio",
                w.label()
            )))
        }
        WeightFamily::Harmonic => {
            let h = horizon.exact().unwrap_or(u64::MAX);
            h.min(opts.scan_limit)
        }
        WeightFamily::Explicit(v) => {
            let len = v.len() as u64;
            let h = horizon.exact().unwrap_or(u64::MAX).min(len.saturating_sub(1));
            let diag = w.classify(h.max(1))?;
            if diag.empirical_sup < opts.ratio_threshold {
                return Err(Error::Precondition(format!(
                    "empirical ratio sup {} stays below threshold {} within the horizon",
                    diag.empirical_sup, opts.ratio_threshold
                )));
            }
            h
        }
    };

    let mut sched = UbarSchedule {
        thinning: opts.thinning,
        entries: Vec::with_capacity(count),
    };
    let exhausted = |sched: UbarSchedule| Error::HorizonExhausted {
        built: sched.entries.len(),
        requested: count,
        partial: Box::new(sched),
    };

    let mut best = f64::NEG_INFINITY;
    let mut cursor: u64 = 1;
    for k in 1..=count {
        let bound = 0.5f64.powi(k as i32);
        let lower = sched
            .entries
            .last()
            .map(|e| e.m.next())
            .unwrap_or(Index::Exact(1));
        let mut found = None;

        if let Index::Exact(_) = lower {
            let view = w.view(scan_end.min(w.len().unwrap_or(u64::MAX)))?;
            while cursor <= scan_end {
                let n = cursor;
                cursor += 1;
                let s_n = view.sum(n)?;
                let growth = s_n / (n as f64 * w.weight(n - 1)?);
                if growth <= best {
                    continue;
                }
                best = growth;
                if Index::Exact(n) < lower {
                    continue;
                }
                if opts.thinning == Thinning::Dyadic && k as f64 / s_n > bound {
                    continue;
                }
                match entry_at(w, &view, Index::Exact(n), k, horizon)? {
                    None => {
                        drop(view);
                        return Err(exhausted(sched));
                    }
                    Some(e) => {
                        if accepts(opts.thinning, &e.certificate, bound) {
                            found = Some(e);
                            break;
                        }
                    }
                }
            }
        }

        if found.is_none() && log_capable {
            let resume = if Index::Exact(cursor) > lower { Index::Exact(cursor) } else { lower };
            found = log_search(w, k, resume, horizon, opts.thinning)?;
        }
        match found {
            Some(e) => sched.entries.push(e),
            None => return Err(exhausted(sched)),
        }
    }
    Ok(sched)
}

fn accepts(thinning: Thinning, c: &Certificate, bound: f64) -> bool {
    match thinning {
        Thinning::Dyadic => c.within(bound),
        Thinning::IndexRatio => c.index_ratio <= bound,
        Thinning::Consecutive | Thinning::Custom => true,
    }
}

/// Schedule entry anchored at `n`; `None` if `m` would pass the horizon.
fn entry_at(
    w: &WeightSequence,
    view: &SumView<'_>,
    n: Index,
    k: usize,
    horizon: Index,
) -> Result<Option<ScheduleEntry>> {
    let (sum_n, growth) = match n {
        Index::Exact(e) => {
            let s = view.sum(e)?;
            (s, s / (e as f64 * w.weight(e - 1)?))
        }
        Index::Log(_) => (w.partial_sum_at(n)?, w.growth(n)?),
    };
    let threshold = sum_n + sum_n / growth.sqrt();
    let Some(m) = least_m(w, view, n, threshold)? else {
        return Ok(None);
    };
    if m > horizon {
        return Ok(None);
    }
    let sum_m = match m {
        Index::Exact(e) => view.sum(e)?,
        Index::Log(_) => w.partial_sum_at(m)?,
    };
    Ok(Some(ScheduleEntry {
        n,
        m,
        growth,
        sum_n,
        sum_m,
        certificate: Certificate {
            count_over_sum: k as f64 / sum_n,
            block_mass: (sum_m - sum_n) / sum_m,
            index_ratio: n.ratio(m),
        },
    }))
}

/// Least `m ≥ n` with `S_{m+1} ≥ threshold`.
fn least_m(
    w: &WeightSequence,
    view: &SumView<'_>,
    n: Index,
    threshold: f64,
) -> Result<Option<Index>> {
    let Index::Exact(n) = n else {
        return Ok(Some(Index::Log(invert_log_sum(w, threshold)?)));
    };
    let cap = match w.len() {
        Some(len) => len.saturating_sub(1),
        None => EXACT_LIMIT - 2,
    };
    let beyond_cap = || -> Result<Option<Index>> {
        if w.is_explicit() {
            Ok(None)
        } else {
            Ok(Some(Index::Log(invert_log_sum(w, threshold)?)))
        }
    };
    if n > cap {
        return beyond_cap();
    }
    let reaches = |m: u64| -> Result<bool> { Ok(view.sum(m + 1)? >= threshold) };
    if reaches(n)? {
        return Ok(Some(Index::Exact(n)));
    }
    let mut lo = n;
    let mut step = 1u64;
    let mut hi = loop {
        let hi = lo.saturating_add(step).min(cap);
        if reaches(hi)? {
            break hi;
        }
        if hi == cap {
            return beyond_cap();
        }
        lo = hi;
        step = step.saturating_mul(2);
    };
    // reaches(lo) is false, reaches(hi) is true
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(Index::Exact(hi)))
}

/// Smallest `l` with `S(e^l) ≥ threshold` on the asymptotic sum.
fn invert_log_sum(w: &WeightSequence, threshold: f64) -> Result<f64> {
    let f = |l: f64| w.log_sum(l).ok_or_else(|| w.out_of_range(Index::Log(l)));
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while f(hi)? < threshold {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Precondition("partial sums do not reach threshold".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Continuation of the record scan on logarithmic indices, for families whose
/// growth `S_n / (n s_{n-1})` is increasing (every index is a record).
fn log_search(
    w: &WeightSequence,
    k: usize,
    lower: Index,
    horizon: Index,
    thinning: Thinning,
) -> Result<Option<ScheduleEntry>> {
    let view = w.view(0)?;
    if !matches!(thinning, Thinning::Dyadic | Thinning::IndexRatio) {
        return entry_at(w, &view, lower, k, horizon);
    }
    let bound = 0.5f64.powi(k as i32);
    // Continuous form of the three certificates at n = e^l.
    let holds = |l: f64| -> Result<bool> {
        let s = w.log_sum(l).unwrap_or(f64::NAN);
        let growth = w.growth(Index::Log(l))?;
        let thr = s + s / growth.sqrt();
        let lm = invert_log_sum(w, thr)?;
        let sm = w.log_sum(lm).unwrap_or(f64::NAN);
        let index_ok = (l - lm).exp() <= bound;
        Ok(index_ok && (thinning == Thinning::IndexRatio || (k as f64 / s <= bound && (sm - s) / sm <= bound)))
    };
    let lo0 = lower.ln();
    let (mut lo, mut hi) = (lo0, lo0.max(1.0));
    if !holds(lo)? {
        while !holds(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > horizon.ln() {
                return Ok(None);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if holds(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    } else {
        hi = lo;
    }
    // Rounding onto an exact index can break a certificate by a hair.
    let mut nudge = 1e-13 * hi.max(1.0);
    let mut l = hi;
    for _ in 0..64 {
        let mut n = Index::from_ln(l);
        if n < lower {
            n = lower;
        }
        match entry_at(w, &view, n, k, horizon)? {
            None => return Ok(None),
            Some(e) if accepts(thinning, &e.certificate, bound) => return Ok(Some(e)),
            Some(_) => {
                l = hi + nudge;
                nudge *= 2.0;
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn partial_sum_examples() {
        assert_eq!(WeightSequence::constant().partial_sum(5).unwrap(), 5.0);
        let h = WeightSequence::harmonic();
        assert!(close(h.partial_sum(3).unwrap(), 11.0 / 6.0, 1e-15));
        assert_eq!(h.partial_sum(0).unwrap(), 0.0);
    }

    #[test]
    fn power_partial_sum_matches_direct_summation() {
        let w = WeightSequence::power(-0.5).unwrap();
        let direct: CompensatedSum = (1..=1_000_000u64).map(|k| (k as f64).powf(-0.5)).collect();
        let s = w.partial_sum(1_000_000).unwrap();
        assert!(close(s, direct.value(), 1e-9 * s));
        assert!((s - 2000.0).abs() / 2000.0 < 0.002);
    }

    #[test]
    fn euler_maclaurin_tail_continues_the_cache() {
        // Past CACHE_LIMIT the sum is analytic; compare against brute force.
        for w in [WeightSequence::harmonic(), WeightSequence::power(-0.3).unwrap()] {
            let n = CACHE_LIMIT + 123_457;
            let d = match w.family() {
                WeightFamily::Harmonic => -1.0,
                WeightFamily::Power { d } => *d,
                _ => unreachable!(),
            };
            let direct: CompensatedSum = (1..=n).map(|k| (k as f64).powf(d)).collect();
            let s = w.partial_sum(n).unwrap();
            assert!(close(s, direct.value(), 1e-12 * s), "{} vs {}", s, direct.value());
        }
    }

    #[test]
    fn ratio_examples() {
        let c = WeightSequence::constant();
        for n in [0, 1, 17, 1000] {
            assert_eq!(c.ratio(n).unwrap(), 1.0);
        }
        let h = WeightSequence::harmonic();
        assert!(close(h.ratio(2).unwrap(), 11.0 / 6.0, 1e-15));
        let p = WeightSequence::power(-0.5).unwrap();
        assert!(close(p.ratio(1_000_000).unwrap(), 2.0, 0.01));
    }

    #[test]
    fn explicit_validation() {
        assert!(WeightSequence::explicit(vec![]).is_err());
        assert!(WeightSequence::explicit(vec![1.0, 0.0]).is_err());
        assert!(WeightSequence::explicit(vec![1.0, 2.0]).is_err());
        assert!(WeightSequence::explicit(vec![1.0, f64::NAN]).is_err());
        let w = WeightSequence::explicit(vec![1.0, 0.5, 0.5]).unwrap();
        assert!(matches!(w.partial_sum(4), Err(Error::IndexOutOfRange { .. })));
        assert_eq!(w.partial_sum(3).unwrap(), 2.0);
    }

    #[test]
    fn power_exponent_range() {
        assert!(WeightSequence::power(-1.0).is_err());
        assert!(WeightSequence::power(0.1).is_err());
        assert_eq!(WeightSequence::power(0.0).unwrap().family(), &WeightFamily::Constant);
    }

    #[test]
    fn classify_families() {
        let d = WeightSequence::power(-0.5).unwrap().classify(1000).unwrap();
        assert_eq!(d.classification, Classification::Bounded { g: 2.0 });
        assert!(d.empirical_sup < 2.0 && d.empirical_sup > 1.9);
        let h = WeightSequence::harmonic().classify(1000).unwrap();
        assert_eq!(h.classification, Classification::Unbounded);
        let geometric: Vec<f64> = (0..200).map(|k| 0.5f64.powi(k)).collect();
        let g = WeightSequence::explicit(geometric).unwrap();
        assert!(matches!(g.classify(100), Err(Error::InvalidWeights(_))));
        let list: Vec<f64> = (0..1000).map(|k| 1.0 / (k + 1) as f64).collect();
        let e = WeightSequence::explicit(list).unwrap().classify(5000).unwrap();
        assert_eq!(e.classification, Classification::Unknown);
        assert_eq!(e.horizon, 999);
    }

    #[test]
    fn index_ordering_and_ratio() {
        assert!(Index::Exact(3) < Index::Exact(4));
        assert!(Index::Exact(u64::MAX / 2) < Index::Log(100.0));
        assert!(close(Index::Log(10.0).ratio(Index::Log(12.0)), (-2.0f64).exp(), 1e-15));
        assert_eq!(Index::from_ln(2.0f64.ln() * 10.0), Index::Exact(1024));
        assert!(matches!(Index::from_ln(100.0), Index::Log(_)));
    }

    #[test]
    fn constant_weights_reject_schedule() {
        let r = build_ubar_schedule(
            &WeightSequence::constant(),
            3,
            Index::Exact(1_000_000),
            &ScheduleOptions::default(),
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn harmonic_schedule_small_entries() {
        let w = WeightSequence::harmonic();
        let s = build_ubar_schedule(&w, 2, Index::Log(1e4), &ScheduleOptions::default()).unwrap();
        assert!(s.is_certified());
        let e1 = s.entry(1);
        // 1/S_n <= 1/2 first holds at n = 4 (H_4 = 25/12).
        assert_eq!(e1.n, Index::Exact(4));
        assert!(e1.m > e1.n);
        let e2 = s.entry(2);
        assert!(e2.n > e1.m);
    }

    #[test]
    fn explicit_prefix_agrees_with_family() {
        let w = WeightSequence::harmonic();
        let fam = build_ubar_schedule(&w, 2, Index::Exact(1_000_000), &ScheduleOptions::default())
            .unwrap();
        let list: Vec<f64> = (0..1_000_000).map(|k| 1.0 / (k + 1) as f64).collect();
        let e = WeightSequence::explicit(list).unwrap();
        let exp = build_ubar_schedule(&e, 2, Index::Exact(1_000_000), &ScheduleOptions::default())
            .unwrap();
        let pairs = |s: &UbarSchedule| s.entries.iter().map(|e| (e.n, e.m)).collect::<Vec<_>>();
        assert_eq!(pairs(&fam), pairs(&exp));
    }

    #[test]
    fn explicit_horizon_exhausted_reports_partial() {
        let list: Vec<f64> = (0..100_000).map(|k| 1.0 / (k + 1) as f64).collect();
        let e = WeightSequence::explicit(list).unwrap();
        match build_ubar_schedule(&e, 4, Index::Exact(100_000), &ScheduleOptions::default()) {
            Err(Error::HorizonExhausted { built, partial, .. }) => {
                assert_eq!(built, partial.len());
                assert!(built >= 1);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn index_ratio_thinning() {
        let opts = ScheduleOptions { thinning: Thinning::IndexRatio, ..Default::default() };
        let s = build_ubar_schedule(&WeightSequence::harmonic(), 4, Index::Exact(1 << 30), &opts).unwrap();
        for k in 1..=4 {
            assert!(s.entry(k).certificate.index_ratio <= 0.5f64.powi(k as i32));
        }
        assert_eq!((s.entry(3).n, s.entry(3).m), (Index::Exact(41), Index::Exact(329)));
    }
}
