//! Plain and weighted Birkhoff averages of bounded sequences, the
//! summation-by-parts identity behind the comparison of the two, and the
//! blockwise `{-1, 0, +1}` sequence whose weighted averages converge while its
//! plain averages oscillate.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{fmt12, CompensatedSum};
use crate::weights::{Classification, Index, Thinning, UbarSchedule, WeightSequence};

/// A real sequence with a declared bound `B ≥ sup |a_n|`.
pub trait BoundedSequence {
    fn value(&self, n: u64) -> f64;

    fn bound(&self) -> f64;

    /// Number of available terms, `None` when unbounded in length.
    fn len(&self) -> Option<u64> {
        None
    }
}

impl<T: BoundedSequence + ?Sized> BoundedSequence for &T {
    fn value(&self, n: u64) -> f64 {
        (**self).value(n)
    }
    fn bound(&self) -> f64 {
        (**self).bound()
    }
    fn len(&self) -> Option<u64> {
        (**self).len()
    }
}

#[derive(Clone, Debug)]
pub struct ExplicitSequence {
    values: Vec<f64>,
    bound: f64,
}

impl ExplicitSequence {
    pub fn new(values: Vec<f64>) -> Self {
        let bound = values.iter().fold(0.0f64, |b, v| b.max(v.abs()));
        ExplicitSequence { values, bound }
    }

    pub fn with_bound(values: Vec<f64>, bound: f64) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| v.abs() > bound) {
            return Err(Error::Precondition(format!("value {v} exceeds declared bound {bound}")));
        }
        Ok(ExplicitSequence { values, bound })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl BoundedSequence for ExplicitSequence {
    fn value(&self, n: u64) -> f64 {
        self.values[n as usize]
    }
    fn bound(&self) -> f64 {
        self.bound
    }
    fn len(&self) -> Option<u64> {
        Some(self.values.len() as u64)
    }
}

/// Sequence given by a generator closure.
pub struct FnSequence<F> {
    f: F,
    bound: f64,
}

impl<F: Fn(u64) -> f64> FnSequence<F> {
    pub fn new(bound: f64, f: F) -> Self {
        FnSequence { f, bound }
    }
}

impl<F: Fn(u64) -> f64> BoundedSequence for FnSequence<F> {
    fn value(&self, n: u64) -> f64 {
        let v = (self.f)(n);
        debug_assert!(v.abs() <= self.bound, "a_{n} = {v} exceeds bound {}", self.bound);
        v
    }
    fn bound(&self) -> f64 {
        self.bound
    }
}

fn check_len(a: &impl BoundedSequence, n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::Precondition("averages need n >= 1".into()));
    }
    match a.len() {
        Some(len) if n > len => Err(Error::OutOfRange {
            position: n as usize,
            depth: 0,
            len: len as usize,
        }),
        _ => Ok(()),
    }
}

/// `(1/n) Σ_{k<n} a_k`.
pub fn plain_average(a: &impl BoundedSequence, n: u64) -> Result<f64> {
    check_len(a, n)?;
    let acc: CompensatedSum = (0..n).map(|k| a.value(k)).collect();
    Ok(acc.value() / n as f64)
}

/// `(1/S_n) Σ_{k<n} s_k a_k`. With constant weights this is bit-for-bit the
/// plain average.
pub fn weighted_average(a: &impl BoundedSequence, w: &WeightSequence, n: u64) -> Result<f64> {
    check_len(a, n)?;
    let mut acc = CompensatedSum::new();
    for k in 0..n {
        acc.add(w.weight(k)? * a.value(k));
    }
    Ok(acc.value() / w.partial_sum(n)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: u64,
    pub plain: f64,
    pub weighted: f64,
    pub sum_weights: f64,
    pub ratio: f64,
}

/// Averages at a list of checkpoints, computed in one pass.
#[derive(Clone, Debug, Serialize)]
pub struct AverageTrace {
    pub rows: Vec<TraceRow>,
    pub bound: f64,
}

impl AverageTrace {
    /// Extrema of `(plain, weighted)` over checkpoints in the second half of
    /// the evaluated range: `((plain_min, plain_max), (weighted_min, weighted_max))`.
    pub fn tail_extrema(&self) -> ((f64, f64), (f64, f64)) {
        let last = self.rows.last().map(|r| r.n).unwrap_or(0);
        let mut p = (f64::INFINITY, f64::NEG_INFINITY);
        let mut q = p;
        for r in self.rows.iter().filter(|r| 2 * r.n >= last) {
            p = (p.0.min(r.plain), p.1.max(r.plain));
            q = (q.0.min(r.weighted), q.1.max(r.weighted));
        }
        (p, q)
    }

    /// CSV with header `n,plain_avg,weighted_avg,S_n,ratio`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "n,plain_avg,weighted_avg,S_n,ratio")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.n,
                fmt12(r.plain),
                fmt12(r.weighted),
                fmt12(r.sum_weights),
                fmt12(r.ratio)
            )?;
        }
        Ok(())
    }
}

pub fn average_trace(
    a: &impl BoundedSequence,
    w: &WeightSequence,
    checkpoints: &[u64],
) -> Result<AverageTrace> {
    let mut cps = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    let Some(&last) = cps.last() else {
        return Ok(AverageTrace { rows: vec![], bound: a.bound() });
    };
    check_len(a, last)?;
    if cps[0] == 0 {
        return Err(Error::Precondition("checkpoints must be >= 1".into()));
    }
    let mut plain = CompensatedSum::new();
    let mut weighted = CompensatedSum::new();
    let mut rows = Vec::with_capacity(cps.len());
    let mut next = cps.iter().peekable();
    for k in 0..last {
        let v = a.value(k);
        plain.add(v);
        weighted.add(w.weight(k)? * v);
        let n = k + 1;
        if next.peek() == Some(&&n) {
            next.next();
            let s = w.partial_sum(n)?;
            rows.push(TraceRow {
                n,
                plain: plain.value() / n as f64,
                weighted: weighted.value() / s,
                sum_weights: s,
                ratio: w.ratio(n)?,
            });
        }
    }
    Ok(AverageTrace { rows, bound: a.bound() })
}

/// `|Σ s_k a_k - (Σ_{k≤n-2} A_k (s_k - s_{k+1}) + s_{n-1} A_{n-1})|` with
/// `A_k = a_0 + ... + a_k`.
pub fn summation_by_parts_check(
    a: &impl BoundedSequence,
    w: &WeightSequence,
    n: u64,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition("summation by parts needs n >= 2".into()));
    }
    check_len(a, n)?;
    let mut direct = CompensatedSum::new();
    let mut parts = CompensatedSum::new();
    let mut prefix = CompensatedSum::new();
    for k in 0..n {
        let s = w.weight(k)?;
        let v = a.value(k);
        direct.add(s * v);
        prefix.add(v);
        if k + 1 < n {
            parts.add(prefix.value() * (s - w.weight(k + 1)?));
        } else {
            parts.add(s * prefix.value());
        }
    }
    Ok((direct.value() - parts.value()).abs())
}

/// The tolerance `10 B / √N` used for every finite-horizon comparison of
/// liminf/limsup proxies.
pub fn tail_tolerance(bound: f64, horizon: u64) -> f64 {
    10.0 * bound / (horizon as f64).sqrt()
}

/// Tail-window (`[N/2, N]`) proxies for the four quantities of the sandwich
/// `liminf plain ≤ liminf weighted ≤ limsup weighted ≤ limsup plain`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Sandwich {
    pub liminf_plain: f64,
    pub liminf_weighted: f64,
    pub limsup_weighted: f64,
    pub limsup_plain: f64,
    pub tolerance: f64,
}

impl Sandwich {
    /// Largest amount by which the ordering is violated (≤ 0 when it holds).
    pub fn violation(&self) -> f64 {
        (self.liminf_plain - self.liminf_weighted)
            .max(self.liminf_weighted - self.limsup_weighted)
            .max(self.limsup_weighted - self.limsup_plain)
    }

    pub fn holds(&self) -> bool {
        self.violation() <= self.tolerance
    }
}

/// Running extrema of plain and weighted averages over `n ∈ [⌈N/2⌉, N]`.
pub fn tail_extrema(
    a: &impl BoundedSequence,
    w: &WeightSequence,
    horizon: u64,
) -> Result<Sandwich> {
    check_len(a, horizon)?;
    let view = w.view(horizon)?;
    let start = horizon.div_ceil(2).max(1);
    let mut plain = CompensatedSum::new();
    let mut weighted = CompensatedSum::new();
    let mut p = (f64::INFINITY, f64::NEG_INFINITY);
    let mut q = p;
    for k in 0..horizon {
        let v = a.value(k);
        plain.add(v);
        weighted.add(w.weight(k)? * v);
        let n = k + 1;
        if n >= start {
            let pa = plain.value() / n as f64;
            let wa = weighted.value() / view.sum(n)?;
            p = (p.0.min(pa), p.1.max(pa));
            q = (q.0.min(wa), q.1.max(wa));
        }
    }
    Ok(Sandwich {
        liminf_plain: p.0,
        liminf_weighted: q.0,
        limsup_weighted: q.1,
        limsup_plain: p.1,
        tolerance: tail_tolerance(a.bound(), horizon),
    })
}

/// Finite-horizon check of the sandwich ordering.
pub fn sandwich_bounds(
    a: &impl BoundedSequence,
    w: &WeightSequence,
    horizon: u64,
) -> Result<Sandwich> {
    tail_extrema(a, w, horizon)
}

/// The reverse inequalities available for bounded asymptotic ratio `G`:
/// `limsup plain ≤ G limsup weighted + (1-G) liminf weighted` and the
/// mirrored liminf bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReverseBounds {
    pub g: f64,
    pub tail: Sandwich,
    /// `G·limsup_w + (1-G)·liminf_w`
    pub upper: f64,
    /// `G·liminf_w + (1-G)·limsup_w`
    pub lower: f64,
    pub upper_holds: bool,
    pub lower_holds: bool,
}

pub fn bar_reverse_bounds(
    a: &impl BoundedSequence,
    w: &WeightSequence,
    horizon: u64,
) -> Result<ReverseBounds> {
    let g = match w.classify(horizon.min(1_000_000))?.classification {
        Classification::Bounded { g } => g,
        other => {
            return Err(Error::Precondition(format!(
                "reverse bounds need bounded asymptotic ratio, {} is {other}",
                w.label()
            )))
        }
    };
    let tail = tail_extrema(a, w, horizon)?;
    let upper = g * tail.limsup_weighted + (1.0 - g) * tail.liminf_weighted;
    let lower = g * tail.liminf_weighted + (1.0 - g) * tail.limsup_weighted;
    Ok(ReverseBounds {
        g,
        tail,
        upper,
        lower,
        upper_holds: tail.limsup_plain <= upper + tail.tolerance,
        lower_holds: tail.liminf_plain >= lower - tail.tolerance,
    })
}

/// `a_ℓ = +1` on `[n_k, m_k)` for odd `k`, `-1` for even `k`, `0` elsewhere
/// (schedule entries counted from 1).
#[derive(Clone, Debug)]
pub struct CounterexampleSequence {
    schedule: UbarSchedule,
}

/// Sign carried by schedule entry `k` (1-based).
pub fn block_sign(k: usize) -> f64 {
    if k % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

pub fn make_counterexample(schedule: &UbarSchedule) -> Result<CounterexampleSequence> {
    if schedule.len() < 2 {
        return Err(Error::Precondition(
            "counterexample needs at least two schedule entries".into(),
        ));
    }
    if schedule.thinning != Thinning::Dyadic || !schedule.is_certified() {
        return Err(Error::Precondition(
            "counterexample needs a dyadically certified schedule".into(),
        ));
    }
    Ok(CounterexampleSequence {
        schedule: schedule.clone(),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Endpoint {
    /// Schedule entry (1-based).
    pub k: usize,
    /// `true` for `m_k`, `false` for `n_k`.
    pub closing: bool,
    pub index: Index,
    pub plain: f64,
    pub weighted: f64,
}

impl CounterexampleSequence {
    pub fn schedule(&self) -> &UbarSchedule {
        &self.schedule
    }

    /// Plain and weighted averages at every `n_k` and `m_k`, in closed form
    /// from the block structure; indices may be logarithmic.
    pub fn endpoints(&self) -> Vec<Endpoint> {
        let entries = &self.schedule.entries;
        let mut out = Vec::with_capacity(2 * entries.len());
        let mut weighted_num = CompensatedSum::new();
        for (i, e) in entries.iter().enumerate() {
            let k = i + 1;
            out.push(Endpoint {
                k,
                closing: false,
                index: e.n,
                plain: self.plain_closed_form(e.n, k - 1),
                weighted: weighted_num.value() / e.sum_n,
            });
            weighted_num.add(block_sign(k) * (e.sum_m - e.sum_n));
            out.push(Endpoint {
                k,
                closing: true,
                index: e.m,
                plain: self.plain_closed_form(e.m, k),
                weighted: weighted_num.value() / e.sum_m,
            });
        }
        out
    }

    /// `(1/at) Σ_{ℓ ≤ blocks} σ_ℓ (m_ℓ - n_ℓ)`.
    fn plain_closed_form(&self, at: Index, blocks: usize) -> f64 {
        let entries = &self.schedule.entries[..blocks];
        if let (Some(at), true) = (at.exact(), entries.iter().all(|e| e.m.exact().is_some())) {
            let num: i128 = entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let len = (e.m.exact().unwrap() - e.n.exact().unwrap()) as i128;
                    if (i + 1) % 2 == 1 {
                        len
                    } else {
                        -len
                    }
                })
                .sum();
            return num as f64 / at as f64;
        }
        let acc: CompensatedSum = entries
            .iter()
            .enumerate()
            .map(|(i, e)| block_sign(i + 1) * (e.m.ratio(at) - e.n.ratio(at)))
            .collect();
        acc.value()
    }

    /// Bound on `|weighted average at m_k|` recomputed from the schedule:
    /// `Σ_{ℓ<k} (S_{m_ℓ} - S_{n_ℓ}) / S_{m_{k-1}} + (S_{m_k} - S_{n_k}) / S_{m_k}`.
    pub fn weighted_bound(&self, k: usize) -> f64 {
        let entries = &self.schedule.entries;
        let e = &entries[k - 1];
        let own = (e.sum_m - e.sum_n) / e.sum_m;
        if k == 1 {
            return own;
        }
        let prev: CompensatedSum = entries[..k - 1].iter().map(|e| e.sum_m - e.sum_n).collect();
        prev.value() / entries[k - 2].sum_m + own
    }

    /// Smallest endpoint after which every endpoint has `|weighted| ≤ level`,
    /// and the largest such value. Between consecutive endpoints the weighted
    /// average is monotone, so this bounds all `n` from that endpoint through
    /// the last `m_k`.
    pub fn weighted_settles(&self, level: f64) -> Option<(Index, f64)> {
        let eps = self.endpoints();
        let mut tail_max = 0.0f64;
        let mut start = None;
        for ep in eps.iter().rev() {
            let v = ep.weighted.abs();
            if v > level {
                break;
            }
            tail_max = tail_max.max(v);
            start = Some(ep.index);
        }
        start.map(|s| (s, tail_max))
    }
}

impl BoundedSequence for CounterexampleSequence {
    fn value(&self, l: u64) -> f64 {
        let at = Index::Exact(l);
        let entries = &self.schedule.entries;
        // first entry whose m exceeds l
        let pos = entries.partition_point(|e| e.m <= at);
        match entries.get(pos) {
            Some(e) if e.n <= at => block_sign(pos + 1),
            _ => 0.0,
        }
    }

    fn bound(&self) -> f64 {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{build_ubar_schedule, ScheduleOptions};

    fn harmonic_counterexample(k: usize) -> CounterexampleSequence {
        let w = WeightSequence::harmonic();
        let s = build_ubar_schedule(&w, k, Index::Log(1e5), &ScheduleOptions::default()).unwrap();
        make_counterexample(&s).unwrap()
    }

    #[test]
    fn constant_sequences_average_to_constant() {
        let a = FnSequence::new(2.5, |_| 2.5);
        for w in [WeightSequence::constant(), WeightSequence::harmonic()] {
            assert!((weighted_average(&a, &w, 1000).unwrap() - 2.5).abs() < 1e-13);
        }
        assert_eq!(plain_average(&a, 7).unwrap(), 2.5);
    }

    #[test]
    fn alternating_plain_average() {
        let a = FnSequence::new(1.0, |n| if n % 2 == 0 { 1.0 } else { 0.0 });
        assert_eq!(plain_average(&a, 10).unwrap(), 0.5);
    }

    #[test]
    fn constant_weights_are_plain_bit_for_bit() {
        let vals: Vec<f64> = (0..5000).map(|k| ((k * 7919) % 1000) as f64 / 999.0 - 0.5).collect();
        let a = ExplicitSequence::new(vals);
        let c = WeightSequence::constant();
        for n in [1, 2, 17, 4999, 5000] {
            assert_eq!(
                weighted_average(&a, &c, n).unwrap().to_bits(),
                plain_average(&a, n).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn summation_by_parts_two_terms() {
        let a = ExplicitSequence::new(vec![0.3, -0.7]);
        let w = WeightSequence::explicit(vec![1.0, 0.25]).unwrap();
        // s0 a0 + s1 a1 = a0 (s0 - s1) + s1 (a0 + a1)
        assert!(summation_by_parts_check(&a, &w, 2).unwrap() < 1e-16);
        assert!(summation_by_parts_check(&a, &w, 1).is_err());
    }

    #[test]
    fn lengths_are_checked() {
        let a = ExplicitSequence::new(vec![1.0; 3]);
        assert!(plain_average(&a, 4).is_err());
        assert!(plain_average(&a, 0).is_err());
        assert!(ExplicitSequence::with_bound(vec![2.0], 1.0).is_err());
    }

    #[test]
    fn counterexample_blocks_follow_the_table() {
        let c = harmonic_counterexample(2);
        let s = c.schedule();
        let (n1, m1) = (s.entry(1).n.exact().unwrap(), s.entry(1).m.exact().unwrap());
        let (n2, m2) = (s.entry(2).n.exact().unwrap(), s.entry(2).m.exact().unwrap());
        assert_eq!(c.value(n1 - 1), 0.0);
        assert_eq!(c.value(n1), 1.0);
        assert_eq!(c.value(m1 - 1), 1.0);
        assert_eq!(c.value(m1), 0.0);
        assert_eq!(c.value(n2), -1.0);
        assert_eq!(c.value(m2 - 1), -1.0);
        assert_eq!(c.value(m2), 0.0);
    }

    #[test]
    fn closed_forms_match_direct_summation() {
        let c = harmonic_counterexample(2);
        let w = WeightSequence::harmonic();
        for ep in c.endpoints() {
            let n = ep.index.exact().unwrap();
            if n == 0 {
                continue;
            }
            let p = plain_average(&c, n).unwrap();
            let q = weighted_average(&c, &w, n).unwrap();
            assert!((p - ep.plain).abs() < 1e-12, "plain at {n}: {p} vs {}", ep.plain);
            assert!((q - ep.weighted).abs() < 1e-12, "weighted at {n}: {q} vs {}", ep.weighted);
        }
    }

    #[test]
    fn counterexample_rejects_raw_schedules() {
        let w = WeightSequence::harmonic();
        let opts = ScheduleOptions { thinning: Thinning::Consecutive, ..Default::default() };
        let s = build_ubar_schedule(&w, 3, Index::Exact(1 << 30), &opts).unwrap();
        assert!(make_counterexample(&s).is_err());
        let one = build_ubar_schedule(&w, 1, Index::Log(1e4), &ScheduleOptions::default()).unwrap();
        assert!(make_counterexample(&one).is_err());
    }

    #[test]
    fn weighted_values_respect_schedule_bound() {
        let c = harmonic_counterexample(6);
        for ep in c.endpoints().iter().filter(|e| e.closing) {
            assert!(ep.weighted.abs() <= c.weighted_bound(ep.k) + 1e-12);
        }
    }

    #[test]
    fn plain_checkpoint_bound_from_block_lengths() {
        let c = harmonic_counterexample(6);
        let s = c.schedule();
        for ep in c.endpoints().iter().filter(|e| e.closing && e.k >= 2) {
            let e = s.entry(ep.k);
            let prev = s.entry(ep.k - 1);
            let floor = 1.0 - e.n.ratio(e.m) - prev.m.ratio(e.m);
            assert!(block_sign(ep.k) * ep.plain >= floor - 1e-12);
        }
    }
}
