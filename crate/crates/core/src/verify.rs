//! Brute-force oracles and desk-scale experiments: exhaustive level-set
//! cylinder counts, the bounded/unbounded split for weighted averages, the
//! plain-versus-weighted level-set comparison, and the two ingredients of the
//! packing lower bound.

use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::averaging::{
    average_trace, make_counterexample, plain_average, tail_tolerance, weighted_average,
    Endpoint, FnSequence,
};
use crate::error::{Error, Result};
use crate::measures::{perturbation_bound, Anchor, PackingScheme, PerturbationBound};
use crate::numeric::{fmt12, seeded_rng, slope_through_origin};
use crate::potential::Potential;
use crate::sft::Sft;
use crate::thermo::PressureFunction;
use crate::weights::{
    build_ubar_schedule, Classification, Index, ScheduleOptions, Thinning, WeightSequence,
};

/// Cylinders of depth `n ∈ [depth_lo, depth_hi]` whose (weighted) Birkhoff
/// average over the complete windows lies within `eps` of `alpha`.
#[derive(Clone, Debug)]
pub struct LevelSetQuery {
    pub alpha: f64,
    pub eps: f64,
    pub depth_lo: usize,
    pub depth_hi: usize,
    /// `None` for plain averages.
    pub weights: Option<WeightSequence>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountingReport {
    pub alpha: f64,
    pub eps: f64,
    pub depths: Vec<usize>,
    pub counts: Vec<u64>,
    pub totals: Vec<u128>,
    /// Least-squares slope through the origin of `log count` against depth,
    /// over the top third of the depths; `-∞` when a count there vanishes.
    pub slope: f64,
    /// `H(α)` when `α` lies in the spectrum domain.
    pub spectrum: Option<f64>,
    pub h_top: f64,
}

impl CountingReport {
    pub fn all_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "n,count,total")?;
        for ((n, c), t) in self.depths.iter().zip(&self.counts).zip(&self.totals) {
            writeln!(out, "{n},{c},{t}")?;
        }
        Ok(())
    }
}

/// Fit over the top third of the depths (at least two points).
fn top_third_slope(depths: &[usize], counts: &[u64]) -> f64 {
    let take = (depths.len() / 3).max(2).min(depths.len());
    let start = depths.len() - take;
    if counts[start..].iter().any(|&c| c == 0) {
        return f64::NEG_INFINITY;
    }
    let pts: Vec<(f64, f64)> = depths[start..]
        .iter()
        .zip(&counts[start..])
        .map(|(&n, &c)| (n as f64, (c as f64).ln()))
        .collect();
    slope_through_origin(&pts)
}

pub fn count_level_cylinders(sft: &Sft, phi: &Potential, q: &LevelSetQuery) -> Result<CountingReport> {
    if q.depth_lo == 0 || q.depth_lo > q.depth_hi || q.depth_lo < phi.depth() {
        return Err(Error::Precondition(format!(
            "depth range [{}, {}] must be nonempty and start at or above the potential depth {}",
            q.depth_lo,
            q.depth_hi,
            phi.depth()
        )));
    }
    let m = phi.depth();
    let hi = q.depth_hi;
    let weights: Vec<f64> = match &q.weights {
        Some(w) => (0..hi as u64).map(|k| w.weight(k)).collect::<Result<_>>()?,
        None => vec![1.0; hi],
    };
    let sums: Vec<f64> = match &q.weights {
        Some(w) => (0..=hi as u64).map(|n| w.partial_sum(n)).collect::<Result<_>>()?,
        None => (0..=hi).map(|n| n as f64).collect(),
    };
    let mut counts = vec![0u64; hi + 1];
    let mut acc = vec![0.0f64; hi + 1];
    sft.walk_words(hi, |w| {
        let l = w.len();
        acc[l] = acc[l - 1];
        if l >= m {
            acc[l] += weights[l - m] * phi.value(&w[l - m..]);
        }
        if l >= q.depth_lo {
            let avg = acc[l] / sums[l + 1 - m];
            if (avg - q.alpha).abs() <= q.eps {
                counts[l] += 1;
            }
        }
        true
    })?;
    let depths: Vec<usize> = (q.depth_lo..=hi).collect();
    let counts: Vec<u64> = depths.iter().map(|&n| counts[n]).collect();
    let pf = PressureFunction::new(sft, phi)?;
    let spectrum = pf.spectrum_point(q.alpha).ok();
    Ok(CountingReport {
        alpha: q.alpha,
        eps: q.eps,
        slope: top_third_slope(&depths, &counts),
        totals: depths.iter().map(|&n| sft.word_count_exact(n)).collect(),
        depths,
        counts,
        spectrum,
        h_top: sft.topological_entropy(),
    })
}

/// One labelled assertion of a suite.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            label: label.into(),
            passed,
            detail: detail.into(),
        }
    }
}

fn summarize(mut out: impl Write, title: &str, checks: &[Check]) -> Result<()> {
    writeln!(out, "{title}")?;
    for c in checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "  [{mark}] {}: {}", c.label, c.detail)?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitComparisonReport {
    pub weights: String,
    pub classification: Classification,
    pub horizon: u64,
    /// `(name, plain, weighted)` for the convergent test sequences
    /// (bounded-ratio weights only).
    pub convergent: Vec<(String, f64, f64)>,
    /// Endpoint table of the counterexample (unbounded weights only).
    pub counterexample: Vec<Endpoint>,
    /// Index after which `|weighted| ≤ 0.05` through the last endpoint.
    pub settles_from: Option<Index>,
    pub checks: Vec<Check>,
}

impl LimitComparisonReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_summary(&self, out: impl Write) -> Result<()> {
        summarize(
            out,
            &format!("weights {} ({})", self.weights, self.classification),
            &self.checks,
        )
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        if !self.counterexample.is_empty() {
            writeln!(out, "k,endpoint,index,plain,weighted")?;
            for e in &self.counterexample {
                let which = if e.closing { "m" } else { "n" };
                writeln!(out, "{},{},{},{},{}", e.k, which, e.index, fmt12(e.plain), fmt12(e.weighted))?;
            }
        } else {
            writeln!(out, "sequence,plain,weighted")?;
            for (name, p, w) in &self.convergent {
                writeln!(out, "{name},{},{}", fmt12(*p), fmt12(*w))?;
            }
        }
        Ok(())
    }
}

/// Options for [`run_limit_comparison_suite`].
#[derive(Clone, Debug)]
pub struct LimitComparisonOptions {
    /// Length of the convergent test sequences.
    pub horizon: u64,
    /// Number of schedule entries for the counterexample.
    pub entries: usize,
    /// How many endpoints beyond the first must show plain oscillation.
    pub checkpoints: usize,
    pub seed: u64,
}

impl Default for LimitComparisonOptions {
    fn default() -> Self {
        LimitComparisonOptions {
            horizon: 1_000_000,
            entries: 6,
            checkpoints: 4,
            seed: 1,
        }
    }
}

pub fn run_limit_comparison_suite(w: &WeightSequence, opts: &LimitComparisonOptions) -> Result<LimitComparisonReport> {
    let diag = w.classify(opts.horizon.min(1_000_000))?;
    let mut report = LimitComparisonReport {
        weights: w.label(),
        classification: diag.classification.clone(),
        horizon: opts.horizon,
        convergent: vec![],
        counterexample: vec![],
        settles_from: None,
        checks: vec![],
    };
    let n = opts.horizon;
    match diag.classification {
        Classification::Bounded { .. } => {
            let alpha = 0.3;
            let mut rng = seeded_rng(opts.seed, 0);
            let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let alternating = FnSequence::new(1.0, |k| alpha + if k % 2 == 0 { 0.5 } else { -0.5 });
            let noisy = FnSequence::new(1.0, |k| alpha + noise[k as usize]);
            let tol = tail_tolerance(1.0, n);
            for (name, p, q) in [
                ("alternating", plain_average(&alternating, n)?, weighted_average(&alternating, w, n)?),
                ("iid-uniform", plain_average(&noisy, n)?, weighted_average(&noisy, w, n)?),
            ] {
                report.checks.push(Check::new(
                    format!("{name}: plain and weighted limits agree"),
                    (p - q).abs() <= tol,
                    format!("|{} - {}| vs δ = {}", fmt12(p), fmt12(q), fmt12(tol)),
                ));
                report.convergent.push((name.to_string(), p, q));
            }
            let refused = build_ubar_schedule(w, 2, Index::Exact(n), &ScheduleOptions::default()).is_err();
            report.checks.push(Check::new(
                "no counterexample schedule for bounded ratio",
                refused,
                "schedule construction refused",
            ));
        }
        _ => {
            let sched = build_ubar_schedule(w, opts.entries, Index::Log(1e5), &ScheduleOptions::default())?;
            let c = make_counterexample(&sched)?;
            let eps = c.endpoints();
            for k in 1..=sched.len() {
                let cert = sched.entry(k).certificate;
                report.checks.push(Check::new(
                    format!("entry {k} certificates ≤ 2^-{k}"),
                    cert.within(0.5f64.powi(k as i32)),
                    format!(
                        "count/sum {}, block mass {}, index ratio {}",
                        fmt12(cert.count_over_sum),
                        fmt12(cert.block_mass),
                        fmt12(cert.index_ratio)
                    ),
                ));
            }
            for e in eps.iter().filter(|e| e.closing && e.k >= 2 && e.k <= 1 + opts.checkpoints) {
                let sign = crate::averaging::block_sign(e.k);
                report.checks.push(Check::new(
                    format!("plain average at m_{} has sign {:+}", e.k, sign),
                    sign * e.plain >= 0.9,
                    format!("plain({}) = {}", e.index, fmt12(e.plain)),
                ));
            }
            let settles = c.weighted_settles(0.05);
            report.checks.push(Check::new(
                "weighted averages settle within 0.05",
                settles.is_some(),
                match settles {
                    Some((n0, sup)) => format!("sup |weighted| from N0 = {n0} is {}", fmt12(sup)),
                    None => "final endpoint exceeds 0.05".into(),
                },
            ));
            report.settles_from = settles.map(|s| s.0);
            report.counterexample = eps;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEqualityRow {
    pub alpha: f64,
    pub spectrum: Option<f64>,
    pub plain_slope: f64,
    pub weighted_slope: f64,
    pub plain_counts: Vec<u64>,
    pub weighted_counts: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEqualityReport {
    pub weights: String,
    pub rows: Vec<SpectrumEqualityRow>,
    /// Largest `|plain slope - weighted slope|` over rows with finite slopes;
    /// exploratory.
    pub max_discrepancy: f64,
    pub checks: Vec<Check>,
}

impl SpectrumEqualityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_summary(&self, out: impl Write) -> Result<()> {
        summarize(out, &format!("level sets, weights {}", self.weights), &self.checks)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "alpha,H,plain_slope,weighted_slope")?;
        for r in &self.rows {
            let h = r.spectrum.map_or("nan".to_string(), fmt12);
            writeln!(out, "{},{h},{},{}", fmt12(r.alpha), fmt12(r.plain_slope), fmt12(r.weighted_slope))?;
        }
        Ok(())
    }
}

/// Compare plain and weighted cylinder counts on an `α`-grid. Only the
/// exact statements are asserted: identical counts under constant weights
/// and vanishing counts outside the spectrum domain; slope agreement is
/// reported.
pub fn run_spectrum_equality_suite(
    sft: &Sft,
    phi: &Potential,
    w: &WeightSequence,
    alphas: &[f64],
    eps: f64,
    depths: (usize, usize),
) -> Result<SpectrumEqualityReport> {
    let (lo, hi) = PressureFunction::new(sft, phi)?.endpoints();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let constant = w.label() == WeightSequence::constant().label();
    for &alpha in alphas {
        let q = |weights| LevelSetQuery {
            alpha,
            eps,
            depth_lo: depths.0,
            depth_hi: depths.1,
            weights,
        };
        let plain = count_level_cylinders(sft, phi, &q(None))?;
        let weighted = count_level_cylinders(sft, phi, &q(Some(w.clone())))?;
        if constant {
            checks.push(Check::new(
                format!("α = {}: constant weights give identical counts", fmt12(alpha)),
                plain.counts == weighted.counts,
                format!("{:?}", weighted.counts),
            ));
        }
        if alpha + eps < lo || alpha - eps > hi {
            checks.push(Check::new(
                format!("α = {} outside [{}, {}]: no cylinders", fmt12(alpha), fmt12(lo), fmt12(hi)),
                plain.all_zero() && weighted.all_zero(),
                format!("plain {:?}, weighted {:?}", plain.counts, weighted.counts),
            ));
        }
        rows.push(SpectrumEqualityRow {
            alpha,
            spectrum: plain.spectrum,
            plain_slope: plain.slope,
            weighted_slope: weighted.slope,
            plain_counts: plain.counts,
            weighted_counts: weighted.counts,
        });
    }
    let max_discrepancy = rows
        .iter()
        .filter(|r| r.plain_slope.is_finite() && r.weighted_slope.is_finite())
        .fold(0.0f64, |m, r| m.max((r.plain_slope - r.weighted_slope).abs()));
    Ok(SpectrumEqualityReport {
        weights: w.label(),
        rows,
        max_discrepancy,
        checks,
    })
}

/// Per-checkpoint outcome for one sampled point.
#[derive(Clone, Debug, Serialize)]
pub struct PackingRow {
    pub seed: u64,
    pub k: usize,
    pub m_k: u64,
    pub weighted: f64,
    pub anchor_weighted: f64,
    pub bound: PerturbationBound,
    pub local_entropy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PackingReport {
    pub alpha: f64,
    pub h_top: f64,
    pub blocks: Vec<(u64, u64)>,
    pub rows: Vec<PackingRow>,
    pub checks: Vec<Check>,
}

impl PackingReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_summary(&self, out: impl Write) -> Result<()> {
        summarize(out, &format!("packing measure, α = {}", fmt12(self.alpha)), &self.checks)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "seed,k,m_k,weighted,anchor_weighted,bound,local_entropy")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.seed,
                r.k,
                r.m_k,
                fmt12(r.weighted),
                fmt12(r.anchor_weighted),
                fmt12(r.bound.total()),
                fmt12(r.local_entropy)
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PackingOptions {
    /// Number of schedule entries.
    pub entries: usize,
    /// Consecutive thinning copies a single anchor symbol between blocks,
    /// which keeps the local entropy at `m_k` closest to `h_top`.
    pub thinning: Thinning,
    pub seeds: u64,
    pub base_seed: u64,
    /// Local entropy must be within this fraction of `h_top` from this
    /// checkpoint on.
    pub entropy_tolerance: f64,
    pub entropy_from: usize,
}

impl Default for PackingOptions {
    fn default() -> Self {
        PackingOptions {
            entries: 6,
            thinning: Thinning::Consecutive,
            seeds: 100,
            base_seed: 0,
            entropy_tolerance: 0.05,
            entropy_from: 3,
        }
    }
}

/// Sample points of the packing measure for `anchor` and check, at every
/// `m_k`, that the weighted average stays within the perturbation bound of
/// `α` and that the exact local entropy approaches `h_top`.
pub fn run_packing_suite(
    sft: &Sft,
    phi: &Potential,
    w: &WeightSequence,
    anchor: &Anchor,
    opts: &PackingOptions,
) -> Result<PackingReport> {
    if !matches!(w.classify(1_000_000)?.classification, Classification::Unbounded) {
        return Err(Error::Precondition(format!(
            "packing suite needs unbounded asymptotic ratio; {} does not qualify",
            w.label()
        )));
    }
    anchor.validate(sft)?;
    let alpha = anchor.birkhoff_average(phi);
    let (lo, hi) = PressureFunction::new(sft, phi)?.endpoints();
    if !(alpha > lo && alpha < hi) {
        return Err(Error::Precondition(format!(
            "anchor average {alpha} must lie inside ({lo}, {hi})"
        )));
    }
    let sched_opts = ScheduleOptions {
        thinning: opts.thinning,
        ..Default::default()
    };
    let sched = build_ubar_schedule(w, opts.entries, Index::Exact(1 << 40), &sched_opts)?;
    let ps = PackingScheme::new(sft, anchor.clone(), &sched)?;
    let blocks = ps.blocks().to_vec();
    let h_top = sft.topological_entropy();
    let len = ps.covered();
    // checkpoints where the potential's windows fit inside the sampled word
    let ks: Vec<usize> = (1..=blocks.len())
        .filter(|&k| blocks[k - 1].1 + phi.depth() as u64 - 1 <= len)
        .collect();
    let cps: Vec<u64> = ks.iter().map(|&k| blocks[k - 1].1).collect();
    let anchor_word = anchor.word(len as usize);
    let anchor_trace = average_trace(&phi.orbit(&anchor_word), w, &cps)?;
    let bounds: Vec<PerturbationBound> = ks
        .iter()
        .map(|&k| perturbation_bound(&blocks, w, phi, 0.0, k))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let (mut worst_bound, mut worst_entropy) = (f64::NEG_INFINITY, 0.0f64);
    for i in 0..opts.seeds {
        let seed = opts.base_seed + i;
        let word = ps.sample(len, seed)?;
        let trace = average_trace(&phi.orbit(&word), w, &cps)?;
        let local = ps.local_entropy_trace(&word, &cps.iter().map(|&c| c as usize).collect::<Vec<_>>())?;
        for (j, &k) in ks.iter().enumerate() {
            let row = PackingRow {
                seed,
                k,
                m_k: cps[j],
                weighted: trace.rows[j].weighted,
                anchor_weighted: anchor_trace.rows[j].weighted,
                bound: bounds[j],
                local_entropy: local[j].1,
            };
            let slack = (row.weighted - alpha).abs()
                - (row.bound.total() + (row.anchor_weighted - alpha).abs());
            worst_bound = worst_bound.max(slack);
            if k >= opts.entropy_from {
                worst_entropy = worst_entropy.max((row.local_entropy - h_top).abs() / h_top);
            }
            rows.push(row);
        }
    }
    let checks = vec![
        Check::new(
            "weighted averages within the perturbation bound of α",
            worst_bound <= 1e-12,
            format!("largest excess over the bound: {}", fmt12(worst_bound)),
        ),
        Check::new(
            format!(
                "local entropy at m_k within {}% of h_top for k ≥ {}",
                opts.entropy_tolerance * 100.0,
                opts.entropy_from
            ),
            worst_entropy <= opts.entropy_tolerance,
            format!("largest relative gap: {}", fmt12(worst_entropy)),
        ),
    ];
    Ok(PackingReport {
        alpha,
        h_top,
        blocks,
        rows,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::binary_entropy;

    fn query(alpha: f64, lo: usize, hi: usize) -> LevelSetQuery {
        LevelSetQuery {
            alpha,
            eps: 0.05,
            depth_lo: lo,
            depth_hi: hi,
            weights: None,
        }
    }

    #[test]
    fn binomial_counts() {
        let s = Sft::full_shift(2);
        let phi = Potential::indicator(&s, 1).unwrap();
        let r = count_level_cylinders(&s, &phi, &query(0.5, 8, 12)).unwrap();
        // n = 10: averages within 0.05 of 1/2 means exactly 5 ones
        assert_eq!(r.counts[2], 252);
        let r = count_level_cylinders(&s, &phi, &query(1.2, 8, 12)).unwrap();
        assert!(r.all_zero());
    }

    #[test]
    fn counting_slope_near_entropy() {
        let s = Sft::full_shift(2);
        let phi = Potential::indicator(&s, 1).unwrap();
        let r = count_level_cylinders(&s, &phi, &query(0.3, 12, 18)).unwrap();
        assert!((r.slope - binary_entropy(0.3)).abs() < 0.08, "{}", r.slope);
    }

    #[test]
    fn golden_mean_above_range_is_empty() {
        let g = Sft::golden_mean();
        let phi = Potential::indicator(&g, 1).unwrap();
        let r = count_level_cylinders(&g, &phi, &query(0.6, 10, 16)).unwrap();
        assert!(r.all_zero());
    }

    #[test]
    fn constant_weights_count_like_plain() {
        let s = Sft::full_shift(2);
        let phi = Potential::indicator(&s, 1).unwrap();
        let r = run_spectrum_equality_suite(&s, &phi, &WeightSequence::constant(), &[0.3, 1.3], 0.05, (8, 12)).unwrap();
        assert!(r.passed());
        assert_eq!(r.rows[0].plain_counts, r.rows[0].weighted_counts);
    }

    #[test]
    fn packing_suite_refuses_bounded_weights() {
        let s = Sft::full_shift(2);
        let phi = Potential::indicator(&s, 1).unwrap();
        let err = run_packing_suite(&s, &phi, &WeightSequence::constant(), &Anchor::periodic(vec![0, 1]), &PackingOptions::default());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }
}
