//! Command-line front end: parses arguments, loads configs, runs one
//! operation and writes CSV/JSON to `--out` (or stdout). Human-readable
//! summaries go to stderr. Exit codes: 0 success, 1 a labelled assertion
//! failed, 2 configuration or input error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use crate::averaging::{average_trace, make_counterexample, FnSequence};
use crate::config::{load_potential, load_sft, load_weights, WeightSpec};
use crate::error::{Error, Result};
use crate::measures::{build_scheme, Anchor, CardinalityPolicy, ConcatenationScheme, PackingScheme};
use crate::numeric::{fmt12, seeded_rng};
use crate::potential::{two_symbol_example, Potential};
use crate::sft::Sft;
use crate::thermo::{interior_grid, spectrum_curve, spectrum_tower, PressureFunction};
use crate::verify::{
    count_level_cylinders, run_packing_suite, run_spectrum_equality_suite, run_limit_comparison_suite,
    LevelSetQuery, PackingOptions, LimitComparisonOptions,
};
use crate::weights::{build_ubar_schedule, Index, ScheduleOptions, Thinning, WeightSequence};

#[derive(Parser, Debug)]
#[command(name = "wbirk", version, about = "Weighted Birkhoff averages on subshifts of finite type")]
pub struct Cli {
    /// Write the CSV/JSON artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Weight sequences: ratio classification and record schedules.
    #[command(subcommand)]
    Weights(WeightsCmd),
    /// Plain and weighted averages of a test sequence.
    #[command(subcommand)]
    Avg(AvgCmd),
    /// Sequence whose weighted averages converge while plain ones oscillate.
    Counterexample(CounterexampleArgs),
    /// Shift of finite type diagnostics.
    #[command(subcommand)]
    Sft(SftCmd),
    /// Entropy spectrum of a locally constant potential.
    Spectrum(SpectrumArgs),
    /// Proof measures: build, sample, local-entropy traces.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Empirical verification suites.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Args, Debug, Clone)]
pub struct WeightArgs {
    /// Built-in weight family.
    #[arg(long, value_enum, default_value = "harmonic")]
    pub family: FamilyArg,
    /// Exponent for the power family, in (-1, 0).
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.5)]
    pub d: f64,
    /// JSON weight spec; overrides --family.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyArg {
    Constant,
    Power,
    Harmonic,
}

impl WeightArgs {
    fn build(&self) -> Result<WeightSequence> {
        if let Some(p) = &self.weights {
            return load_weights(p);
        }
        let spec = match self.family {
            FamilyArg::Constant => WeightSpec::Constant,
            FamilyArg::Harmonic => WeightSpec::Harmonic,
            FamilyArg::Power => WeightSpec::Power { d: self.d },
        };
        spec.build(None)
    }
}

#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    /// SFT spec (JSON file) or a built-in: `golden`, `full:K`.
    #[arg(long, default_value = "full:2")]
    pub sft: String,
    /// Potential spec (JSON file) or a built-in: `indicator:<symbol>`,
    /// `example` (2·[i0=1] + [i1=1]).
    #[arg(long, default_value = "indicator:1")]
    pub potential: String,
}

impl SystemArgs {
    fn build(&self) -> Result<(Sft, Potential)> {
        let sft = parse_sft(&self.sft)?;
        let phi = parse_potential(&sft, &self.potential)?;
        Ok((sft, phi))
    }
}

fn parse_sft(s: &str) -> Result<Sft> {
    if s == "golden" {
        return Ok(Sft::golden_mean());
    }
    if let Some(k) = s.strip_prefix("full:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::Config(format!("bad alphabet size in {s:?}")))?;
        if !(2..=256).contains(&k) {
            return Err(Error::Config(format!("full shift needs 2..=256 symbols, got {k}")));
        }
        return Ok(Sft::full_shift(k));
    }
    load_sft(s)
}

fn parse_potential(sft: &Sft, s: &str) -> Result<Potential> {
    if s == "example" {
        return two_symbol_example(sft);
    }
    if let Some(sym) = s.strip_prefix("indicator:") {
        let w = sft.parse_word(sym)?;
        if w.len() != 1 {
            return Err(Error::Config(format!("indicator needs one symbol, got {sym:?}")));
        }
        return Potential::indicator(sft, w[0]);
    }
    load_potential(sft, s)
}

#[derive(Subcommand, Debug)]
pub enum WeightsCmd {
    /// Ratio S_{n+1}/((n+1)s_n) at decades up to N and its classification.
    Classify {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long = "N", default_value_t = 1_000_000)]
        n: u64,
    },
    /// Record schedule (n_k, m_k) with its three certificates.
    Ubar {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value_t = 6)]
        entries: usize,
        #[arg(long, value_enum, default_value = "dyadic")]
        thinning: ThinningArg,
        /// Natural log of the largest index searched.
        #[arg(long, default_value_t = 1e5)]
        horizon_ln: f64,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ThinningArg {
    Dyadic,
    Consecutive,
    IndexRatio,
}

impl From<ThinningArg> for Thinning {
    fn from(t: ThinningArg) -> Self {
        match t {
            ThinningArg::Dyadic => Thinning::Dyadic,
            ThinningArg::Consecutive => Thinning::Consecutive,
            ThinningArg::IndexRatio => Thinning::IndexRatio,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceArg {
    /// alpha ± 1/2 alternating.
    Alternating,
    /// alpha + uniform noise in [-1/2, 1/2); needs --seed.
    Iid,
    /// The counterexample built from the weights' schedule.
    Counterexample,
}

#[derive(Subcommand, Debug)]
pub enum AvgCmd {
    /// Averages at checkpoints 1, 2, 5, 10, 20, 50, … up to N.
    Trace {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, value_enum, default_value = "alternating")]
        sequence: SequenceArg,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long = "N", default_value_t = 1_000_000)]
        n: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = 6)]
    pub entries: usize,
    #[arg(long, default_value_t = 1e5)]
    pub horizon_ln: f64,
}

#[derive(Subcommand, Debug)]
pub enum SftCmd {
    /// Entropy, primitivity exponent and word counts.
    Info {
        #[arg(long, default_value = "full:2")]
        sft: String,
        /// Word counts are listed for lengths 1..=max_len.
        #[arg(long, default_value_t = 20)]
        max_len: usize,
    },
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Interior grid points between the endpoints.
    #[arg(long, default_value_t = 99)]
    pub points: usize,
    /// Also compute the depth-n approximations for these depths.
    #[arg(long, value_delimiter = ',')]
    pub depths: Vec<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// Block concatenation mixing two families.
    Concat,
    /// Anchor copies with Parry-random dense blocks.
    Packing,
}

#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_enum, default_value = "concat")]
    pub kind: SchemeKind,
    /// Target value (concat).
    #[arg(long)]
    pub t: Option<f64>,
    /// Window; default (α⁺ − α⁻)/40 (concat).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Entropy slack; default 0.05·h_top (concat).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Block length (concat).
    #[arg(long = "N", default_value_t = 24)]
    pub block_len: usize,
    /// Fail instead of reporting when a family misses its size target.
    #[arg(long)]
    pub require_targets: bool,
    /// Anchor period as a word (packing).
    #[arg(long, default_value = "01")]
    pub anchor: String,
    /// Schedule entries (packing).
    #[arg(long, default_value_t = 5)]
    pub entries: usize,
    /// Schedule thinning (packing).
    #[arg(long, value_enum, default_value = "consecutive")]
    pub thinning: ThinningArg,
    #[command(flatten)]
    pub weights: WeightArgs,
}

enum Scheme {
    Concat(Sft, ConcatenationScheme),
    Packing(Sft, PackingScheme),
}

impl SchemeArgs {
    fn build(&self) -> Result<Scheme> {
        let (sft, phi) = self.system.build()?;
        match self.kind {
            SchemeKind::Concat => {
                let pf = PressureFunction::new(&sft, &phi)?;
                let (lo, hi) = pf.endpoints();
                let t = self.t.unwrap_or((lo + hi) / 2.0);
                let eps = self.eps.unwrap_or((hi - lo) / 40.0);
                let delta = self.delta.unwrap_or(0.05 * pf.h_top());
                let policy = if self.require_targets {
                    CardinalityPolicy::Require
                } else {
                    CardinalityPolicy::Report
                };
                let scheme = build_scheme(&sft, &phi, t, eps, delta, self.block_len, policy)?.tuned()?;
                Ok(Scheme::Concat(sft, scheme))
            }
            SchemeKind::Packing => {
                let w = self.weights.build()?;
                let opts = ScheduleOptions {
                    thinning: self.thinning.into(),
                    ..Default::default()
                };
                let sched = build_ubar_schedule(&w, self.entries, Index::Exact(1 << 40), &opts)?;
                let anchor = Anchor::periodic(sft.parse_word(&self.anchor)?.0);
                let ps = PackingScheme::new(&sft, anchor, &sched)?;
                Ok(Scheme::Packing(sft, ps))
            }
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum MeasureCmd {
    /// JSON description of the scheme.
    Build(SchemeArgs),
    /// Sampled words, one per line.
    Sample {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Word length; defaults to 4 periods (concat) or the covered range (packing).
        #[arg(long)]
        len: Option<usize>,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        seed: u64,
        /// Apply a uniform phase shift (concat).
        #[arg(long)]
        phase: bool,
    },
    /// CSV of the exact local entropy -log μ([w_0…w_{n-1}])/n of sampled words.
    Trace {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        len: Option<usize>,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Bounded ratio: equal limits. Unbounded: certified counterexample.
    Thm1 {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value_t = 1_000_000)]
        horizon: u64,
        #[arg(long, default_value_t = 6)]
        entries: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Plain versus weighted level-set cylinder counts (exploratory).
    Thm2 {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.3, 0.5, 0.7])]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 12)]
        depth_lo: usize,
        #[arg(long, default_value_t = 18)]
        depth_hi: usize,
    },
    /// Packing measure: perturbation bound and local entropy at checkpoints.
    Thm4 {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value = "01")]
        anchor: String,
        #[arg(long, default_value_t = 6)]
        entries: usize,
        #[arg(long, value_enum, default_value = "consecutive")]
        thinning: ThinningArg,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exhaustive cylinder counts for one level set.
    Levelset {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 16)]
        depth_lo: usize,
        #[arg(long, default_value_t = 24)]
        depth_hi: usize,
        /// Use weighted averages with this family instead of plain ones.
        #[arg(long)]
        weighted: bool,
        #[command(flatten)]
        weights: WeightArgs,
    },
}

/// 1, 2, 5, 10, 20, 50, … below `n`, then `n`.
pub fn decade_checkpoints(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut base = 1u64;
    'outer: loop {
        for f in [1, 2, 5] {
            let c = base.saturating_mul(f);
            if c >= n {
                break 'outer;
            }
            out.push(c);
        }
        base = base.saturating_mul(10);
    }
    if n > 0 {
        out.push(n);
    }
    out
}

/// Outcome of a successfully executed command.
pub enum Outcome {
    Ok,
    AssertionFailed,
}

fn outcome(passed: bool) -> Outcome {
    if passed {
        Outcome::Ok
    } else {
        Outcome::AssertionFailed
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn create(p: &Path) -> Result<File> {
    File::create(p).map_err(|e| Error::Config(format!("cannot create {}: {e}", p.display())))
}

fn write_json(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let mut out = open_out(&cli.out)?;
    let result = dispatch(&cli.command, &mut *out);
    out.flush()?;
    result
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Weights(WeightsCmd::Classify { weights, n }) => {
            let w = weights.build()?;
            let diag = w.classify(*n)?;
            let view = w.view(diag.horizon)?;
            writeln!(out, "n,S_n,ratio")?;
            for c in decade_checkpoints(diag.horizon) {
                writeln!(out, "{c},{},{}", fmt12(view.sum(c)?), fmt12(view.ratio(c)?))?;
            }
            eprintln!(
                "{}: {} (sup ratio {} at n = {})",
                w.label(),
                diag.classification,
                fmt12(diag.empirical_sup),
                diag.argsup
            );
            Ok(Outcome::Ok)
        }
        Command::Weights(WeightsCmd::Ubar { weights, entries, thinning, horizon_ln }) => {
            let w = weights.build()?;
            let opts = ScheduleOptions {
                thinning: (*thinning).into(),
                ..Default::default()
            };
            let sched = build_ubar_schedule(&w, *entries, Index::from_ln(*horizon_ln), &opts)?;
            writeln!(out, "k,n,m,growth,S_n,S_m,count_over_sum,block_mass,index_ratio")?;
            for (i, e) in sched.entries.iter().enumerate() {
                let c = e.certificate;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    i + 1,
                    e.n,
                    e.m,
                    fmt12(e.growth),
                    fmt12(e.sum_n),
                    fmt12(e.sum_m),
                    fmt12(c.count_over_sum),
                    fmt12(c.block_mass),
                    fmt12(c.index_ratio)
                )?;
            }
            eprintln!("{} entries, certified: {}", sched.len(), sched.is_certified());
            Ok(Outcome::Ok)
        }
        Command::Avg(AvgCmd::Trace { weights, sequence, alpha, n, seed }) => {
            let w = weights.build()?;
            let cps = decade_checkpoints(*n);
            let trace = match sequence {
                SequenceArg::Alternating => {
                    let a = *alpha;
                    average_trace(&FnSequence::new(a.abs() + 0.5, move |k| a + if k % 2 == 0 { 0.5 } else { -0.5 }), &w, &cps)?
                }
                SequenceArg::Iid => {
                    let seed = seed.ok_or_else(|| Error::Config("--seed is required for sampled sequences".into()))?;
                    let mut rng = seeded_rng(seed, 0);
                    let noise: Vec<f64> = (0..*n).map(|_| rng.gen_range(-0.5..0.5)).collect();
                    let a = *alpha;
                    average_trace(&FnSequence::new(a.abs() + 0.5, |k| a + noise[k as usize]), &w, &cps)?
                }
                SequenceArg::Counterexample => {
                    let sched = build_ubar_schedule(&w, 4, Index::Log(1e5), &ScheduleOptions::default())?;
                    average_trace(&make_counterexample(&sched)?, &w, &cps)?
                }
            };
            trace.write_csv(&mut *out)?;
            Ok(Outcome::Ok)
        }
        Command::Counterexample(CounterexampleArgs { weights, entries, horizon_ln }) => {
            let w = weights.build()?;
            let sched = build_ubar_schedule(&w, *entries, Index::from_ln(*horizon_ln), &ScheduleOptions::default())?;
            let c = make_counterexample(&sched)?;
            writeln!(out, "k,endpoint,index,plain,weighted,weighted_bound")?;
            for e in c.endpoints() {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    e.k,
                    if e.closing { "m" } else { "n" },
                    e.index,
                    fmt12(e.plain),
                    fmt12(e.weighted),
                    fmt12(c.weighted_bound(e.k))
                )?;
            }
            match c.weighted_settles(0.05) {
                Some((n0, sup)) => eprintln!("weighted averages stay within {} from N0 = {n0}", fmt12(sup)),
                None => eprintln!("weighted averages have not settled within 0.05"),
            }
            Ok(Outcome::Ok)
        }
        Command::Sft(SftCmd::Info { sft, max_len }) => {
            let s = parse_sft(sft)?;
            writeln!(out, "alphabet {}", s.labels().join(","))?;
            writeln!(out, "r {}", s.aperiodicity_exponent())?;
            writeln!(out, "connector_len {}", s.connector_len())?;
            writeln!(out, "lambda {}", fmt12(s.perron_root()))?;
            writeln!(out, "h_top {}", fmt12(s.topological_entropy()))?;
            for n in 1..=*max_len {
                writeln!(out, "words {n} {}", s.word_count_exact(n))?;
            }
            Ok(Outcome::Ok)
        }
        Command::Spectrum(SpectrumArgs { system, points, depths }) => {
            let (sft, phi) = system.build()?;
            let (lo, hi) = PressureFunction::new(&sft, &phi)?.endpoints();
            let grid = interior_grid(lo, hi, *points);
            if depths.is_empty() {
                let curve = spectrum_curve(&sft, &phi, &grid)?;
                curve.write_csv(&mut *out)?;
                eprintln!(
                    "[α⁻, α⁺] = [{}, {}], argmax {}, h_top {}, concave {}",
                    fmt12(curve.alpha_minus),
                    fmt12(curve.alpha_plus),
                    fmt12(curve.argmax),
                    fmt12(curve.h_top),
                    curve.concave
                );
                Ok(Outcome::Ok)
            } else {
                // compare on the domain shared by every depth-n approximation
                let (mut lo, mut hi) = (lo, hi);
                for &n in depths {
                    let (a, b) = PressureFunction::new(&sft, &phi.discretize(&sft, n)?)?.endpoints();
                    lo = lo.max(a);
                    hi = hi.min(b);
                }
                let grid = interior_grid(lo, hi, *points);
                let tower = spectrum_tower(&sft, &phi, depths, &grid)?;
                tower.write_csv(&mut *out)?;
                let holds = tower.bounds_hold();
                for ((n, gap), ok) in depths.iter().zip(tower.max_gaps()).zip(&holds) {
                    eprintln!("depth {n}: max |H - H_n| = {}, bound holds: {ok}", fmt12(gap));
                }
                Ok(outcome(holds.iter().all(|&b| b)))
            }
        }
        Command::Measure(MeasureCmd::Build(args)) => {
            match args.build()? {
                Scheme::Concat(sft, scheme) => write_json(out, &scheme.dump(&sft))?,
                Scheme::Packing(_, ps) => write_json(
                    out,
                    &serde_json::json!({
                        "anchor": ps.anchor(),
                        "blocks": ps.blocks(),
                        "covered": ps.covered(),
                    }),
                )?,
            }
            Ok(Outcome::Ok)
        }
        Command::Measure(MeasureCmd::Sample { scheme, len, count, seed, phase }) => {
            let built = scheme.build()?;
            for i in 0..*count {
                let s = seed.wrapping_add(i);
                let (sft, word) = sample_scheme(&built, *len, s, *phase)?;
                writeln!(out, "{}", sft.format_word(&word))?;
            }
            Ok(Outcome::Ok)
        }
        Command::Measure(MeasureCmd::Trace { scheme, len, count, seed }) => {
            let built = scheme.build()?;
            writeln!(out, "seed,n,local_entropy")?;
            for i in 0..*count {
                let s = seed.wrapping_add(i);
                let (_, word) = sample_scheme(&built, *len, s, false)?;
                let trace = match &built {
                    Scheme::Concat(_, c) => {
                        let cps: Vec<usize> = (1..=word.len() / c.period()).map(|j| j * c.period()).collect();
                        c.local_entropy_trace(&word, &cps)?
                    }
                    Scheme::Packing(_, p) => {
                        let cps: Vec<usize> = p
                            .blocks()
                            .iter()
                            .map(|b| b.1 as usize)
                            .filter(|&m| m >= 1 && m <= word.len())
                            .collect();
                        p.local_entropy_trace(&word, &cps)?
                    }
                };
                for (n, h) in trace {
                    writeln!(out, "{s},{n},{}", fmt12(h))?;
                }
            }
            Ok(Outcome::Ok)
        }
        Command::Verify(VerifyCmd::Thm1 { weights, horizon, entries, seed }) => {
            let w = weights.build()?;
            let opts = LimitComparisonOptions {
                horizon: *horizon,
                entries: *entries,
                seed: *seed,
                ..Default::default()
            };
            let report = run_limit_comparison_suite(&w, &opts)?;
            report.write_csv(&mut *out)?;
            report.write_summary(io::stderr())?;
            Ok(outcome(report.passed()))
        }
        Command::Verify(VerifyCmd::Thm2 { system, weights, alphas, eps, depth_lo, depth_hi }) => {
            let (sft, phi) = system.build()?;
            let w = weights.build()?;
            let report = run_spectrum_equality_suite(&sft, &phi, &w, alphas, *eps, (*depth_lo, *depth_hi))?;
            report.write_csv(&mut *out)?;
            report.write_summary(io::stderr())?;
            eprintln!(
                "max slope discrepancy (exploratory, finite-depth proxy): {}",
                fmt12(report.max_discrepancy)
            );
            Ok(outcome(report.passed()))
        }
        Command::Verify(VerifyCmd::Thm4 { system, weights, anchor, entries, thinning, seeds, seed }) => {
            let (sft, phi) = system.build()?;
            let w = weights.build()?;
            let anchor = Anchor::periodic(sft.parse_word(anchor)?.0);
            let opts = PackingOptions {
                entries: *entries,
                thinning: (*thinning).into(),
                seeds: *seeds,
                base_seed: *seed,
                ..Default::default()
            };
            let report = run_packing_suite(&sft, &phi, &w, &anchor, &opts)?;
            report.write_csv(&mut *out)?;
            report.write_summary(io::stderr())?;
            Ok(outcome(report.passed()))
        }
        Command::Verify(VerifyCmd::Levelset { system, alpha, eps, depth_lo, depth_hi, weighted, weights }) => {
            let (sft, phi) = system.build()?;
            let q = LevelSetQuery {
                alpha: *alpha,
                eps: *eps,
                depth_lo: *depth_lo,
                depth_hi: *depth_hi,
                weights: if *weighted { Some(weights.build()?) } else { None },
            };
            let report = count_level_cylinders(&sft, &phi, &q)?;
            report.write_csv(&mut *out)?;
            let target = report.spectrum.map_or("outside domain".to_string(), fmt12);
            eprintln!("slope {} vs H(α) {target}, h_top {}", fmt12(report.slope), fmt12(report.h_top));
            Ok(Outcome::Ok)
        }
    }
}

fn sample_scheme(scheme: &Scheme, len: Option<usize>, seed: u64, phase: bool) -> Result<(&Sft, crate::sft::Word)> {
    match scheme {
        Scheme::Concat(sft, c) => {
            let n = len.unwrap_or(4 * c.period());
            Ok((sft, c.sample_with_phase(n, seed, phase)))
        }
        Scheme::Packing(sft, p) => {
            let n = len.map_or(p.covered(), |l| l as u64);
            Ok((sft, p.sample(n, seed)?))
        }
    }
}

/// Parse `args`, run, and map the outcome to an exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::AssertionFailed) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoints_by_decade() {
        assert_eq!(decade_checkpoints(100), vec![1, 2, 5, 10, 20, 50, 100]);
        assert_eq!(decade_checkpoints(3), vec![1, 2, 3]);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn bad_config_exits_2() {
        assert_eq!(run(["wbirk", "sft", "info", "--sft", "/nonexistent.json"]), 2);
        assert_eq!(run(["wbirk", "weights", "ubar", "--family", "constant"]), 2);
    }
}
