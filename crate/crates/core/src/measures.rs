//! The two measures behind the lower bounds: block-i.i.d. concatenations of
//! two word families mixed with probability `p` (whose Birkhoff integral is
//! tuned to a target), and the packing measure that copies an anchor point
//! on sparse blocks and is Parry-random on the dense blocks of a schedule.
//! Both come with deterministic samplers and exact cylinder-mass accounting.

use rand::Rng;
use serde::Serialize;

use crate::averaging::weighted_average;
use crate::error::{Error, Result};
use crate::numeric::seeded_rng;
use crate::potential::Potential;
use crate::sft::{ConnectorTable, ParryMeasure, Sft, Word};
use crate::thermo::PressureFunction;
use crate::weights::{UbarSchedule, WeightSequence};

/// Stream ids used with [`seeded_rng`]; the sample index goes in the low
/// 32 bits.
pub const STREAM_PARRY: u64 = 0;
pub const STREAM_CONCATENATION: u64 = 1 << 32;
pub const STREAM_PACKING: u64 = 2 << 32;

/// Whether `build_scheme` insists on the family-size targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CardinalityPolicy {
    /// Fail with a cardinality-shortfall error when a family is too small.
    Require,
    /// Build anyway and report the shortfall in the scheme.
    Report,
}

/// Block length `N`, the two families of admissible `N`-words whose
/// Birkhoff averages sit near `t + 2ε` (X) and `t - 2ε` (Y), and the mixing
/// probability.
#[derive(Clone, Debug, Serialize)]
pub struct ConcatenationScheme {
    pub block_len: usize,
    pub connector_len: usize,
    pub t: f64,
    pub eps: f64,
    pub delta: f64,
    pub p: f64,
    /// `H(t + 2ε)` and `H(t - 2ε)`.
    pub h_plus: f64,
    pub h_minus: f64,
    /// `ln |X|`, `ln |Y|` and the targets `N(H(t ± 2ε) - δ)`.
    pub log_x: f64,
    pub log_y: f64,
    pub target_x: f64,
    pub target_y: f64,
    #[serde(skip)]
    alphabet: usize,
    #[serde(skip)]
    x: Vec<u64>,
    #[serde(skip)]
    y: Vec<u64>,
    #[serde(skip)]
    connectors: ConnectorTable,
    /// Expected Birkhoff sum over one period `w · connector`, when the
    /// current and next blocks come from the indicated families:
    /// `[XX, XY, YX, YY]`.
    #[serde(skip)]
    period_sums: [f64; 4],
}

fn word_code(k: usize, w: &[u8]) -> u64 {
    w.iter().fold(0u64, |c, &s| c * k as u64 + s as u64)
}

fn word_decode(k: usize, n: usize, mut c: u64, out: &mut Vec<u8>) {
    let start = out.len();
    out.resize(start + n, 0);
    for slot in out[start..].iter_mut().rev() {
        *slot = (c % k as u64) as u8;
        c /= k as u64;
    }
}

/// Number of sorted codes of `N`-words starting with `prefix`.
fn count_prefix(codes: &[u64], k: usize, n: usize, prefix: &[u8]) -> usize {
    let scale = (k as u64).pow((n - prefix.len()) as u32);
    let base = word_code(k, prefix);
    let lo = codes.partition_point(|&c| c < base * scale);
    let hi = codes.partition_point(|&c| c < (base + 1) * scale);
    hi - lo
}

pub fn build_scheme(
    sft: &Sft,
    phi: &Potential,
    t: f64,
    eps: f64,
    delta: f64,
    block_len: usize,
    policy: CardinalityPolicy,
) -> Result<ConcatenationScheme> {
    let pf = PressureFunction::new(sft, phi)?;
    let (lo, hi) = pf.endpoints();
    if !(eps > 0.0 && t - 3.0 * eps > lo && t + 3.0 * eps < hi) {
        return Err(Error::Precondition(format!(
            "t ± 3ε = [{}, {}] must lie inside ({lo}, {hi})",
            t - 3.0 * eps,
            t + 3.0 * eps
        )));
    }
    let k = sft.alphabet_size();
    let m = phi.depth();
    if block_len < m {
        return Err(Error::Precondition(format!(
            "block length {block_len} is shorter than the potential depth {m}"
        )));
    }
    if (k as u64).checked_pow(block_len as u32).is_none() {
        return Err(Error::Precondition(format!(
            "{k}^{block_len} words do not fit 64-bit codes"
        )));
    }
    let windows = phi.windows(block_len) as f64;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut sums = vec![0.0f64; block_len + 1];
    sft.walk_words(block_len, |w| {
        let l = w.len();
        sums[l] = sums[l - 1] + if l >= m { phi.value(&w[l - m..]) } else { 0.0 };
        if l == block_len {
            let avg = sums[l] / windows;
            if (avg - t - 2.0 * eps).abs() < eps {
                x.push(word_code(k, w));
            } else if (avg - t + 2.0 * eps).abs() < eps {
                y.push(word_code(k, w));
            }
        }
        true
    })?;
    let h_plus = pf.spectrum_point(t + 2.0 * eps)?;
    let h_minus = pf.spectrum_point(t - 2.0 * eps)?;
    let n = block_len as f64;
    let (log_x, log_y) = ((x.len() as f64).ln(), (y.len() as f64).ln());
    let (target_x, target_y) = (n * (h_plus - delta), n * (h_minus - delta));
    for (family, len, log, target) in [("X", x.len(), log_x, target_x), ("Y", y.len(), log_y, target_y)] {
        if len == 0 || (policy == CardinalityPolicy::Require && log < target) {
            return Err(Error::CardinalityShortfall {
                family,
                achieved: log,
                target,
            });
        }
    }
    let mut scheme = ConcatenationScheme {
        block_len,
        connector_len: sft.connector_len(),
        t,
        eps,
        delta,
        p: 0.5,
        h_plus,
        h_minus,
        log_x,
        log_y,
        target_x,
        target_y,
        alphabet: k,
        x,
        y,
        connectors: sft.connectors(),
        period_sums: [0.0; 4],
    };
    scheme.period_sums = scheme.compute_period_sums(phi);
    Ok(scheme)
}

impl ConcatenationScheme {
    pub fn family_sizes(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    pub fn meets_targets(&self) -> bool {
        self.log_x >= self.target_x && self.log_y >= self.target_y
    }

    /// Symbols per block including its trailing connector.
    pub fn period(&self) -> usize {
        self.block_len + self.connector_len
    }

    pub fn family_words(&self, family: Family) -> impl Iterator<Item = Word> + '_ {
        let codes = match family {
            Family::X => &self.x,
            Family::Y => &self.y,
        };
        codes.iter().map(|&c| {
            let mut w = Vec::with_capacity(self.block_len);
            word_decode(self.alphabet, self.block_len, c, &mut w);
            Word(w)
        })
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Precondition(format!("p = {p} outside [0, 1]")));
        }
        self.p = p;
        Ok(self)
    }

    fn compute_period_sums(&self, phi: &Potential) -> [f64; 4] {
        let k = self.alphabet;
        let n = self.block_len;
        let m = phi.depth();
        let l = m.saturating_sub(1).max(1);
        let kl = k.pow(l as u32);
        // mean inner sum and histograms of length-l prefixes/suffixes
        let stats = |codes: &[u64]| {
            let mut inner = 0.0;
            let mut pre = vec![0.0f64; kl];
            let mut suf = vec![0.0f64; kl];
            let mut w = Vec::with_capacity(n);
            for &c in codes {
                w.clear();
                word_decode(k, n, c, &mut w);
                inner += phi.window_sum(&w);
                pre[word_code(k, &w[..l]) as usize] += 1.0;
                suf[word_code(k, &w[n - l..]) as usize] += 1.0;
            }
            let size = codes.len() as f64;
            pre.iter_mut().chain(suf.iter_mut()).for_each(|v| *v /= size);
            (inner / size, pre, suf)
        };
        let (sx, sy) = (stats(&self.x), stats(&self.y));
        // sum of the windows starting in the tail of one block and its
        // connector, given the block's last l symbols and the next block's
        // first l symbols
        let boundary = |s: &[u8], p: &[u8]| -> f64 {
            let mut str = s.to_vec();
            str.extend_from_slice(self.connectors.get(s[l - 1], p[0]));
            str.extend_from_slice(p);
            let first = l + 1 - m;
            (first..l + self.connector_len).map(|i| phi.value(&str[i..i + m])).sum()
        };
        let mut table = vec![vec![0.0f64; kl]; kl];
        let (mut s, mut p) = (Vec::new(), Vec::new());
        for (a, row) in table.iter_mut().enumerate() {
            s.clear();
            word_decode(k, l, a as u64, &mut s);
            for (b, cell) in row.iter_mut().enumerate() {
                p.clear();
                word_decode(k, l, b as u64, &mut p);
                if sx.2[a] + sy.2[a] > 0.0 && sx.1[b] + sy.1[b] > 0.0 {
                    *cell = boundary(&s, &p);
                }
            }
        }
        let pair = |cur: &(f64, Vec<f64>, Vec<f64>), next: &(f64, Vec<f64>, Vec<f64>)| {
            let mut b = 0.0;
            for (a, row) in table.iter().enumerate() {
                if cur.2[a] == 0.0 {
                    continue;
                }
                for (c, v) in row.iter().enumerate() {
                    b += cur.2[a] * next.1[c] * v;
                }
            }
            cur.0 + b
        };
        [pair(&sx, &sx), pair(&sx, &sy), pair(&sy, &sx), pair(&sy, &sy)]
    }

    /// `∫φ dμ^p` for the shift-averaged block-i.i.d. measure: the expected
    /// Birkhoff sum over one period divided by the period.
    pub fn integral(&self, p: f64) -> f64 {
        let [xx, xy, yx, yy] = self.period_sums;
        (p * p * xx + p * (1.0 - p) * (xy + yx) + (1.0 - p) * (1.0 - p) * yy) / self.period() as f64
    }

    /// Solve `∫φ dμ^p = t` by bisection, to `10^{-9}` or better.
    pub fn tune_p(&self, t: f64) -> Result<f64> {
        let (f0, f1) = (self.integral(0.0), self.integral(1.0));
        if !((f0 - t) * (f1 - t) <= 0.0) {
            return Err(Error::PBracket {
                t,
                at_zero: f0,
                at_one: f1,
            });
        }
        let increasing = f1 >= f0;
        let (mut a, mut b) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if (self.integral(mid) < t) == increasing {
                a = mid;
            } else {
                b = mid;
            }
        }
        let p = if (self.integral(a) - t).abs() <= (self.integral(b) - t).abs() { a } else { b };
        Ok(p)
    }

    /// Tune `p` to the scheme's own target `t` and store it.
    pub fn tuned(self) -> Result<Self> {
        let p = self.tune_p(self.t)?;
        self.with_p(p)
    }

    /// `(p²(XX+YY-XY-YX), p(XY+YX-2YY), YY) / period`: coefficients of the
    /// integral as a polynomial in `p`.
    pub fn integral_coefficients(&self) -> (f64, f64, f64) {
        let [xx, xy, yx, yy] = self.period_sums;
        let per = self.period() as f64;
        ((xx + yy - xy - yx) / per, (xy + yx - 2.0 * yy) / per, yy / per)
    }

    /// Entropy of one block choice: `-p ln(p/|X|) - (1-p) ln((1-p)/|Y|)`.
    pub fn block_entropy(&self) -> f64 {
        let term = |q: f64, size: usize| if q > 0.0 { -q * (q / size as f64).ln() } else { 0.0 };
        term(self.p, self.x.len()) + term(1.0 - self.p, self.y.len())
    }

    /// Entropy of the measure per symbol.
    pub fn entropy_rate(&self) -> f64 {
        self.block_entropy() / self.period() as f64
    }

    /// `(1 - (r-1)/N)·min(H(t-2ε), H(t+2ε)) - δ`.
    pub fn entropy_lower_bound(&self) -> f64 {
        (1.0 - self.connector_len as f64 / self.block_len as f64) * self.h_minus.min(self.h_plus)
            - self.delta
    }

    fn choose(&self, rng: &mut impl Rng, out: &mut Vec<u8>) {
        let codes = if rng.gen::<f64>() < self.p { &self.x } else { &self.y };
        let c = codes[rng.gen_range(0..codes.len())];
        word_decode(self.alphabet, self.block_len, c, out);
    }

    /// First `n` symbols of a concatenation of i.i.d. block choices.
    pub fn sample(&self, n: usize, seed: u64) -> Word {
        self.sample_with_phase(n, seed, false)
    }

    /// As [`sample`](Self::sample), optionally dropping a uniform random
    /// number of leading symbols in `[0, period)`, which realises the
    /// shift-averaged measure.
    pub fn sample_with_phase(&self, n: usize, seed: u64, phase: bool) -> Word {
        let mut rng = seeded_rng(seed, STREAM_CONCATENATION);
        let skip = if phase { rng.gen_range(0..self.period()) } else { 0 };
        let mut out = Vec::with_capacity(n + skip + self.period());
        let mut block = Vec::with_capacity(self.block_len);
        while out.len() < n + skip {
            block.clear();
            self.choose(&mut rng, &mut block);
            if let Some(&last) = out.last() {
                out.extend_from_slice(self.connectors.get(last, block[0]));
            }
            out.extend_from_slice(&block);
        }
        out.drain(..skip);
        out.truncate(n);
        Word(out)
    }

    fn family_weight(&self, prefix: &[u8]) -> f64 {
        let mut total = 0.0;
        if self.p > 0.0 {
            total += self.p * count_prefix(&self.x, self.alphabet, self.block_len, prefix) as f64
                / self.x.len() as f64;
        }
        if self.p < 1.0 {
            total += (1.0 - self.p)
                * count_prefix(&self.y, self.alphabet, self.block_len, prefix) as f64
                / self.y.len() as f64;
        }
        total
    }

    /// `log μ([w])` for the unshifted block-i.i.d. law.
    pub fn log_mass(&self, w: &[u8]) -> f64 {
        let (n, c, per) = (self.block_len, self.connector_len, self.period());
        let mut log = 0.0;
        let mut prev: Option<u8> = None;
        let mut start = 0;
        while start < w.len() {
            let seg_len = if prev.is_some() { per } else { n };
            let seg = &w[start..w.len().min(start + seg_len)];
            let factor = match prev {
                None => self.family_weight(seg),
                Some(a) => {
                    let mut f = 0.0;
                    for b in 0..self.alphabet as u8 {
                        let conn = self.connectors.get(a, b);
                        let j = seg.len().min(c);
                        if seg[..j] != conn[..j] {
                            continue;
                        }
                        if seg.len() > c {
                            if seg[c] == b {
                                f += self.family_weight(&seg[c..]);
                            }
                        } else {
                            f += self.family_weight(&[b]);
                        }
                    }
                    f
                }
            };
            if factor <= 0.0 {
                return f64::NEG_INFINITY;
            }
            log += factor.ln();
            prev = seg.last().copied();
            start += seg_len;
        }
        log
    }

    /// `-(1/n) log μ([w|_n])` at each checkpoint.
    pub fn local_entropy_trace(&self, w: &Word, checkpoints: &[usize]) -> Result<Vec<(usize, f64)>> {
        local_trace(w, checkpoints, |prefix| self.log_mass(prefix))
    }
}

/// Serializable view of a scheme with its families spelled out.
#[derive(Clone, Debug, Serialize)]
pub struct SchemeDump<'a> {
    #[serde(flatten)]
    pub scheme: &'a ConcatenationScheme,
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub entropy_rate: f64,
    pub entropy_lower_bound: f64,
    pub integral: f64,
}

impl ConcatenationScheme {
    pub fn dump<'a>(&'a self, sft: &Sft) -> SchemeDump<'a> {
        SchemeDump {
            scheme: self,
            x: self.family_words(Family::X).map(|w| sft.format_word(&w)).collect(),
            y: self.family_words(Family::Y).map(|w| sft.format_word(&w)).collect(),
            entropy_rate: self.entropy_rate(),
            entropy_lower_bound: self.entropy_lower_bound(),
            integral: self.integral(self.p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    X,
    Y,
}

fn local_trace(
    w: &Word,
    checkpoints: &[usize],
    log_mass: impl Fn(&[u8]) -> f64,
) -> Result<Vec<(usize, f64)>> {
    checkpoints
        .iter()
        .map(|&n| {
            if n == 0 || n > w.len() {
                return Err(Error::OutOfRange {
                    position: n,
                    depth: 0,
                    len: w.len(),
                });
            }
            let l = log_mass(&w[..n]);
            if l == f64::NEG_INFINITY {
                return Err(Error::ZeroMass(format!("prefix of length {n}")));
            }
            Ok((n, -l / n as f64))
        })
        .collect()
}

/// An eventually periodic point `prefix · period^∞`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Anchor {
    pub prefix: Vec<u8>,
    pub period: Vec<u8>,
}

impl Anchor {
    pub fn periodic(period: Vec<u8>) -> Self {
        Anchor {
            prefix: vec![],
            period,
        }
    }

    pub fn validate(&self, sft: &Sft) -> Result<()> {
        if self.period.is_empty() {
            return Err(Error::Precondition("anchor period must be nonempty".into()));
        }
        let mut w = self.prefix.clone();
        w.extend_from_slice(&self.period);
        w.push(self.period[0]);
        sft.validate(&w)
    }

    #[inline]
    pub fn symbol(&self, i: u64) -> u8 {
        let p = self.prefix.len() as u64;
        if i < p {
            self.prefix[i as usize]
        } else {
            self.period[((i - p) % self.period.len() as u64) as usize]
        }
    }

    pub fn word(&self, n: usize) -> Word {
        Word((0..n as u64).map(|i| self.symbol(i)).collect())
    }

    /// Exact Birkhoff average of `φ` along the anchor: the cyclic average over
    /// one period.
    pub fn birkhoff_average(&self, phi: &Potential) -> f64 {
        let m = phi.depth();
        let len = self.period.len();
        let mut cyc = self.period.clone();
        for i in 0..m.saturating_sub(1) {
            cyc.push(self.period[i % len]);
        }
        phi.window_sum(&cyc) / len as f64
    }
}

/// Copy the anchor on `[m_{ℓ-1}, n_ℓ)`, and on each `[n_ℓ, m_ℓ)` place a
/// uniformly chosen left join of length `r - 1`, a Parry-distributed middle
/// block and a uniformly chosen right join back into the anchor.
#[derive(Clone, Debug)]
pub struct PackingScheme {
    sft: Sft,
    anchor: Anchor,
    blocks: Vec<(u64, u64)>,
    parry: ParryMeasure,
    join_len: usize,
}

/// Where a position falls in the packing layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Region {
    Copy,
    /// Free block `[n, m)` with its middle `[mid_start, mid_end)`.
    Free { n: u64, m: u64, mid_start: u64, mid_end: u64 },
}

impl PackingScheme {
    pub fn new(sft: &Sft, anchor: Anchor, schedule: &UbarSchedule) -> Result<Self> {
        let blocks = schedule
            .entries
            .iter()
            .map(|e| match (e.n.exact(), e.m.exact()) {
                (Some(n), Some(m)) => Ok((n, m)),
                _ => Err(Error::Precondition(format!(
                    "packing needs exactly indexed schedule entries, got ({}, {})",
                    e.n, e.m
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(sft, anchor, blocks)
    }

    pub fn from_blocks(sft: &Sft, anchor: Anchor, blocks: Vec<(u64, u64)>) -> Result<Self> {
        anchor.validate(sft)?;
        for (i, &(n, m)) in blocks.iter().enumerate() {
            if n > m {
                return Err(Error::Precondition(format!("block {} has n > m", i + 1)));
            }
            if i > 0 && n <= blocks[i - 1].1 {
                return Err(Error::Precondition(format!(
                    "block {} must start after the previous block ends",
                    i + 1
                )));
            }
        }
        Ok(PackingScheme {
            parry: sft.parry(),
            join_len: sft.connector_len(),
            sft: sft.clone(),
            anchor,
            blocks,
        })
    }

    pub fn anchor(&self) -> &Anchor {
        &self.anchor
    }

    pub fn blocks(&self) -> &[(u64, u64)] {
        &self.blocks
    }

    /// Number of symbols determined by the schedule.
    pub fn covered(&self) -> u64 {
        self.blocks.last().map_or(0, |b| b.1)
    }

    fn layout(&self, n: u64, m: u64) -> Region {
        let c = self.join_len as u64;
        let mid_start = if n == 0 { 0 } else { n + c };
        let mid_end = m.saturating_sub(c);
        if mid_end > mid_start {
            Region::Free { n, m, mid_start, mid_end }
        } else {
            Region::Copy
        }
    }

    fn regions(&self) -> impl Iterator<Item = Region> + '_ {
        self.blocks.iter().map(|&(n, m)| self.layout(n, m))
    }

    pub fn sample(&self, len: u64, seed: u64) -> Result<Word> {
        if len > self.covered() {
            return Err(Error::ScheduleTooShort {
                covered: self.covered(),
                requested: len,
            });
        }
        let mut rng = seeded_rng(seed, STREAM_PACKING);
        let mut out: Vec<u8> = Vec::with_capacity(len as usize);
        let mut pos = 0u64;
        let mut mid = Vec::new();
        for region in self.regions() {
            if pos >= len {
                break;
            }
            let Region::Free { n, m, mid_start, mid_end } = region else { continue };
            while pos < n.min(len) {
                out.push(self.anchor.symbol(pos));
                pos += 1;
            }
            mid.clear();
            self.parry.sample_into((mid_end - mid_start) as usize, &mut rng, &mut mid);
            if n > 0 {
                let joins = self.sft.joins(self.anchor.symbol(n - 1), mid[0], self.join_len);
                out.extend_from_slice(&joins[rng.gen_range(0..joins.len())]);
            }
            out.extend_from_slice(&mid);
            let joins = self.sft.joins(*mid.last().unwrap(), self.anchor.symbol(m), self.join_len);
            out.extend_from_slice(&joins[rng.gen_range(0..joins.len())]);
            pos = m;
        }
        while pos < len {
            out.push(self.anchor.symbol(pos));
            pos += 1;
        }
        out.truncate(len as usize);
        debug_assert!(self.sft.is_admissible(&out));
        Ok(Word(out))
    }

    /// `log μ([w])` under the packing law.
    pub fn log_mass(&self, w: &[u8]) -> f64 {
        let len = w.len() as u64;
        let c = self.join_len;
        let mut log = 0.0;
        let mut pos = 0u64;
        let mut regions = self.regions().peekable();
        while pos < len {
            let next_free = loop {
                match regions.peek() {
                    Some(Region::Copy) => {
                        regions.next();
                    }
                    Some(&r) => break Some(r),
                    None => break None,
                }
            };
            let copy_end = match next_free {
                Some(Region::Free { n, .. }) => n.min(len),
                _ => len,
            };
            while pos < copy_end {
                if w[pos as usize] != self.anchor.symbol(pos) {
                    return f64::NEG_INFINITY;
                }
                pos += 1;
            }
            let Some(Region::Free { n, m, mid_start, mid_end }) = next_free else { break };
            regions.next();
            if pos >= len {
                break;
            }
            let seg = &w[n as usize..(m.min(len)) as usize];
            let left = (mid_start - n) as usize;
            let mid_len = (mid_end - mid_start) as usize;
            let before = if n > 0 { Some(self.anchor.symbol(n - 1)) } else { None };
            let after = self.anchor.symbol(m);
            let f = self.free_block_log_mass(seg, before, after, left, mid_len, c);
            if f == f64::NEG_INFINITY {
                return f;
            }
            log += f;
            pos = m.min(len);
        }
        log
    }

    /// Log of the marginal mass of a (possibly partial) free block.
    fn free_block_log_mass(
        &self,
        seg: &[u8],
        before: Option<u8>,
        after: u8,
        left: usize,
        mid_len: usize,
        c: usize,
    ) -> f64 {
        let joins_from = |a: u8, b: u8| self.sft.joins(a, b, c);
        let fraction = |joins: &[Vec<u8>], prefix: &[u8]| {
            joins.iter().filter(|j| j.starts_with(prefix)).count() as f64 / joins.len() as f64
        };
        if seg.len() <= left {
            // inside the left join: average over the middle's first symbol
            let a = before.expect("left join only after position 0");
            let total: f64 = (0..self.sft.alphabet_size() as u8)
                .map(|b| self.parry.stationary[b as usize] * fraction(&joins_from(a, b), seg))
                .sum();
            return if total > 0.0 { total.ln() } else { f64::NEG_INFINITY };
        }
        let mid_end = (left + mid_len).min(seg.len());
        let mid = &seg[left..mid_end];
        if !self.sft.is_admissible(mid) {
            return f64::NEG_INFINITY;
        }
        let mut log = self.parry.log_mass(mid);
        if let Some(a) = before {
            let joins = joins_from(a, mid[0]);
            if !joins.iter().any(|j| j[..] == seg[..left]) {
                return f64::NEG_INFINITY;
            }
            log -= (joins.len() as f64).ln();
        }
        if seg.len() > left + mid_len {
            let right = &seg[left + mid_len..];
            let joins = joins_from(mid[mid.len() - 1], after);
            let f = fraction(&joins, right);
            if f == 0.0 {
                return f64::NEG_INFINITY;
            }
            log += f.ln();
        }
        log
    }

    pub fn local_entropy_trace(&self, w: &Word, checkpoints: &[usize]) -> Result<Vec<(usize, f64)>> {
        local_trace(w, checkpoints, |prefix| self.log_mass(prefix))
    }

    /// `(Σ_{ℓ≤k} -log ν(middle_ℓ)) / m_k`, the lower bound for the local
    /// entropy at `m_k` that ignores the join factors.
    pub fn middle_entropy_bound(&self, w: &Word, k: usize) -> Result<f64> {
        let mk = self.blocks[k - 1].1;
        if mk as usize > w.len() {
            return Err(Error::OutOfRange {
                position: mk as usize,
                depth: 0,
                len: w.len(),
            });
        }
        let mut total = 0.0;
        for region in self.regions().take(k) {
            if let Region::Free { mid_start, mid_end, .. } = region {
                total -= self.parry.log_mass(&w[mid_start as usize..mid_end as usize]);
            }
        }
        Ok(total / mk as f64)
    }
}

/// Weighted Birkhoff average of `φ` along `word` over its first `n` positions.
pub fn weighted_average_check(
    word: &Word,
    w: &WeightSequence,
    phi: &Potential,
    n: usize,
) -> Result<f64> {
    if n == 0 || n + phi.depth() - 1 > word.len() {
        return Err(Error::OutOfRange {
            position: n,
            depth: phi.depth(),
            len: word.len(),
        });
    }
    weighted_average(&phi.orbit(word), w, n as u64)
}

/// Terms of the perturbation bound at `m_k` for a point that agrees with the
/// anchor outside the free blocks:
/// `ρ_0 Σ_{ℓ≤k}(S_{m_ℓ} - S_{n_ℓ}) / S_{m_k} + ε + ρ_0 s_0 N k / S_{n_k}`,
/// with `N` the least depth where `ρ_N ≤ ε`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PerturbationBound {
    pub k: usize,
    pub block_term: f64,
    pub eps: f64,
    pub boundary_term: f64,
}

impl PerturbationBound {
    pub fn total(&self) -> f64 {
        self.block_term + self.eps + self.boundary_term
    }
}

pub fn perturbation_bound(
    blocks: &[(u64, u64)],
    w: &WeightSequence,
    phi: &Potential,
    eps: f64,
    k: usize,
) -> Result<PerturbationBound> {
    let modulus = phi.modulus();
    let rho0 = modulus.rho(0);
    let depth_n = (0..=phi.depth()).find(|&n| modulus.rho(n) <= eps).unwrap_or(phi.depth());
    let (nk, mk) = blocks[k - 1];
    let s_mk = w.partial_sum(mk)?;
    let mut mass = 0.0;
    for &(n, m) in &blocks[..k] {
        mass += w.partial_sum(m)? - w.partial_sum(n)?;
    }
    let s_nk = w.partial_sum(nk)?;
    let boundary_term = if s_nk > 0.0 {
        rho0 * w.weight(0)? * depth_n as f64 * k as f64 / s_nk
    } else {
        f64::INFINITY
    };
    Ok(PerturbationBound {
        k,
        block_term: rho0 * mass / s_mk,
        eps,
        boundary_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{build_ubar_schedule, Index, ScheduleOptions, Thinning};

    fn small_scheme(sft: &Sft, n: usize) -> ConcatenationScheme {
        let phi = Potential::indicator(sft, 1).unwrap();
        let (lo, hi) = crate::thermo::spectrum_endpoints(sft, &phi).unwrap();
        let t = 0.5 * (lo + hi);
        let eps = (hi - lo) / 12.0;
        build_scheme(sft, &phi, t, eps, 0.5, n, CardinalityPolicy::Report).unwrap()
    }

    #[test]
    fn scheme_families_respect_windows() {
        let s = Sft::full_shift(2);
        let phi = Potential::indicator(&s, 1).unwrap();
        let sc = build_scheme(&s, &phi, 0.5, 0.05, 0.05, 12, CardinalityPolicy::Report).unwrap();
        for w in sc.family_words(Family::X) {
            assert!((phi.word_average(&w) - 0.6).abs() < 0.05);
        }
        for w in sc.family_words(Family::Y) {
            assert!((phi.word_average(&w) - 0.4).abs() < 0.05);
        }
        // binomial oracle: averages in (0.55, 0.65) means exactly 7 ones of 12
        assert_eq!(sc.family_sizes(), (792, 792));
    }

    #[test]
    fn scheme_preconditions() {
        let s = Sft::full_shift(2);
        let phi = Potential::indicator(&s, 1).unwrap();
        let err = build_scheme(&s, &phi, 0.9, 0.05, 0.05, 12, CardinalityPolicy::Report).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let err = build_scheme(&s, &phi, 0.5, 0.05, 0.0, 12, CardinalityPolicy::Require).unwrap_err();
        assert!(matches!(err, Error::CardinalityShortfall { .. }));
    }

    #[test]
    fn tune_p_on_symmetric_families() {
        let s = Sft::full_shift(2);
        let phi = Potential::indicator(&s, 1).unwrap();
        let sc = build_scheme(&s, &phi, 0.5, 0.05, 0.05, 12, CardinalityPolicy::Report).unwrap();
        assert!((sc.integral(1.0) - 7.0 / 12.0).abs() < 1e-15);
        assert!((sc.integral(0.0) - 5.0 / 12.0).abs() < 1e-15);
        let p = sc.tune_p(0.5).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!(matches!(sc.tune_p(0.9), Err(Error::PBracket { .. })));
    }

    #[test]
    fn integral_matches_long_samples() {
        let g = Sft::golden_mean();
        let phi = Potential::indicator(&g, 1).unwrap();
        let sc = small_scheme(&g, 10).tuned().unwrap();
        assert!((sc.integral(sc.p) - sc.t).abs() < 1e-9);
        let w = sc.sample(400_000, 11);
        assert!(g.is_admissible(&w));
        assert!((phi.word_average(&w) - sc.t).abs() < 0.01);
    }

    #[test]
    fn concatenation_masses_are_consistent() {
        let g = Sft::golden_mean();
        let sc = small_scheme(&g, 6).with_p(0.3).unwrap();
        for len in 1..=16 {
            for w in g.enumerate_words(len).unwrap() {
                let total = sc.log_mass(&w).exp();
                let ext: f64 = (0..2u8)
                    .filter(|&a| g.allowed(w[len - 1], a))
                    .map(|a| {
                        let mut v = w.0.clone();
                        v.push(a);
                        sc.log_mass(&v).exp()
                    })
                    .sum();
                assert!((ext - total).abs() <= 1e-12 * total.max(1e-300), "{w:?}");
            }
        }
        let total: f64 = g.enumerate_words(3).unwrap().map(|w| sc.log_mass(&w).exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concatenation_trace_matches_block_entropy() {
        let s = Sft::full_shift(2);
        let sc = small_scheme(&s, 10).tuned().unwrap();
        let w = sc.sample(10 * 200, 5);
        let trace = sc.local_entropy_trace(&w, &[2000]).unwrap();
        assert!((trace[0].1 - sc.entropy_rate()).abs() < 0.05);
    }

    #[test]
    fn extreme_mixing_shifts_the_average() {
        let s = Sft::full_shift(2);
        let phi = Potential::indicator(&s, 1).unwrap();
        let sc = small_scheme(&s, 10);
        let above = sc.clone().with_p(1.0).unwrap().sample(100_000, 1);
        let below = sc.with_p(0.0).unwrap().sample(100_000, 1);
        assert!(phi.word_average(&above) > 0.5);
        assert!(phi.word_average(&below) < 0.5);
    }

    fn harmonic_consecutive(k: usize) -> UbarSchedule {
        let opts = ScheduleOptions {
            thinning: Thinning::Consecutive,
            ..Default::default()
        };
        build_ubar_schedule(&WeightSequence::harmonic(), k, Index::Exact(1 << 40), &opts).unwrap()
    }

    #[test]
    fn degenerate_schedule_copies_anchor() {
        let g = Sft::golden_mean();
        let anchor = Anchor::periodic(vec![0, 1, 0]);
        let ps = PackingScheme::from_blocks(&g, anchor.clone(), vec![(3, 3), (8, 8), (20, 20)]).unwrap();
        let w = ps.sample(20, 4).unwrap();
        assert_eq!(w, anchor.word(20));
        let trace = ps.local_entropy_trace(&w, &[5, 10, 20]).unwrap();
        assert!(trace.iter().all(|&(_, h)| h == 0.0));
        assert!(matches!(ps.sample(21, 4), Err(Error::ScheduleTooShort { .. })));
    }

    #[test]
    fn packing_copies_anchor_outside_blocks() {
        let s = Sft::full_shift(2);
        let ps = PackingScheme::new(&s, Anchor::periodic(vec![0]), &harmonic_consecutive(4)).unwrap();
        let w = ps.sample(ps.covered(), 9).unwrap();
        let blocks = ps.blocks().to_vec();
        for i in 0..w.len() as u64 {
            if !blocks.iter().any(|&(n, m)| n <= i && i < m) {
                assert_eq!(w[i as usize], 0);
            }
        }
    }

    #[test]
    fn packing_samples_are_admissible_and_consistent() {
        let g = Sft::golden_mean();
        let anchor = Anchor::periodic(vec![0, 1, 0, 1, 0]);
        let ps = PackingScheme::new(&g, anchor, &harmonic_consecutive(4)).unwrap();
        for seed in 0..200 {
            let w = ps.sample(ps.covered(), seed).unwrap();
            assert!(g.is_admissible(&w));
            assert!(ps.log_mass(&w).is_finite());
        }
        // Kolmogorov consistency on short cylinders spanning copy and free blocks
        for len in 1..=19 {
            for w in g.enumerate_words(len).unwrap() {
                let total = ps.log_mass(&w).exp();
                let ext: f64 = (0..2u8)
                    .filter(|&a| g.allowed(w[len - 1], a))
                    .map(|a| {
                        let mut v = w.0.clone();
                        v.push(a);
                        ps.log_mass(&v).exp()
                    })
                    .sum();
                assert!((ext - total).abs() <= 1e-12 * total.max(1e-300), "{w:?}");
            }
        }
    }

    #[test]
    fn anchor_average_is_exact() {
        let g = Sft::golden_mean();
        let phi = Potential::indicator(&g, 1).unwrap();
        assert_eq!(Anchor::periodic(vec![0, 1, 0, 1, 0]).birkhoff_average(&phi), 0.4);
        let bad = Anchor::periodic(vec![1, 1]);
        assert!(bad.validate(&g).is_err());
        assert!(Anchor::periodic(vec![1]).validate(&g).is_err());
    }
}
