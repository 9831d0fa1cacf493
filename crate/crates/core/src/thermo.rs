//! Pressure of locally constant potentials, mean-cycle endpoints of the
//! spectrum domain and the entropy spectrum as a Legendre transform.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{fmt12, SparseMatrix};
use crate::potential::Potential;
use crate::sft::Sft;

/// Largest admissible `|q|·‖φ‖`.
pub const OVERFLOW_GUARD: f64 = 700.0;

const PERRON_TOL: f64 = 1e-14;

/// Higher-block graph of a depth-`m` potential: vertices are admissible
/// words of length `max(m-1, 1)`, edges are the admissible words one symbol
/// longer, labelled with the potential's value on their first `m` symbols.
#[derive(Clone, Debug)]
struct BlockGraph {
    vertices: usize,
    /// `(from, to, value)`
    edges: Vec<(usize, usize, f64)>,
}

impl BlockGraph {
    fn new(sft: &Sft, phi: &Potential) -> Result<Self> {
        let len = phi.depth().saturating_sub(1).max(1);
        let k = sft.alphabet_size();
        let code = |w: &[u8]| w.iter().fold(0usize, |c, &s| c * k + s as usize);
        let mut index = std::collections::HashMap::new();
        for (i, w) in sft.enumerate_words(len)?.enumerate() {
            index.insert(code(&w), i);
        }
        let edges = sft
            .enumerate_words(len + 1)?
            .map(|e| (index[&code(&e[..len])], index[&code(&e[1..])], phi.value(&e)))
            .collect();
        Ok(BlockGraph {
            vertices: index.len(),
            edges,
        })
    }

    /// Transfer matrix with entry `weight(i)` on edge `i`.
    fn matrix(&self, weight: impl Fn(usize) -> f64) -> SparseMatrix {
        let mut rows = vec![Vec::new(); self.vertices];
        for (i, &(u, v, _)) in self.edges.iter().enumerate() {
            let w = weight(i);
            if w > 0.0 {
                rows[u].push((v, w));
            }
        }
        SparseMatrix { rows }
    }

    /// Karp's maximum cycle mean.
    fn max_cycle_mean(&self, sign: f64) -> f64 {
        let n = self.vertices;
        // d[k][v]: largest weight of a walk with k edges ending at v
        let mut d = vec![vec![f64::NEG_INFINITY; n]; n + 1];
        d[0].iter_mut().for_each(|x| *x = 0.0);
        for k in 1..=n {
            let (prev, cur) = d.split_at_mut(k);
            for &(u, v, x) in &self.edges {
                let cand = prev[k - 1][u] + sign * x;
                if cand > cur[0][v] {
                    cur[0][v] = cand;
                }
            }
        }
        let mut best = f64::NEG_INFINITY;
        for v in 0..n {
            if d[n][v] == f64::NEG_INFINITY {
                continue;
            }
            let worst = (0..n)
                .filter(|&k| d[k][v] > f64::NEG_INFINITY)
                .map(|k| (d[n][v] - d[k][v]) / (n - k) as f64)
                .fold(f64::INFINITY, f64::min);
            best = best.max(worst);
        }
        sign * best
    }

    /// Longest walks for the reduced weights `sign·(x - mean)`, which carry no
    /// positive cycles; `pot[u] + sign·(x - mean) - pot[v] <= 0` on every edge.
    fn gauge(&self, mean: f64, sign: f64) -> Vec<f64> {
        let scale = 1.0 + self.edges.iter().fold(0.0f64, |m, e| m.max(e.2.abs()));
        let mut pot = vec![0.0f64; self.vertices];
        for _ in 0..self.vertices {
            let mut changed = false;
            for &(u, v, x) in &self.edges {
                let cand = pot[u] + sign * x - sign * mean;
                if cand > pot[v] + 1e-15 * scale {
                    pot[v] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        pot
    }

    /// Edge weights `sign·(x - mean)` after the gauge; all at most zero, and
    /// zero on optimal cycles.
    fn gauged_weights(&self, mean: f64, sign: f64) -> Vec<f64> {
        let pot = self.gauge(mean, sign);
        self.edges
            .iter()
            .map(|&(u, v, x)| (pot[u] + sign * (x - mean) - pot[v]).min(0.0))
            .collect()
    }

    /// Log spectral radius of the union of cycles whose mean is `sign·mean`
    /// optimal.
    fn critical_entropy(&self, mean: f64, sign: f64) -> f64 {
        let n = self.vertices;
        let scale = 1.0 + self.edges.iter().fold(0.0f64, |m, e| m.max(e.2.abs()));
        let tol = 1e-9 * scale * n as f64;
        let pot = self.gauge(mean, sign);
        let tight: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(u, v, x)| (pot[u] + sign * x - sign * mean - pot[v]).abs() <= tol)
            .map(|&(u, v, _)| (u, v))
            .collect();
        let comp = strongly_connected(n, &tight);
        let mut best = 0.0f64;
        let ncomp = comp.iter().copied().max().map_or(0, |c| c + 1);
        for c in 0..ncomp {
            let members: Vec<usize> = (0..n).filter(|&v| comp[v] == c).collect();
            let local: std::collections::HashMap<usize, usize> =
                members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let mut rows = vec![Vec::new(); members.len()];
            for &(u, v) in &tight {
                if comp[u] == c && comp[v] == c {
                    rows[local[&u]].push((local[&v], 1.0));
                }
            }
            if rows.iter().all(|r| r.is_empty()) {
                continue;
            }
            let m = SparseMatrix { rows };
            best = best.max(m.perron_auto(PERRON_TOL).root.ln());
        }
        best.max(0.0)
    }
}

/// Tarjan's algorithm; returns the component id of each vertex.
fn strongly_connected(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
    }
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(top) = call.last_mut() {
            let v = top.0;
            if top.1 < adj[v].len() {
                let w = adj[v][top.1];
                top.1 += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// `q ↦ P(q)`, the log spectral radius of the transfer matrix with entries
/// `e^{qφ(block)}` on admissible blocks.
#[derive(Clone, Debug)]
pub struct PressureFunction {
    graph: BlockGraph,
    norm: f64,
    h_top: f64,
    alpha_minus: f64,
    alpha_plus: f64,
    /// Gauged weights for `q >= 0` (around `α^+`) and `q < 0` (around `α^-`).
    upper: Vec<f64>,
    lower: Vec<f64>,
}

impl PressureFunction {
    pub fn new(sft: &Sft, phi: &Potential) -> Result<Self> {
        let graph = BlockGraph::new(sft, phi)?;
        let alpha_minus = graph.max_cycle_mean(-1.0) + 0.0; // normalise -0
        let alpha_plus = graph.max_cycle_mean(1.0);
        let upper = graph.gauged_weights(alpha_plus, 1.0);
        let lower = graph.gauged_weights(alpha_minus, -1.0);
        Ok(PressureFunction {
            upper,
            lower,
            graph,
            norm: phi.norm(),
            h_top: sft.topological_entropy(),
            alpha_minus,
            alpha_plus,
        })
    }

    pub fn h_top(&self) -> f64 {
        self.h_top
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Largest `|q|` allowed by the overflow guard.
    pub fn q_limit(&self) -> f64 {
        if self.norm == 0.0 {
            f64::INFINITY
        } else {
            OVERFLOW_GUARD / self.norm
        }
    }

    pub fn eval(&self, q: f64) -> Result<f64> {
        if (q * self.norm).abs() > OVERFLOW_GUARD || !q.is_finite() {
            return Err(Error::OverflowGuard((q * self.norm).abs()));
        }
        let (anchor, rest) = self.split(q);
        Ok(q * anchor + rest)
    }

    /// `P(q) = q·anchor + rest`, with `anchor` the optimal cycle mean in the
    /// direction of `q` and `rest >= 0` computed from a matrix with entries in
    /// `[0, 1]`, so no `q` overflows.
    fn split(&self, q: f64) -> (f64, f64) {
        let (anchor, w) = if q >= 0.0 {
            (self.alpha_plus, &self.upper)
        } else {
            (self.alpha_minus, &self.lower)
        };
        let m = self.graph.matrix(|i| (q.abs() * w[i]).exp());
        (anchor, m.perron_auto(PERRON_TOL).root.ln())
    }

    /// `P(q) - q·t` without the overflow guard.
    fn legendre_objective(&self, q: f64, t: f64) -> f64 {
        let (anchor, rest) = self.split(q);
        q * (anchor - t) + rest
    }

    /// Sign of `P'(q) - t`, by central difference.
    fn slope_exceeds(&self, q: f64, t: f64) -> f64 {
        let h = 1e-5 * (1.0 + q.abs());
        self.legendre_objective(q + h, t) - self.legendre_objective(q - h, t)
    }

    /// Central difference with step `10^{-5}(1 + |q|)`.
    pub fn derivative(&self, q: f64) -> Result<f64> {
        let h = 1e-5 * (1.0 + q.abs());
        Ok((self.eval(q + h)? - self.eval(q - h)?) / (2.0 * h))
    }

    /// `(α^-, α^+)`: minimum and maximum cycle means of the potential.
    pub fn endpoints(&self) -> (f64, f64) {
        (self.alpha_minus, self.alpha_plus)
    }

    /// Entropy at the two endpoints: log spectral radius of the subgraph
    /// carried by optimal-mean cycles.
    pub fn endpoint_entropies(&self) -> (f64, f64) {
        (
            self.graph.critical_entropy(self.alpha_minus, -1.0),
            self.graph.critical_entropy(self.alpha_plus, 1.0),
        )
    }

    /// `H(t) = inf_q P(q) - q t` on `[α^-, α^+]`.
    pub fn spectrum_point(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.endpoints();
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::Domain { t, lo, hi });
        }
        if (t - lo).abs() <= slack {
            return Ok(self.endpoint_entropies().0);
        }
        if (t - hi).abs() <= slack {
            return Ok(self.endpoint_entropies().1);
        }
        // bracket the minimiser of the convex P(q) - qt; the gauged pressure
        // has no overflow, so the bracket may grow far past the guard
        let mut big_q = 8.0 / (hi - lo);
        while !(self.slope_exceeds(big_q, t) > 0.0 && self.slope_exceeds(-big_q, t) < 0.0) {
            if big_q > 1e15 {
                return Err(Error::Bracket(t));
            }
            big_q *= 2.0;
        }
        let g = |q: f64| self.legendre_objective(q, t);
        // golden-section search of the convex function g on [-Q, Q]
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (-big_q, big_q);
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let (mut g1, mut g2) = (g(x1), g(x2));
        while b - a > 1e-9 * (1.0 + big_q) {
            if g1 <= g2 {
                b = x2;
                x2 = x1;
                g2 = g1;
                x1 = b - inv_phi * (b - a);
                g1 = g(x1);
            } else {
                a = x1;
                x1 = x2;
                g1 = g2;
                x2 = a + inv_phi * (b - a);
                g2 = g(x2);
            }
        }
        Ok(g1.min(g2))
    }
}

pub fn pressure(sft: &Sft, phi: &Potential, q: f64) -> Result<f64> {
    PressureFunction::new(sft, phi)?.eval(q)
}

pub fn spectrum_endpoints(sft: &Sft, phi: &Potential) -> Result<(f64, f64)> {
    Ok(PressureFunction::new(sft, phi)?.endpoints())
}

pub fn spectrum_point(sft: &Sft, phi: &Potential, t: f64) -> Result<f64> {
    PressureFunction::new(sft, phi)?.spectrum_point(t)
}

/// Integral of the potential against the Parry measure; the point where the
/// spectrum attains `h_top`.
pub fn spectrum_argmax(sft: &Sft, phi: &Potential) -> Result<f64> {
    let parry = sft.parry();
    Ok(sft
        .enumerate_words(phi.depth())?
        .map(|w| parry.log_mass(&w).exp() * phi.value(&w))
        .sum())
}

/// `max(2/(α^+ - t), 2/(t - α^-))·h_top`, the constant controlling the
/// depth-convergence of the spectra.
pub fn convergence_constant(alpha_minus: f64, alpha_plus: f64, h_top: f64, t: f64) -> f64 {
    (2.0 / (alpha_plus - t)).max(2.0 / (t - alpha_minus)) * h_top
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumCurve {
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    /// `(H(α^-), H(α^+))`
    pub endpoint_values: (f64, f64),
    pub argmax: f64,
    pub h_top: f64,
    /// `(t, H(t))`, sorted by `t`.
    pub samples: Vec<(f64, f64)>,
    /// Every interior sample lies on or above the chord of its neighbours.
    pub concave: bool,
}

impl SpectrumCurve {
    /// `c(t)` at each sample.
    pub fn constants(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|&(t, _)| convergence_constant(self.alpha_minus, self.alpha_plus, self.h_top, t))
            .collect()
    }

    /// Samples together with the endpoints and the maximum, sorted by `t`.
    fn knots(&self) -> Vec<(f64, f64)> {
        // exact values first so they survive deduplication
        let mut k = vec![
            (self.argmax, self.h_top),
            (self.alpha_minus, self.endpoint_values.0),
            (self.alpha_plus, self.endpoint_values.1),
        ];
        k.extend_from_slice(&self.samples);
        k.sort_by(|a, b| a.0.total_cmp(&b.0));
        k.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15);
        k
    }

    /// Piecewise-linear interpolation through the knots; a lower bound for
    /// the concave spectrum. `-∞` outside the domain.
    pub fn interpolate(&self, t: f64) -> f64 {
        if t < self.alpha_minus || t > self.alpha_plus {
            return f64::NEG_INFINITY;
        }
        let k = self.knots();
        let i = k.partition_point(|p| p.0 < t);
        if i < k.len() && (k[i].0 - t).abs() < 1e-15 {
            return k[i].1;
        }
        if i == 0 || i == k.len() {
            return k[i.min(k.len() - 1)].1;
        }
        let (a, b) = (k[i - 1], k[i]);
        a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "t,H,c")?;
        for (&(t, h), c) in self.samples.iter().zip(self.constants()) {
            writeln!(out, "{},{},{}", fmt12(t), fmt12(h), fmt12(c))?;
        }
        Ok(())
    }
}

fn is_concave(samples: &[(f64, f64)]) -> bool {
    samples.windows(3).all(|w| {
        let (a, b, c) = (w[0], w[1], w[2]);
        let chord = a.1 + (c.1 - a.1) * (b.0 - a.0) / (c.0 - a.0);
        b.1 >= chord - 1e-8
    })
}

pub fn spectrum_curve(sft: &Sft, phi: &Potential, grid: &[f64]) -> Result<SpectrumCurve> {
    let p = PressureFunction::new(sft, phi)?;
    curve_from(&p, sft, phi, grid)
}

fn curve_from(p: &PressureFunction, sft: &Sft, phi: &Potential, grid: &[f64]) -> Result<SpectrumCurve> {
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let samples = grid
        .iter()
        .map(|&t| p.spectrum_point(t).map(|h| (t, h)))
        .collect::<Result<Vec<_>>>()?;
    let (alpha_minus, alpha_plus) = p.endpoints();
    Ok(SpectrumCurve {
        alpha_minus,
        alpha_plus,
        endpoint_values: p.endpoint_entropies(),
        argmax: spectrum_argmax(sft, phi)?,
        h_top: p.h_top(),
        concave: is_concave(&samples),
        samples,
    })
}

/// The spectrum of `φ` next to those of its discretizations `φ_n`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumTower {
    pub curve: SpectrumCurve,
    pub depths: Vec<usize>,
    /// `ε_n` for each requested depth.
    pub epsilon: Vec<f64>,
    /// `H_n(t)` per depth (outer) and grid point (inner); `-∞` outside the
    /// domain of `H_n`.
    pub levels: Vec<Vec<f64>>,
    /// `c(t)` per grid point.
    pub constants: Vec<f64>,
}

impl SpectrumTower {
    /// Largest `|H(t) - H_n(t)|` per depth.
    pub fn max_gaps(&self) -> Vec<f64> {
        self.levels
            .iter()
            .map(|hn| {
                hn.iter()
                    .zip(&self.curve.samples)
                    .fold(0.0f64, |m, (&a, &(_, h))| m.max((h - a).abs()))
            })
            .collect()
    }

    /// Whether `|H(t) - H_n(t)| ≤ 2 c(t) ε_n` at every grid point, per depth.
    pub fn bounds_hold(&self) -> Vec<bool> {
        self.levels
            .iter()
            .zip(&self.epsilon)
            .map(|(hn, &eps)| {
                hn.iter()
                    .zip(&self.curve.samples)
                    .zip(&self.constants)
                    .all(|((&a, &(_, h)), &c)| (h - a).abs() <= 2.0 * c * eps + 1e-9)
            })
            .collect()
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let mut header = vec!["t".to_string(), "H".to_string()];
        header.extend(self.depths.iter().map(|n| format!("H_{n}")));
        header.push("c".into());
        writeln!(out, "{}", header.join(","))?;
        for (i, &(t, h)) in self.curve.samples.iter().enumerate() {
            let mut row = vec![fmt12(t), fmt12(h)];
            row.extend(self.levels.iter().map(|hn| fmt12(hn[i])));
            row.push(fmt12(self.constants[i]));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn spectrum_tower(
    sft: &Sft,
    phi: &Potential,
    depths: &[usize],
    grid: &[f64],
) -> Result<SpectrumTower> {
    let curve = spectrum_curve(sft, phi, grid)?;
    let modulus = phi.modulus();
    let mut levels = Vec::with_capacity(depths.len());
    for &n in depths {
        let phi_n = phi.discretize(sft, n)?;
        let p = PressureFunction::new(sft, &phi_n)?;
        let (lo, hi) = p.endpoints();
        let hn = curve
            .samples
            .iter()
            .map(|&(t, _)| {
                if t < lo || t > hi {
                    Ok(f64::NEG_INFINITY)
                } else {
                    p.spectrum_point(t)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(hn);
    }
    Ok(SpectrumTower {
        constants: curve.constants(),
        epsilon: depths.iter().map(|&n| modulus.epsilon(n)).collect(),
        depths: depths.to_vec(),
        levels,
        curve,
    })
}

/// `(sup_{s<t} H(s), sup_{s≥t} H(s))`, `-∞` for empty ranges. Uses that `H`
/// increases up to its maximum and decreases after it.
pub fn level_set_entropy_bounds(curve: &SpectrumCurve, t: f64) -> (f64, f64) {
    let below = if t <= curve.alpha_minus {
        f64::NEG_INFINITY
    } else if t > curve.argmax {
        curve.h_top
    } else {
        curve.interpolate(t)
    };
    let above = if t > curve.alpha_plus {
        f64::NEG_INFINITY
    } else if t <= curve.argmax {
        curve.h_top
    } else {
        curve.interpolate(t)
    };
    (below, above)
}

/// `{0.01, 0.02, …}`-style uniform interior grid of `points` values.
pub fn interior_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|i| lo + (hi - lo) * i as f64 / (points + 1) as f64)
        .collect()
}
