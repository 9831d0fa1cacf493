//! Small numerical helpers shared by the averaging and spectrum code.

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Least-squares slope of `y ≈ h·x` (no intercept).
pub fn slope_through_origin(points: &[(f64, f64)]) -> f64 {
    let (xy, xx) = points
        .iter()
        .fold((0.0, 0.0), |(xy, xx), &(x, y)| (xy + x * y, xx + x * x));
    xy / xx
}

/// Ordinary least-squares slope of `y ≈ h·x + c`.
pub fn slope_with_intercept(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    sxy / sxx
}

/// `-t ln t - (1-t) ln(1-t)`, with the usual convention `0 ln 0 = 0`.
pub fn binary_entropy(t: f64) -> f64 {
    let xlx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    -xlx(t) - xlx(1.0 - t)
}

/// Format with 12 significant digits, as used by every CSV writer in the crate.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        trim_zeros(s)
    } else {
        let s = format!("{:.11e}", x);
        match s.split_once('e') {
            Some((mantissa, e)) => format!("{}e{}", trim_zeros(mantissa.to_string()), e),
            None => s,
        }
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        t.to_string()
    } else {
        s
    }
}

/// Deterministic generator for sampler stream `stream` under a 64-bit seed.
pub fn seeded_rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Nonnegative matrix in row-sparse form.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    pub rows: Vec<Vec<(usize, f64)>>,
}

/// Perron root and vector of a primitive nonnegative matrix.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub root: f64,
    /// Positive eigenvector normalised to unit maximum.
    pub vector: Vec<f64>,
    /// Collatz–Wielandt bracket `lo ≤ root ≤ hi` at termination.
    pub lo: f64,
    pub hi: f64,
}

impl SparseMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, a)| a * x[j]).sum();
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows = vec![Vec::new(); self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                rows[j].push((i, a));
            }
        }
        SparseMatrix { rows }
    }

    /// Perron data by repeated squaring of the dense matrix (normalised at
    /// each step), which separates the dominant eigenvalue doubly
    /// exponentially fast even when the spectral gap is tiny; the result is
    /// certified by the Collatz–Wielandt bracket of `M` itself. Intended for
    /// small dimensions.
    pub fn perron_dense(&self, rel_tol: f64) -> PerronData {
        let n = self.dim();
        // a positive shift of the order of the root keeps the Perron root
        // dominant and pulls apart eigenvalues of nearly equal modulus
        let first = self.bracket(vec![1.0; n]);
        let shift = (first.lo * first.hi).sqrt();
        let mut d = vec![vec![0.0f64; n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            d[i][i] += shift;
            for &(j, a) in row {
                d[i][j] += a;
            }
        }
        let mut best: Option<PerronData> = None;
        for _ in 0..64 {
            let x: Vec<f64> = d.iter().map(|r| r.iter().sum()).collect();
            let m = x.iter().cloned().fold(0.0, f64::max);
            let x: Vec<f64> = x.iter().map(|v| v / m).collect();
            let cand = self.bracket(x);
            let done = cand.hi - cand.lo <= rel_tol * cand.hi;
            if best.as_ref().map_or(true, |b| cand.hi - cand.lo < b.hi - b.lo) {
                best = Some(cand);
            }
            if done {
                break;
            }
            let mut sq = vec![vec![0.0f64; n]; n];
            for i in 0..n {
                for l in 0..n {
                    let a = d[i][l];
                    if a != 0.0 {
                        for j in 0..n {
                            sq[i][j] += a * d[l][j];
                        }
                    }
                }
            }
            let m = sq.iter().flatten().cloned().fold(0.0, f64::max);
            for v in sq.iter_mut().flatten() {
                *v /= m;
            }
            d = sq;
        }
        best.expect("at least one iteration")
    }

    fn bracket(&self, x: Vec<f64>) -> PerronData {
        let mut y = vec![0.0; self.dim()];
        self.apply(&x, &mut y);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (a, b) in y.iter().zip(&x) {
            if *b > 0.0 {
                lo = lo.min(a / b);
                hi = hi.max(a / b);
            }
        }
        PerronData {
            root: 0.5 * (lo + hi),
            vector: x,
            lo,
            hi,
        }
    }

    /// Dense squaring for small matrices, shifted power iteration otherwise.
    pub fn perron_auto(&self, rel_tol: f64) -> PerronData {
        if self.dim() <= 128 {
            self.perron_dense(rel_tol)
        } else {
            let shift = self.rows.iter().map(|r| r.iter().map(|e| e.1).sum::<f64>()).sum::<f64>()
                / self.dim() as f64;
            self.perron_shifted(rel_tol, shift)
        }
    }

    /// Power iteration certified by the Collatz–Wielandt bracket; stops when
    /// `hi - lo ≤ rel_tol · hi`.
    pub fn perron(&self, rel_tol: f64) -> PerronData {
        self.perron_shifted(rel_tol, 0.0)
    }

    /// Power iteration on `M + shift·I`, which has the same Perron vector and
    /// damps eigenvalues of near-maximal modulus sitting on a cycle (slow
    /// convergence of the plain iteration when one periodic orbit dominates).
    /// The reported root and bracket are for `M` itself.
    pub fn perron_shifted(&self, rel_tol: f64, shift: f64) -> PerronData {
        let n = self.dim();
        let mut x = vec![1.0; n];
        let mut y = vec![0.0; n];
        let (mut lo, mut hi) = (0.0, f64::INFINITY);
        for _ in 0..1_000_000 {
            self.apply(&x, &mut y);
            if shift != 0.0 {
                for (yi, xi) in y.iter_mut().zip(&x) {
                    *yi += shift * xi;
                }
            }
            lo = f64::INFINITY;
            hi = 0.0f64;
            for (a, b) in y.iter().zip(&x) {
                if *b > 0.0 {
                    let r = a / b;
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
            let m = y.iter().cloned().fold(0.0, f64::max);
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = yi / m;
            }
            if hi - lo <= rel_tol * hi {
                break;
            }
        }
        PerronData {
            root: 0.5 * (lo + hi) - shift,
            vector: x,
            lo: lo - shift,
            hi: hi - shift,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 1000.0);
    }

    #[test]
    fn fmt12_shapes() {
        assert_eq!(fmt12(2.0), "2");
        assert_eq!(fmt12(0.5), "0.5");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(1234567.891), "1234567.891");
        assert_eq!(fmt12(-2.5e-9), "-2.5e-9");
    }

    #[test]
    fn perron_of_golden_mean() {
        let m = SparseMatrix {
            rows: vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0)]],
        };
        let p = m.perron(1e-15);
        assert!((p.root - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(p.lo <= p.hi);
    }

    #[test]
    fn slopes() {
        let pts: Vec<_> = (1..5).map(|x| (x as f64, 2.0 * x as f64 + 1.0)).collect();
        assert!((slope_with_intercept(&pts) - 2.0).abs() < 1e-12);
        let pts: Vec<_> = (1..5).map(|x| (x as f64, 3.0 * x as f64)).collect();
        assert!((slope_through_origin(&pts) - 3.0).abs() < 1e-12);
    }
}
