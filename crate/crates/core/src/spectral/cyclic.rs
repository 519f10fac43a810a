//! Symmetric cyclic tridiagonal matrices.
//!
//! The finite-difference stability operators are tridiagonal with one
//! periodic corner. Storing only the diagonal and the wrapped off-diagonal
//! keeps the Sturm-style inertia count O(N): symmetric Gaussian elimination
//! in natural order touches one fill-in entry per step.

use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct CyclicTridiag {
    diag: Vec<f64>,
    /// `off[i]` couples unknowns `i` and `(i+1) % n`; the last entry is the
    /// periodic corner.
    off: Vec<f64>,
}

impl CyclicTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(diag.len(), off.len());
        assert!(diag.len() >= 3, "cyclic tridiagonal needs n >= 3");
        Self { diag, off }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            let j = (i + 1) % n;
            m[(i, j)] = self.off[i];
            m[(j, i)] = self.off[i];
        }
        m
    }

    /// Congruence by a positive diagonal: `D A D` with `D = diag(d)`.
    /// Preserves the sparsity pattern and, by Sylvester's law, the inertia
    /// signs at zero.
    pub fn diagonal_congruence(&self, d: &[f64]) -> Self {
        let n = self.n();
        assert_eq!(d.len(), n);
        let diag = (0..n).map(|i| d[i] * d[i] * self.diag[i]).collect();
        let off = (0..n).map(|i| d[i] * d[(i + 1) % n] * self.off[i]).collect();
        Self { diag, off }
    }

    /// Gershgorin bound on the spectral radius; cheap norm estimate for
    /// tolerance scaling.
    pub fn norm_estimate(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            let prev = self.off[(i + n - 1) % n].abs();
            worst = worst.max(self.diag[i].abs() + self.off[i].abs() + prev);
        }
        worst
    }

    /// Number of eigenvalues strictly below `x`, by counting negative pivots
    /// of the LDL^T factorization of `A - x I`. The periodic corner is carried
    /// as a single fill-in column; near-zero pivots are clamped to a tiny
    /// negative value (Sturm-count convention), so the count is monotone in `x`.
    pub fn inertia_below(&self, x: f64) -> usize {
        let n = self.n();
        let pivmin = (self.norm_estimate() * f64::EPSILON * 1e-3).max(f64::MIN_POSITIVE);
        let guard = |p: f64| if p.abs() < pivmin { -pivmin } else { p };

        let mut negatives = 0usize;
        let mut dd = self.diag[0] - x;
        let mut fill = self.off[n - 1]; // entry (0, n-1)
        let mut last = self.diag[n - 1] - x;
        for i in 0..n - 2 {
            let piv = guard(dd);
            if piv < 0.0 {
                negatives += 1;
            }
            let b = self.off[i];
            let next_base = if i + 1 == n - 2 { self.off[n - 2] } else { 0.0 };
            dd = (self.diag[i + 1] - x) - b * b / piv;
            last -= fill * fill / piv;
            fill = next_base - b * fill / piv;
        }
        // remaining 2x2 block [[dd, fill], [fill, last]]
        let piv = guard(dd);
        if piv < 0.0 {
            negatives += 1;
        }
        if guard(last - fill * fill / piv) < 0.0 {
            negatives += 1;
        }
        negatives
    }

    /// All eigenvalues in ascending order by bisection on [`inertia_below`].
    /// Independent of any dense decomposition; O(N^2 log(1/eps)).
    pub fn eigenvalues_bisection(&self) -> Vec<f64> {
        self.eigenvalues_bisection_lowest(self.n())
    }

    /// The `count` smallest eigenvalues in ascending order.
    pub fn eigenvalues_bisection_lowest(&self, count: usize) -> Vec<f64> {
        let n = self.n();
        let count = count.min(n);
        let bound = self.norm_estimate();
        let mut out = Vec::with_capacity(count);
        // lambda_j = inf { x : inertia_below(x) >= j + 1 }
        let mut lo_start = -bound;
        for j in 0..count {
            let mut lo = lo_start;
            let mut hi = bound;
            for _ in 0..75 {
                let mid = 0.5 * (lo + hi);
                if self.inertia_below(mid) >= j + 1 {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= f64::EPSILON * bound.max(1.0) {
                    break;
                }
            }
            out.push(hi);
            lo_start = lo; // eigenvalues are produced in ascending order
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, seed: u64) -> CyclicTridiag {
        let mut state = seed | 1;
        let mut rnd = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let diag: Vec<f64> = (0..n).map(|_| 4.0 * rnd()).collect();
        let off: Vec<f64> = (0..n).map(|_| 2.0 * rnd()).collect();
        CyclicTridiag::new(diag, off)
    }

    fn dense_eigenvalues(m: &CyclicTridiag) -> Vec<f64> {
        let mut ev: Vec<f64> = m.to_dense().symmetric_eigen().eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    #[test]
    fn dense_round_trip_is_symmetric() {
        let m = random_matrix(17, 42);
        let d = m.to_dense();
        assert_eq!(d, d.transpose());
    }

    #[test]
    fn inertia_matches_dense_eigen_counts() {
        for seed in [3u64, 17, 99, 1234] {
            let m = random_matrix(31, seed);
            let ev = dense_eigenvalues(&m);
            for x in [-3.0, -1.0, -0.25, 0.0, 0.4, 2.0] {
                let expected = ev.iter().filter(|&&l| l < x).count();
                assert_eq!(m.inertia_below(x), expected, "seed {seed}, shift {x}");
            }
        }
    }

    #[test]
    fn bisection_eigenvalues_match_dense() {
        let m = random_matrix(24, 7);
        let ev = dense_eigenvalues(&m);
        let bis = m.eigenvalues_bisection();
        for (a, b) in ev.iter().zip(&bis) {
            assert!((a - b).abs() < 1e-9 * m.norm_estimate(), "{a} vs {b}");
        }
    }

    #[test]
    fn congruence_preserves_inertia() {
        let m = random_matrix(40, 11);
        let d: Vec<f64> = (0..40).map(|i| 0.3 + 0.02 * i as f64).collect();
        let s = m.diagonal_congruence(&d);
        assert_eq!(m.inertia_below(0.0), s.inertia_below(0.0));
    }

    #[test]
    fn laplacian_spectrum_closed_form() {
        // free periodic FD Laplacian: eigenvalues (4/h^2) sin^2(pi j / n)
        let n = 64usize;
        let h = 0.1;
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n];
        let m = CyclicTridiag::new(diag, off);
        let ev = m.eigenvalues_bisection();
        let mut expect: Vec<f64> = (0..n)
            .map(|j| {
                let s = (std::f64::consts::PI * j as f64 / n as f64).sin();
                4.0 / (h * h) * s * s
            })
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-8 * m.norm_estimate());
        }
        assert_eq!(m.inertia_below(-1e-12), 0);
    }
}
