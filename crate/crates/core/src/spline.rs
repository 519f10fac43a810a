//! Periodic cubic splines and the cyclic tridiagonal solves backing them.

/// Solve a cyclic tridiagonal system. `sub[i]`, `diag[i]`, `sup[i]` are the
/// coefficients of row `i`; `sub[0]` couples to the last unknown and
/// `sup[n-1]` to the first (periodic wrap). Sherman-Morrison on top of the
/// Thomas algorithm.
pub fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(n >= 3, "cyclic solve needs at least 3 unknowns");
    let gamma = -diag[0];
    let mut modified = diag.to_vec();
    modified[0] = diag[0] - gamma;
    modified[n - 1] = diag[n - 1] - sub[0] * sup[n - 1] / gamma;

    let thomas = |b: &[f64], d: &[f64]| -> Vec<f64> {
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        c_prime[0] = sup[0] / b[0];
        d_prime[0] = d[0] / b[0];
        for i in 1..n {
            let denom = b[i] - sub[i] * c_prime[i - 1];
            c_prime[i] = sup[i] / denom;
            d_prime[i] = (d[i] - sub[i] * d_prime[i - 1]) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d_prime[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d_prime[i] - c_prime[i] * x[i + 1];
        }
        x
    };

    let x = thomas(&modified, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = sup[n - 1];
    let q = thomas(&modified, &u);
    let factor = (x[0] + sub[0] * x[n - 1] / gamma) / (1.0 + q[0] + sub[0] * q[n - 1] / gamma);
    x.iter().zip(&q).map(|(xi, qi)| xi - factor * qi).collect()
}

/// Natural periodic cubic spline through `(knots[i], values[i])` with the
/// last knot wrapping to `knots[0] + period`. Knots must be strictly
/// increasing and `knots[n-1] < knots[0] + period`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second_derivs: Vec<f64>,
    period: f64,
}

impl PeriodicSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, period: f64) -> Self {
        let n = knots.len();
        assert_eq!(n, values.len());
        assert!(n >= 3);
        assert!(period > 0.0);
        let gap = |i: usize| -> f64 {
            let next = if i + 1 == n { knots[0] + period } else { knots[i + 1] };
            next - knots[i]
        };
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            let h_prev = gap(prev);
            let h_next = gap(i);
            sub[i] = h_prev;
            diag[i] = 2.0 * (h_prev + h_next);
            sup[i] = h_next;
            rhs[i] = 6.0 * ((values[next] - values[i]) / h_next - (values[i] - values[prev]) / h_prev);
        }
        let second_derivs = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs);
        Self { knots, values, second_derivs, period }
    }

    /// Segment index and the argument reduced into the fundamental period.
    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.knots.len();
        let mut t = (t - self.knots[0]).rem_euclid(self.period) + self.knots[0];
        let mut lo = 0usize;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.knots[mid] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if t < self.knots[lo] {
            t += self.period;
        }
        (lo, t)
    }

    fn segment(&self, i: usize) -> (usize, f64, f64) {
        let n = self.knots.len();
        let next = (i + 1) % n;
        let upper = if next == 0 { self.knots[0] + self.period } else { self.knots[next] };
        (next, self.knots[i], upper)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (i, t) = self.locate(t);
        let (next, lower, upper) = self.segment(i);
        let h = upper - lower;
        let a = (upper - t) / h;
        let b = (t - lower) / h;
        a * self.values[i]
            + b * self.values[next]
            + ((a * a * a - a) * self.second_derivs[i] + (b * b * b - b) * self.second_derivs[next]) * h * h / 6.0
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let (i, t) = self.locate(t);
        let (next, lower, upper) = self.segment(i);
        let h = upper - lower;
        let a = (upper - t) / h;
        let b = (t - lower) / h;
        (self.values[next] - self.values[i]) / h
            + ((1.0 - 3.0 * a * a) * self.second_derivs[i] + (3.0 * b * b - 1.0) * self.second_derivs[next]) * h / 6.0
    }

    pub fn period(&self) -> f64 {
        self.period
    }
}
