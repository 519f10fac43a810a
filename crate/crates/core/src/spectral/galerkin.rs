//! Fourier (spectral collocation) discretization used as an independent
//! cross-check of the finite-difference operators.
//!
//! The periodic second-derivative matrix below is the classical trigonometric
//! differentiation matrix; conjugating by the DFT gives the Galerkin operator
//! with modes up to N/2 and the potential applied as a (grid-aliased)
//! convolution, so negative-eigenvalue counts agree with that assembly.

use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Dense symmetric `-d^2/ds^2` on a length-`length` periodic grid of `n`
/// points (n even), spectrally accurate.
pub fn neg_second_derivative_matrix(n: usize, length: f64) -> DMatrix<f64> {
    assert!(n >= 4 && n % 2 == 0, "spectral differentiation matrix needs even n");
    let h = 2.0 * PI / n as f64;
    let scale = (2.0 * PI / length).powi(2);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                m[(i, j)] = scale * (PI * PI / (3.0 * h * h) + 1.0 / 6.0);
            } else {
                let d = (i as isize - j as isize).unsigned_abs();
                let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
                let s = (h * d as f64 / 2.0).sin();
                m[(i, j)] = scale * sign / (2.0 * s * s);
            }
        }
    }
    m
}

/// `-d^2/ds^2 - diag(potential)` in the spectral discretization.
pub fn spectral_operator(potential: &[f64], length: f64) -> DMatrix<f64> {
    let n = potential.len();
    let mut m = neg_second_derivative_matrix(n, length);
    for i in 0..n {
        m[(i, i)] -= potential[i];
    }
    m
}

/// Inertia of `m + shift I` by unpivoted dense LDL^T: returns the number of
/// negative pivots, or `None` when a pivot underflows the breakdown guard
/// (caller falls back to an eigendecomposition).
pub fn dense_ldlt_inertia(m: &DMatrix<f64>, shift: f64) -> Option<usize> {
    let n = m.nrows();
    let mut a = m.clone_owned();
    let mut scale = 0.0f64;
    for i in 0..n {
        a[(i, i)] += shift;
        scale = scale.max(a[(i, i)].abs());
    }
    let breakdown = (scale * f64::EPSILON * 1e-2).max(f64::MIN_POSITIVE);
    let mut negatives = 0usize;
    for col in 0..n {
        let pivot = a[(col, col)];
        if pivot.abs() < breakdown {
            return None;
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        // update the trailing lower triangle, walking columns for locality
        for j in (col + 1)..n {
            let factor = a[(j, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for i in j..n {
                let v = a[(i, col)];
                a[(i, j)] -= factor * v;
            }
        }
    }
    Some(negatives)
}
