//! Operator-norm estimation by Lanczos iteration on `A*A`.
//!
//! The iteration is the power method accelerated on its Krylov space: each
//! step adds one application of `A*A` and the largest Ritz value of the
//! projected tridiagonal matrix is the running estimate of `‖A‖²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::C64;

/// A linear map on complex profiles together with its adjoint for a fixed inner product.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;
    /// Adjoint with respect to [`LinearOperator::inner`].
    fn apply_adjoint(&self, x: &[C64]) -> Vec<C64>;
    /// `⟨x, y⟩`, linear in `x`. Defaults to the Euclidean product.
    fn inner(&self, x: &[C64], y: &[C64]) -> C64 {
        x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
    }
}

/// Dense matrix acting by `x ↦ Mx` with the Euclidean product. Handy for tests and small problems.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub n: usize,
    pub entries: Vec<C64>,
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.entries[i * self.n + j] * x[j]).sum()).collect()
    }

    fn apply_adjoint(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.entries[j * self.n + i].conj() * x[j]).sum()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative change of the last Ritz value update.
    pub relative_change: f64,
}

pub const NORM_TOLERANCE: f64 = 1e-8;
const SEED: u64 = 0x6e6f_726d;

/// Estimate `‖A‖` with at most `iterations` Lanczos steps.
///
/// Fails with [`Error::NoConvergence`] if the Ritz value is still moving by
/// more than [`NORM_TOLERANCE`] (relative) at the cap.
pub fn estimate_operator_norm(op: &dyn LinearOperator, iterations: usize) -> Result<NormEstimate> {
    estimate_operator_norm_tol(op, iterations, NORM_TOLERANCE)
}

pub fn estimate_operator_norm_tol(op: &dyn LinearOperator, iterations: usize, tol: f64) -> Result<NormEstimate> {
    if iterations < 20 {
        return Err(Error::InvalidArgument(format!("need at least 20 iterations, got {iterations}")));
    }
    let n = op.dim();
    if n == 0 {
        return Ok(NormEstimate { norm: 0.0, iterations: 0, converged: true, relative_change: 0.0 });
    }
    let norm_of = |v: &[C64]| op.inner(v, v).re.max(0.0).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let nv = norm_of(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta_prev = 0.0;
    let mut change = f64::INFINITY;
    let cap = iterations.min(n);

    for step in 0..cap {
        let mut w = op.apply_adjoint(&op.apply(&v));
        let a = op.inner(&w, &v).re;
        alpha.push(a);
        basis.push(v.clone());
        // two passes of full reorthogonalization also remove the three-term recurrence parts
        for _ in 0..2 {
            for q in &basis {
                let c = op.inner(&w, q);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let theta = largest_tridiagonal_eigenvalue(&alpha, &beta).max(0.0);
        let b = norm_of(&w);
        change = if theta > 0.0 { (theta - theta_prev).abs() / theta } else { 0.0 };
        let done = b <= 1e-13 * theta.max(f64::MIN_POSITIVE) || step + 1 == n;
        if done || (step > 0 && change <= tol) {
            return Ok(NormEstimate { norm: theta.sqrt(), iterations: step + 1, converged: true, relative_change: change });
        }
        theta_prev = theta;
        beta.push(b);
        v = w.into_iter().map(|x| x / b).collect();
    }
    Err(Error::NoConvergence { iterations: cap, change })
}

/// Number of eigenvalues of the symmetric tridiagonal `(a, b)` strictly below `x`.
fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..a.len() {
        let off = if i > 0 { b[i - 1] * b[i - 1] } else { 0.0 };
        d = a[i] - x - if i > 0 { off / d } else { 0.0 };
        if d == 0.0 {
            d = -f64::EPSILON * (a[i].abs() + x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by bisection.
pub(crate) fn largest_tridiagonal_eigenvalue(a: &[f64], b: &[f64]) -> f64 {
    let m = a.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < m { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(a, &b[..m - 1], mid) == m {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(vals: &[f64]) -> DenseOperator {
        let n = vals.len();
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for (i, v) in vals.iter().enumerate() {
            entries[i * n + i] = C64::new(*v, 0.0);
        }
        DenseOperator { n, entries }
    }

    #[test]
    fn identity_and_scaled_identity() {
        let est = estimate_operator_norm(&diag(&[1.0; 50]), 50).unwrap();
        assert!((est.norm - 1.0).abs() < 1e-8 && est.converged);
        let est = estimate_operator_norm(&diag(&[3.0; 50]), 50).unwrap();
        assert!((est.norm - 3.0).abs() < 1e-8);
    }

    #[test]
    fn non_normal_matrix_uses_singular_value() {
        // [[0, 2], [0, 0]] has spectral radius 0 but norm 2
        let mut entries = vec![C64::new(0.0, 0.0); 4];
        entries[1] = C64::new(2.0, 0.0);
        let est = estimate_operator_norm(&DenseOperator { n: 2, entries }, 20).unwrap();
        assert!((est.norm - 2.0).abs() < 1e-10);
    }

    #[test]
    fn diagonal_spectrum() {
        let vals: Vec<f64> = (0..200).map(|i| -(i as f64) / 100.0).collect();
        let est = estimate_operator_norm(&diag(&vals), 200).unwrap();
        assert!((est.norm - 1.99).abs() < 1e-7, "{}", est.norm);
    }

    #[test]
    fn rejects_tiny_iteration_cap() {
        assert!(estimate_operator_norm(&diag(&[1.0; 4]), 5).is_err());
    }

    #[test]
    fn tridiagonal_bisection() {
        // eigenvalues of tridiag(-1, 2, -1) of size 5: 2 - 2cos(jπ/6)
        let a = vec![2.0; 5];
        let b = vec![-1.0; 4];
        let top = largest_tridiagonal_eigenvalue(&a, &b);
        let expect = 2.0 - 2.0 * (5.0 * std::f64::consts::PI / 6.0).cos();
        assert!((top - expect).abs() < 1e-12);
    }
}
