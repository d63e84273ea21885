//! Short-time propagator `exp(−i H dt) ψ` from a Lanczos subspace.
//!
//! The Krylov basis is fully reorthogonalised. After every new vector the
//! projected exponential `exp(−i T dt) e₁` is evaluated and the standard
//! residual estimate `β_j |e_jᵀ exp(−i T dt) e₁|` decides convergence.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::vector;
use super::EdError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovConfig {
    /// Residual estimate below which a step is accepted.
    pub tolerance: f64,
    /// Smallest subspace at which convergence is tested.
    pub min_dim: usize,
    /// Largest subspace before the step is rejected.
    pub max_dim: usize,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self { tolerance: 1e-12, min_dim: 2, max_dim: 60 }
    }
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub subspace_dim: usize,
    pub error_estimate: f64,
    /// `| ‖ψ'‖ − 1 |` before renormalisation.
    pub norm_defect: f64,
    /// The Krylov space was invariant; the step is exact.
    pub breakdown: bool,
}

/// Coefficients `exp(−i T dt) e₁` of a real symmetric tridiagonal `T`.
fn projected_exponential(alpha: &[f64], beta: &[f64], dt: f64) -> Vec<Complex64> {
    let n = alpha.len();
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = alpha[i];
        if i + 1 < n {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let q = &eig.eigenvectors;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| Complex64::from_polar(q[(i, k)] * q[(0, k)], -eig.eigenvalues[k] * dt))
                .sum()
        })
        .collect()
}

/// Advance `psi` by `dt` in place. `apply(x, out)` must write `H x` to `out`.
pub fn krylov_step<F>(apply: F, psi: &mut [Complex64], dt: f64, config: &KrylovConfig) -> Result<StepReport, EdError>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let dim = psi.len();
    let beta0 = vector::norm(psi);
    if beta0 == 0.0 || !beta0.is_finite() {
        return Err(EdError::Numeric(format!("cannot propagate a state of norm {beta0}")));
    }
    let max_dim = config.max_dim.min(dim).max(1);
    let breakdown_tol = 1e-14 * beta0.max(1.0);

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_dim.min(16));
    let mut v0 = psi.to_vec();
    vector::scale(1.0 / beta0, &mut v0);
    basis.push(v0);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];

    loop {
        let j = basis.len() - 1;
        apply(&basis[j], &mut w);
        let a = vector::dot(&basis[j], &w).re;
        alpha.push(a);
        vector::axpy(Complex64::new(-a, 0.0), &basis[j], &mut w);
        if j > 0 {
            vector::axpy(Complex64::new(-beta[j - 1], 0.0), &basis[j - 1], &mut w);
        }
        // full reorthogonalisation, two passes
        for _ in 0..2 {
            for v in &basis {
                let c = vector::dot(v, &w);
                vector::axpy(-c, v, &mut w);
            }
        }
        let b = vector::norm(&w);
        let coeffs = projected_exponential(&alpha, &beta, dt);
        let breakdown = b <= breakdown_tol || basis.len() == dim;
        let estimate = if breakdown { 0.0 } else { beta0 * b * coeffs[j].norm() };

        if breakdown || (basis.len() >= config.min_dim && estimate < config.tolerance) {
            psi.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
            for (v, c) in basis.iter().zip(&coeffs) {
                vector::axpy(c * beta0, v, psi);
            }
            let new_norm = vector::norm(psi);
            let norm_defect = (new_norm - beta0).abs() / beta0;
            vector::scale(beta0 / new_norm, psi);
            return Ok(StepReport { subspace_dim: basis.len(), error_estimate: estimate, norm_defect, breakdown });
        }
        if basis.len() >= max_dim {
            return Err(EdError::StepSize { dt, subspace_dim: basis.len(), estimate });
        }
        beta.push(b);
        let mut next = std::mem::replace(&mut w, vec![Complex64::new(0.0, 0.0); dim]);
        vector::scale(1.0 / b, &mut next);
        basis.push(next);
    }
}
