//! Exact `V = 0` dynamics through the one-body correlation matrix.
//!
//! For a quadratic Hamiltonian `H = Σ h_ij c†_i c_j` the Gaussian state is
//! fully described by `C_ij = ⟨c†_i c_j⟩`, which evolves as
//! `C(t) = e^{iht} C(0) e^{−iht}`. The hopping matrix is diagonalised once;
//! each grid point then costs a phase rotation and two basis changes.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::model::{ModelParams, QuenchGrid};
use crate::spectrum::{
    entropies_from_modes, schmidt_topk_from_modes, EntanglementRecord, ModeOccupations, RenyiOrder,
    SpectrumError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FreeError {
    #[error("the free-fermion engine needs V = 0 (got V = {0})")]
    Unsupported(f64),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Real symmetric tridiagonal one-body matrix of the quadratic part.
pub fn hopping_matrix(params: &ModelParams<f64>) -> DMatrix<f64> {
    let l = params.l();
    let mut h = DMatrix::zeros(l, l);
    for i in 0..l - 1 {
        let t = params.bond_hopping(i);
        h[(i, i + 1)] = -t;
        h[(i + 1, i)] = -t;
    }
    h
}

/// `C_ij = ⟨c†_i c_j⟩` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(pub DMatrix<Complex64>);

impl CorrelationMatrix {
    pub fn initial(params: &ModelParams<f64>) -> Self {
        let l = params.l();
        Self(DMatrix::from_fn(l, l, |i, j| {
            if i == j && i < params.m {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    /// `max |C − C†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let c = &self.0;
        let mut worst = 0.0f64;
        for i in 0..c.nrows() {
            for j in 0..c.ncols() {
                worst = worst.max((c[(i, j)] - c[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Particles on sites `0..M`: `Σ Re C_ii`.
    pub fn particle_count(&self, m: usize) -> f64 {
        (0..m).map(|i| self.0[(i, i)].re).sum()
    }

    /// Eigenvalues of the block restricted to `sites`.
    pub fn block_eigenvalues(&self, sites: std::ops::Range<usize>) -> DVector<f64> {
        let n = sites.len();
        let block = self.0.view((sites.start, sites.start), (n, n)).into_owned();
        block.symmetric_eigenvalues()
    }

    /// Occupations of the natural orbitals of sites `0..M`.
    pub fn mode_occupations(&self, m: usize) -> ModeOccupations<f64> {
        ModeOccupations::new(self.block_eigenvalues(0..m).iter().copied().collect())
    }

    /// Same for the environment block `M..L`.
    pub fn environment_occupations(&self, m: usize) -> ModeOccupations<f64> {
        ModeOccupations::new(self.block_eigenvalues(m..self.dim()).iter().copied().collect())
    }
}

/// Particles in the system and the decayed fraction `1 − m/M`.
pub fn particle_count(c: &CorrelationMatrix, m: usize) -> (f64, f64) {
    let n = c.particle_count(m);
    (n, 1.0 - n / m as f64)
}

/// Spectral propagator for the correlation matrix.
#[derive(Debug, Clone)]
pub struct FreeEngine {
    params: ModelParams<f64>,
    energies: DVector<f64>,
    /// Eigenvectors of `h` as columns.
    modes: DMatrix<Complex64>,
    /// `C(0)` in the eigenbasis.
    initial_in_modes: DMatrix<Complex64>,
}

impl FreeEngine {
    pub fn new(params: &ModelParams<f64>) -> Result<Self, FreeError> {
        if !params.is_free() {
            return Err(FreeError::Unsupported(params.v));
        }
        let eig = SymmetricEigen::try_new(hopping_matrix(params), f64::EPSILON, 0)
            .ok_or_else(|| FreeError::Numeric("hopping matrix eigendecomposition did not converge".into()))?;
        let w = eig.eigenvectors;
        // (W^T C0 W)_kl = Σ_{i<M} W_ik W_il
        let wa = w.rows(0, params.m);
        let q = wa.transpose() * wa;
        Ok(Self {
            params: *params,
            energies: eig.eigenvalues,
            modes: w.map(|x| Complex64::new(x, 0.0)),
            initial_in_modes: q.map(|x| Complex64::new(x, 0.0)),
        })
    }

    pub fn params(&self) -> &ModelParams<f64> {
        &self.params
    }

    /// `C(t) = W diag(e^{iEt}) Q diag(e^{−iEt}) W^T`.
    pub fn correlations_at(&self, t: f64) -> CorrelationMatrix {
        let phases: Vec<Complex64> = self.energies.iter().map(|&e| Complex64::from_polar(1.0, e * t)).collect();
        let mut x = self.initial_in_modes.clone();
        let n = x.nrows();
        for l in 0..n {
            for k in 0..n {
                x[(k, l)] *= phases[k] * phases[l].conj();
            }
        }
        CorrelationMatrix(&self.modes * x * self.modes.transpose())
    }

    /// The `M × M` system block of `C(t)` alone, `(W_A P) Q (W_A P)†` with
    /// `P = diag(e^{iEt})`. This is all a record needs.
    pub fn system_block_at(&self, t: f64) -> CorrelationMatrix {
        let m = self.params.m;
        let phases: Vec<Complex64> = self.energies.iter().map(|&e| Complex64::from_polar(1.0, e * t)).collect();
        let y = DMatrix::from_fn(m, phases.len(), |i, k| self.modes[(i, k)] * phases[k]);
        CorrelationMatrix(&y * &self.initial_in_modes * y.adjoint())
    }

    pub fn record(
        &self,
        step: usize,
        time: f64,
        c: &CorrelationMatrix,
        orders: &[RenyiOrder],
        topk: usize,
    ) -> Result<EntanglementRecord<f64>, FreeError> {
        let m = self.params.m;
        let nu = c.mode_occupations(m);
        let entropies = entropies_from_modes(&nu, orders);
        let k = topk.min(if m < 63 { 1usize << m } else { usize::MAX });
        let levels = schmidt_topk_from_modes(&nu, k)?;
        let (m_t, decayed) = particle_count(c, m);
        Ok(EntanglementRecord {
            step,
            time,
            m: m_t,
            decayed_fraction: decayed,
            s_vn: entropies.s_vn,
            renyi: entropies.renyi,
            s_min: entropies.s_min,
            levels,
            // a product of per-mode distributions always sums to one
            schmidt_total: 1.0,
        })
    }

    /// Evolve over the grid, handing each record to `sink` in time order.
    pub fn run_with<F>(
        &self,
        grid: &QuenchGrid<f64>,
        orders: &[RenyiOrder],
        topk: usize,
        mut sink: F,
    ) -> Result<(), FreeError>
    where
        F: FnMut(EntanglementRecord<f64>),
    {
        for k in 0..=grid.steps {
            let t = grid.time(k);
            let c = self.system_block_at(t);
            sink(self.record(k, t, &c, orders, topk)?);
        }
        Ok(())
    }

    pub fn run(
        &self,
        grid: &QuenchGrid<f64>,
        orders: &[RenyiOrder],
        topk: usize,
    ) -> Result<Vec<EntanglementRecord<f64>>, FreeError> {
        let mut out = Vec::with_capacity(grid.len());
        self.run_with(grid, orders, topk, |r| out.push(r))?;
        Ok(out)
    }
}

/// Correlation matrices on every grid point.
pub fn evolve_correlations(
    params: &ModelParams<f64>,
    grid: &QuenchGrid<f64>,
) -> Result<Vec<CorrelationMatrix>, FreeError> {
    let engine = FreeEngine::new(params)?;
    Ok(grid.times().map(|t| engine.correlations_at(t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_params;
    use approx::assert_abs_diff_eq;

    fn params(m: usize, n: usize, g: f64) -> ModelParams<f64> {
        ModelParams::new(m, n, 0.0, 1.0, 1.0, g).unwrap()
    }

    #[test]
    fn hopping_matrix_shape() {
        let h = hopping_matrix(&ModelParams::new(2, 3, 0.0, 1.0, 0.8, 0.3).unwrap());
        assert_eq!(h, h.transpose());
        assert_eq!(h[(0, 1)], -1.0);
        assert_eq!(h[(1, 2)], -0.3);
        assert_eq!(h[(2, 3)], -0.8);
        assert_eq!(h[(0, 2)], 0.0);
        assert!(h.diagonal().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn refuses_interacting_model() {
        let p = ModelParams::new(3, 5, 0.4, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(FreeEngine::new(&p).unwrap_err(), FreeError::Unsupported(0.4));
    }

    #[test]
    fn initial_correlations_are_the_product_state() {
        let p = params(3, 7, 0.5);
        let engine = FreeEngine::new(&p).unwrap();
        let c = engine.correlations_at(0.0);
        let c0 = CorrelationMatrix::initial(&p);
        for (a, b) in c.0.iter().zip(c0.0.iter()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
        let rec = engine.record(0, 0.0, &c, &[RenyiOrder::Finite(2.0)], 4).unwrap();
        assert_abs_diff_eq!(rec.m, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.decayed_fraction, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.s_vn, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rec.s_min, 0.0, epsilon = 1e-12);
        assert_eq!(rec.levels[0].sector, 3);
    }

    #[test]
    fn decoupled_environment_keeps_particles() {
        let p = params(4, 6, 0.0);
        let engine = FreeEngine::new(&p).unwrap();
        for t in [0.7, 3.3, 11.0] {
            let c = engine.correlations_at(t);
            assert_abs_diff_eq!(c.particle_count(4), 4.0, epsilon = 1e-12);
            for i in 0..4 {
                for j in 4..10 {
                    assert!(c.0[(i, j)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn invariants_along_trajectory() {
        let (p, grid) = build_params(5, 20, 0.0, 1.0, 1.0, 0.5, 0.1, 10.0).unwrap();
        for c in evolve_correlations(&p, &grid).unwrap() {
            assert!((c.trace() - 5.0).abs() < 1e-9);
            assert!(c.hermiticity_defect() < 1e-10);
            let ev = c.block_eigenvalues(0..c.dim());
            assert!(ev.iter().all(|&x| x > -1e-10 && x < 1.0 + 1e-10));
            let sys = entropies_from_modes(&c.mode_occupations(5), &[RenyiOrder::Finite(2.0)]);
            let env = entropies_from_modes(&c.environment_occupations(5), &[RenyiOrder::Finite(2.0)]);
            assert!((sys.s_vn - env.s_vn).abs() < 1e-8);
            assert!((sys.s_min - env.s_min).abs() < 1e-8);
            assert!((sys.renyi[0].1 - env.renyi[0].1).abs() < 1e-8);
        }
    }

    #[test]
    fn system_block_matches_full_matrix() {
        let engine = FreeEngine::new(&params(4, 11, 0.5)).unwrap();
        for t in [0.0, 0.7, 3.3] {
            let full = engine.correlations_at(t);
            let block = engine.system_block_at(t);
            for i in 0..4 {
                for j in 0..4 {
                    assert!((full.0[(i, j)] - block.0[(i, j)]).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn schmidt_top_value_matches_min_entropy() {
        let (p, grid) = build_params(4, 16, 0.0, 1.0, 1.0, 0.5, 0.25, 8.0).unwrap();
        let recs = FreeEngine::new(&p).unwrap().run(&grid, &[], 4).unwrap();
        assert_eq!(recs.len(), grid.len());
        for r in recs {
            assert!((-r.levels[0].lambda.ln() - r.s_min).abs() < 1e-12);
            assert_eq!(r.levels.len(), 4);
        }
    }

    #[test]
    fn particles_leave_before_reflection() {
        let (p, grid) = build_params(5, 45, 0.0, 1.0, 1.0, 0.5, 0.02, 20.0).unwrap();
        let recs = FreeEngine::new(&p).unwrap().run(&grid, &[], 2).unwrap();
        let t_ref = p.reflection_time();
        for w in recs.windows(2) {
            if w[1].time < t_ref {
                assert!(w[1].m - w[0].m <= 1e-6, "m increased at t = {}", w[1].time);
            }
        }
        assert!(recs.last().unwrap().m < 4.0);
    }
}
