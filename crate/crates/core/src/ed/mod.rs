//! Exact many-body dynamics in the fixed-particle-number sector.
//!
//! The global state lives on the `C(L, M)` configurations with `M`
//! particles. Each time step applies a Lanczos approximation of
//! `exp(−i H dt)` using the matrix-free Hamiltonian; after every step the
//! system reduced density matrix is accumulated block by block and
//! diagonalised to produce an [`EntanglementRecord`].

pub mod basis;
pub mod checkpoint;
pub mod hamiltonian;
pub mod krylov;
pub mod rdm;
pub mod vector;

use num_complex::Complex64;
use thiserror::Error;

pub use basis::{binomial, SectorBasis, DEFAULT_CAPACITY};
pub use checkpoint::Checkpoint;
pub use hamiltonian::{apply_hamiltonian, Hamiltonian};
pub use krylov::{krylov_step, KrylovConfig, StepReport};
pub use rdm::{reduced_density_matrix, spectrum_and_entropies, ReducedDensityMatrix};

use crate::model::{InitialState, ModelParams, QuenchGrid};
use crate::spectrum::{EntanglementRecord, RenyiOrder};

#[derive(Debug, Error)]
pub enum EdError {
    #[error("sector dimension C({l}, {m}) = {dim} exceeds the capacity of {capacity} states")]
    Capacity { l: usize, m: usize, dim: u128, capacity: usize },
    #[error("unsupported geometry: {m} particles on {l} sites (at most 64 sites)")]
    Geometry { l: usize, m: usize },
    #[error(
        "Krylov step dt = {dt} not converged with {subspace_dim} vectors (residual {estimate:e}); reduce dt"
    )]
    StepSize { dt: f64, subspace_dim: usize, estimate: f64 },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdConfig {
    pub capacity: usize,
    pub krylov: KrylovConfig,
}

impl Default for EdConfig {
    fn default() -> Self {
        Self { capacity: DEFAULT_CAPACITY, krylov: KrylovConfig::default() }
    }
}

/// The evolving global state.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    pub amplitudes: Vec<Complex64>,
    pub step: usize,
}

impl SectorState {
    pub fn norm(&self) -> f64 {
        vector::norm(&self.amplitudes)
    }
}

/// Largest step diagnostics seen over a trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrajectoryStats {
    pub max_subspace_dim: usize,
    pub max_norm_defect: f64,
    pub max_error_estimate: f64,
}

impl TrajectoryStats {
    fn absorb(&mut self, r: &StepReport) {
        self.max_subspace_dim = self.max_subspace_dim.max(r.subspace_dim);
        self.max_norm_defect = self.max_norm_defect.max(r.norm_defect);
        self.max_error_estimate = self.max_error_estimate.max(r.error_estimate);
    }
}

#[derive(Debug, Clone)]
pub struct EdEngine {
    params: ModelParams<f64>,
    basis: SectorBasis,
    hamiltonian: Hamiltonian,
    config: EdConfig,
}

impl EdEngine {
    pub fn new(params: &ModelParams<f64>, config: EdConfig) -> Result<Self, EdError> {
        let basis = SectorBasis::with_capacity(params.l(), params.m, config.capacity)?;
        let hamiltonian = Hamiltonian::new(params, &basis);
        Ok(Self { params: *params, basis, hamiltonian, config })
    }

    pub fn params(&self) -> &ModelParams<f64> {
        &self.params
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn initial_state(&self) -> SectorState {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.basis.dim()];
        let filled = InitialState::for_params(&self.params).bits();
        amplitudes[self.basis.rank(filled)] = Complex64::new(1.0, 0.0);
        SectorState { amplitudes, step: 0 }
    }

    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        self.hamiltonian.apply(&self.basis, psi, out);
    }

    pub fn energy(&self, state: &SectorState) -> f64 {
        self.hamiltonian.expectation(&self.basis, &state.amplitudes)
    }

    pub fn step(&self, state: &mut SectorState, dt: f64) -> Result<StepReport, EdError> {
        let report = krylov_step(|x, out| self.apply(x, out), &mut state.amplitudes, dt, &self.config.krylov)?;
        state.step += 1;
        Ok(report)
    }

    pub fn reduced_density_matrix(&self, state: &SectorState) -> ReducedDensityMatrix {
        reduced_density_matrix(&state.amplitudes, &self.basis, self.params.m)
    }

    pub fn record(
        &self,
        state: &SectorState,
        time: f64,
        orders: &[RenyiOrder],
        topk: usize,
    ) -> Result<EntanglementRecord<f64>, EdError> {
        let rho = self.reduced_density_matrix(state);
        let particles = rdm::system_particle_number(&state.amplitudes, &self.basis, self.params.m);
        spectrum_and_entropies(&rho, orders, topk, state.step, time, particles, self.params.m)
    }

    /// Propagate `state` to the end of `grid`, emitting a record for the
    /// current grid point and every later one.
    pub fn continue_with<F>(
        &self,
        state: &mut SectorState,
        grid: &QuenchGrid<f64>,
        orders: &[RenyiOrder],
        topk: usize,
        mut sink: F,
    ) -> Result<TrajectoryStats, EdError>
    where
        F: FnMut(&SectorState, EntanglementRecord<f64>) -> Result<(), EdError>,
    {
        let mut stats = TrajectoryStats::default();
        let rec = self.record(state, grid.time(state.step), orders, topk)?;
        sink(state, rec)?;
        while state.step < grid.steps {
            stats.absorb(&self.step(state, grid.dt)?);
            let rec = self.record(state, grid.time(state.step), orders, topk)?;
            sink(state, rec)?;
        }
        Ok(stats)
    }

    pub fn run(
        &self,
        grid: &QuenchGrid<f64>,
        orders: &[RenyiOrder],
        topk: usize,
    ) -> Result<(Vec<EntanglementRecord<f64>>, TrajectoryStats), EdError> {
        let mut state = self.initial_state();
        let mut out = Vec::with_capacity(grid.len());
        let stats = self.continue_with(&mut state, grid, orders, topk, |_, r| {
            out.push(r);
            Ok(())
        })?;
        Ok((out, stats))
    }

    pub fn checkpoint(&self, state: &SectorState, dt: f64) -> Checkpoint {
        Checkpoint {
            sites: self.params.l(),
            particles: self.params.m,
            step: state.step,
            dt,
            amplitudes: state.amplitudes.clone(),
        }
    }

    /// Rebuild a state from a checkpoint written for this chain.
    pub fn restore(&self, cp: Checkpoint, dt: f64) -> Result<SectorState, EdError> {
        if cp.sites != self.params.l() || cp.particles != self.params.m {
            return Err(EdError::Checkpoint(format!(
                "written for L = {}, M = {} but the model has L = {}, M = {}",
                cp.sites,
                cp.particles,
                self.params.l(),
                self.params.m
            )));
        }
        if cp.dt != dt {
            return Err(EdError::Checkpoint(format!("written with dt = {} but the grid uses dt = {dt}", cp.dt)));
        }
        if cp.amplitudes.len() != self.basis.dim() {
            return Err(EdError::Checkpoint("amplitude count does not match the sector dimension".into()));
        }
        Ok(SectorState { amplitudes: cp.amplitudes, step: cp.step })
    }
}
