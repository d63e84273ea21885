//! Chain geometry, couplings, the initial product state and the time grid.
//!
//! Sites are numbered `0..L` in chain order; `0..M` is the system and
//! `M..L` the environment. Boundaries are open.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::Invalid { field, reason: reason.into() }
}

/// Couplings and sizes of the chain Hamiltonian.
///
/// `H = V Σ_{i<M-1} n_i n_{i+1} − t_s Σ_{system bonds} (c†c + h.c.)
///      − g (c†_{M-1} c_M + h.c.) − t_e Σ_{environment bonds} (c†c + h.c.)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// System sites.
    pub m: usize,
    /// Environment sites.
    pub n: usize,
    /// Nearest-neighbour interaction inside the system.
    pub v: T,
    pub t_s: T,
    pub t_e: T,
    /// System–environment tunnelling.
    pub g: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(m: usize, n: usize, v: T, t_s: T, t_e: T, g: T) -> Result<Self, ModelError> {
        if m == 0 {
            return Err(invalid("M", "must be >= 1"));
        }
        if n == 0 {
            return Err(invalid("N", "must be >= 1"));
        }
        for (field, x) in [("V", v), ("t_s", t_s), ("t_e", t_e), ("g", g)] {
            if !x.is_finite() {
                return Err(invalid(field, format!("must be finite, got {x}")));
            }
        }
        Ok(Self { m, n, v, t_s, t_e, g })
    }

    /// Total number of sites `L = M + N`.
    pub fn l(&self) -> usize {
        self.m + self.n
    }

    /// Hopping amplitude magnitude on the bond `(site, site + 1)`.
    pub fn bond_hopping(&self, site: usize) -> T {
        debug_assert!(site + 1 < self.l());
        if site + 1 < self.m {
            self.t_s
        } else if site + 1 == self.m {
            self.g
        } else {
            self.t_e
        }
    }

    pub fn is_free(&self) -> bool {
        self.v == T::zero()
    }

    /// Rough time before particles emitted at the contact return from the
    /// far edge: `N / (2 t_e)`. Heuristic only.
    pub fn reflection_time(&self) -> T {
        T::from_usize_lossy(self.n) / (T::lit(2.0) * self.t_e.abs())
    }
}

/// Uniform time grid `t_k = k·dt`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchGrid<T> {
    pub dt: T,
    pub t_max: T,
    pub steps: usize,
}

impl<T: Real> QuenchGrid<T> {
    pub fn new(dt: T, t_max: T) -> Result<Self, ModelError> {
        if !dt.is_finite() || dt <= T::zero() {
            return Err(invalid("dt", format!("must be finite and > 0, got {dt}")));
        }
        if !t_max.is_finite() || t_max < dt {
            return Err(invalid("t_max", format!("must be finite and >= dt, got {t_max}")));
        }
        let steps = (t_max / dt)
            .round()
            .to_usize()
            .ok_or_else(|| invalid("t_max", "step count overflows"))?;
        Ok(Self { dt, t_max, steps })
    }

    /// Time of grid point `k`, computed from the index (no accumulation).
    pub fn time(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.dt
    }

    /// Number of grid points including `t = 0`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..=self.steps).map(move |k| self.time(k))
    }
}

/// Validate and bundle couplings and the time grid.
#[allow(clippy::too_many_arguments)]
pub fn build_params<T: Real>(
    m: usize,
    n: usize,
    v: T,
    t_s: T,
    t_e: T,
    g: T,
    dt: T,
    t_max: T,
) -> Result<(ModelParams<T>, QuenchGrid<T>), ModelError> {
    Ok((ModelParams::new(m, n, v, t_s, t_e, g)?, QuenchGrid::new(dt, t_max)?))
}

/// Filled system, empty environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitialState {
    pub m: usize,
    pub l: usize,
}

impl InitialState {
    pub fn for_params<T: Real>(params: &ModelParams<T>) -> Self {
        Self { m: params.m, l: params.l() }
    }

    pub fn is_occupied(&self, site: usize) -> bool {
        site < self.m
    }

    pub fn occupations(&self) -> Vec<bool> {
        (0..self.l).map(|i| self.is_occupied(i)).collect()
    }

    /// Occupation bit pattern, site `i` on bit `i`.
    pub fn bits(&self) -> u64 {
        assert!(self.l <= 64, "bit patterns hold at most 64 sites");
        if self.m == 64 {
            u64::MAX
        } else {
            (1u64 << self.m) - 1
        }
    }

    pub fn particle_number(&self) -> usize {
        self.m
    }
}
