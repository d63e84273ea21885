//! Exact simulation of the system–environment quench of a spinless-fermion
//! chain and the entanglement analysis built on top of it.
//!
//! The chain has `M` interacting system sites (nearest-neighbour repulsion
//! `V`, hopping `t_s`) tunnel-coupled with amplitude `g` to `N` free
//! environment sites (hopping `t_e`). The system starts completely filled,
//! the environment empty. Two exact engines propagate the state:
//!
//! * [`free`]: one-body correlation matrix propagation, `V = 0` only, any `L`.
//! * [`ed`]: matrix-free sector-restricted many-body propagation with a
//!   Lanczos exponential, any `V`, limited by the sector dimension `C(L, M)`.
//!
//! Both produce [`EntanglementRecord`]s which [`analysis`] turns into
//! Schmidt-level crossings, Page times, scaling exponents and
//! thermodynamic-limit extrapolations. [`io`] holds the configuration format,
//! CSV schema, sweep orchestration and plot-script generation.
//!
//! Post-processing is generic over the [`Real`] scalar; the engines work in
//! `f64`. The aliases below fix the scalar to `f64` for everyday use.

pub mod analysis;
pub mod ed;
pub mod free;
pub mod io;
pub mod model;
pub mod scalar;
pub mod spectrum;

pub use model::{build_params, InitialState, ModelError, ModelParams, QuenchGrid};
pub use scalar::Real;
pub use spectrum::{EntanglementRecord, RenyiOrder, SchmidtLevel};

pub type Params = ModelParams<f64>;
pub type Grid = QuenchGrid<f64>;
pub type Record = EntanglementRecord<f64>;
pub type Level = SchmidtLevel<f64>;
pub type Regression = analysis::RegressionResult<f64>;
pub type Collapse = analysis::ScalingFit<f64>;
pub type Beta = analysis::BetaFit<f64>;
pub type Kink = analysis::KinkEvent<f64>;
pub type PageTime = analysis::PageTimeResult<f64>;
