//! Post-processing of entanglement time series.
//!
//! Everything here is a pure function of in-memory series and is generic
//! over the [`Real`](crate::Real) scalar.

mod ansatz;
mod beta;
mod collapse;
mod kinks;
mod page;
mod regression;

use thiserror::Error;

pub use ansatz::{ansatz_crossing, ansatz_particle_number};
pub use beta::{fit_beta, fit_beta_records, BetaFit};
pub use collapse::{collapse_cost, fit_collapse, golden_section_min, CollapseConfig, CollapseSeries, ScalingFit};
pub use kinks::{detect_kinks, first_kink, level_crossings, min_entropy_kinks, KinkEvent};
pub use page::{detect_page_time, detect_page_time_series, PageTimeResult};
pub use regression::{ols, regress_to_tl, RegressionResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("outside the domain of the fit: {0}")]
    Domain(String),
    #[error("out of range: {0}")]
    Range(String),
}
