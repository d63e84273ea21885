//! Page time: the maximum of the von Neumann entropy.

use super::AnalysisError;
use crate::scalar::Real;
use crate::spectrum::EntanglementRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct PageTimeResult<T> {
    pub t_page: T,
    /// `S_vN(t_Page)` from the parabola through the three samples around
    /// the maximum.
    pub peak: T,
    /// `peak / M`.
    pub peak_density: T,
    /// Index of the largest sample.
    pub index: usize,
    /// The maximum sits on the first or last sample, so the true peak may
    /// lie outside the simulated window.
    pub at_boundary: bool,
}

/// Argmax of `values` refined by the vertex of the parabola through the
/// neighbouring samples. `times` must be uniformly spaced around the
/// maximum.
pub fn detect_page_time_series<T: Real>(times: &[T], values: &[T], m: T) -> Result<PageTimeResult<T>, AnalysisError> {
    let n = times.len();
    if n == 0 || values.len() != n {
        return Err(AnalysisError::Input(format!("{n} times but {} entropy values", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::Input("non-finite entropy value".into()));
    }
    let mut k = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[k] {
            k = i;
        }
    }
    let at_boundary = k == 0 || k == n - 1;
    let (t_page, peak) = if at_boundary {
        (times[k], values[k])
    } else {
        let (a, b, c) = (values[k - 1], values[k], values[k + 1]);
        let curv = a - T::lit(2.0) * b + c;
        if curv < T::zero() {
            let dt = times[k + 1] - times[k];
            let shift = (a - c) / (T::lit(2.0) * curv);
            (times[k] + dt * shift, b - (a - c) * shift / T::lit(4.0))
        } else {
            (times[k], b)
        }
    };
    Ok(PageTimeResult { t_page, peak, peak_density: peak / m, index: k, at_boundary })
}

/// Page time of an engine trajectory.
pub fn detect_page_time<T: Real>(records: &[EntanglementRecord<T>], m: usize) -> Result<PageTimeResult<T>, AnalysisError> {
    let times: Vec<T> = records.iter().map(|r| r.time).collect();
    let s: Vec<T> = records.iter().map(|r| r.s_vn).collect();
    detect_page_time_series(&times, &s, T::from_usize_lossy(m))
}
