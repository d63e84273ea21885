//! Order-parameter exponent: `y(t) = A (t − t_c)^β` just after the kink.

use super::regression::ols;
use super::AnalysisError;
use crate::scalar::Real;
use crate::spectrum::EntanglementRecord;

/// Fewest samples accepted inside the fit window.
pub const MIN_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct BetaFit<T> {
    pub beta: T,
    pub amplitude: T,
    pub t_c: T,
    /// The fit uses samples with `t_c < t ≤ t_c + window`.
    pub window: T,
    pub points: usize,
    /// Root-mean-square residual of the log-log fit.
    pub residual: T,
    pub r_squared: T,
}

/// OLS of `ln y` against `ln(t − t_c)` over `(t_c, t_c + window]`.
pub fn fit_beta<T: Real>(times: &[T], values: &[T], t_c: T, window: T) -> Result<BetaFit<T>, AnalysisError> {
    if times.len() != values.len() {
        return Err(AnalysisError::Input(format!("{} times but {} values", times.len(), values.len())));
    }
    if !(window > T::zero()) {
        return Err(AnalysisError::Input(format!("fit window must be positive, got {window}")));
    }
    let mut pts = Vec::new();
    for (&t, &y) in times.iter().zip(values) {
        if t <= t_c || t > t_c + window {
            continue;
        }
        if !(y > T::zero()) {
            return Err(AnalysisError::Domain(format!("order parameter {y} at t = {t} is not positive")));
        }
        pts.push(((t - t_c).ln(), y.ln()));
    }
    if pts.len() < MIN_POINTS {
        return Err(AnalysisError::Fit(format!(
            "{} samples in ({t_c}, {}], need at least {MIN_POINTS}",
            pts.len(),
            t_c + window
        )));
    }
    let x: Vec<T> = pts.iter().map(|p| p.0).collect();
    let y: Vec<T> = pts.iter().map(|p| p.1).collect();
    let fit = ols(&x, &y)?;
    let n = T::from_usize_lossy(pts.len());
    let rss = fit.residuals().iter().fold(T::zero(), |acc, &r| acc + r * r);
    Ok(BetaFit {
        beta: fit.slope,
        amplitude: fit.intercept.exp(),
        t_c,
        window,
        points: pts.len(),
        residual: (rss / n).sqrt(),
        r_squared: fit.r_squared,
    })
}

/// Fit of the decayed fraction `1 − m/M` of a trajectory.
pub fn fit_beta_records<T: Real>(
    records: &[EntanglementRecord<T>],
    t_c: T,
    window: T,
) -> Result<BetaFit<T>, AnalysisError> {
    let times: Vec<T> = records.iter().map(|r| r.time).collect();
    let y: Vec<T> = records.iter().map(|r| r.decayed_fraction).collect();
    fit_beta(&times, &y, t_c, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn manufactured_power_law() {
        let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.02).collect();
        let y: Vec<f64> = times.iter().map(|&t| if t > 2.0 { 0.4 * (t - 2.0).sqrt() } else { 0.0 }).collect();
        let f = fit_beta(&times, &y, 2.0, 0.5).unwrap();
        assert!((f.beta - 0.5).abs() < 1e-6);
        assert!((f.amplitude - 0.4).abs() < 1e-6);
        assert_eq!(f.points, 25);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let times = [2.1, 2.2, 2.3, 2.4];
        let y = [0.1, 0.2, 0.3, 0.4];
        assert!(matches!(fit_beta(&times, &y, 2.0, 1.0), Err(AnalysisError::Fit(_))));
    }

    #[test]
    fn nonpositive_values_are_a_domain_error() {
        let times: Vec<f64> = (1..10).map(|k| k as f64 * 0.1).collect();
        let mut y = vec![0.5; 9];
        y[3] = 0.0;
        assert!(matches!(fit_beta(&times, &y, 0.0, 1.0), Err(AnalysisError::Domain(_))));
    }

    #[test]
    fn samples_before_t_c_ignored() {
        // negative values before t_c must not matter
        let times: Vec<f64> = (0..100).map(|k| k as f64 * 0.05).collect();
        let y: Vec<f64> = times.iter().map(|&t| if t > 1.0 { 2.0 * (t - 1.0).powf(0.7) } else { -1.0 }).collect();
        let f = fit_beta(&times, &y, 1.0, 1.0).unwrap();
        assert!((f.beta - 0.7).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn recovers_any_power_law(beta in 0.2f64..1.5, a in 0.05f64..3.0, t_c in 0.5f64..5.0) {
            let times: Vec<f64> = (0..400).map(|k| k as f64 * 0.02).collect();
            let y: Vec<f64> = times.iter().map(|&t| if t > t_c { a * (t - t_c).powf(beta) } else { 0.0 }).collect();
            let f = fit_beta(&times, &y, t_c, 0.5).unwrap();
            prop_assert!((f.beta - beta).abs() < 1e-8);
            prop_assert!((f.amplitude / a - 1.0).abs() < 1e-8);
        }
    }
}
