//! Ordinary least squares with textbook standard errors.

use super::AnalysisError;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult<T> {
    pub intercept: T,
    pub intercept_stderr: T,
    pub slope: T,
    pub slope_stderr: T,
    pub r_squared: T,
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Real> RegressionResult<T> {
    pub fn predict(&self, x: T) -> T {
        self.intercept + self.slope * x
    }

    pub fn residuals(&self) -> Vec<T> {
        self.x.iter().zip(&self.y).map(|(&x, &y)| y - self.predict(x)).collect()
    }
}

/// Fit `y = intercept + slope · x`. Needs at least three points and
/// non-degenerate `x`.
pub fn ols<T: Real>(x: &[T], y: &[T]) -> Result<RegressionResult<T>, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::Input(format!("{} x values but {} y values", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(AnalysisError::Input(format!("regression needs at least 3 points, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AnalysisError::Input("non-finite regression data".into()));
    }
    let nf = T::from_usize_lossy(n);
    let mean = |v: &[T]| v.iter().fold(T::zero(), |a, &b| a + b) / nf;
    let (mx, my) = (mean(x), mean(y));
    let sxx = x.iter().fold(T::zero(), |a, &xi| a + (xi - mx) * (xi - mx));
    let sxy = x.iter().zip(y).fold(T::zero(), |a, (&xi, &yi)| a + (xi - mx) * (yi - my));
    let syy = y.iter().fold(T::zero(), |a, &yi| a + (yi - my) * (yi - my));
    let scale = x.iter().fold(T::zero(), |a, &xi| a.max(xi.abs())).max(T::min_positive_value());
    if sxx <= nf * (scale * T::epsilon() * T::lit(16.0)).powi(2) {
        return Err(AnalysisError::Input("x values are degenerate (collinear)".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = x
        .iter()
        .zip(y)
        .fold(T::zero(), |a, (&xi, &yi)| a + (yi - intercept - slope * xi).powi(2));
    let dof = T::from_usize_lossy(n - 2);
    let s2 = ssr / dof;
    let slope_stderr = (s2 / sxx).sqrt();
    let intercept_stderr = (s2 * (T::one() / nf + mx * mx / sxx)).sqrt();
    let r_squared = if syy > T::zero() { T::one() - ssr / syy } else { T::one() };
    Ok(RegressionResult { intercept, intercept_stderr, slope, slope_stderr, r_squared, x: x.to_vec(), y: y.to_vec() })
}

/// Regression against `x = 1/M`; the intercept is the thermodynamic-limit
/// extrapolation.
pub fn regress_to_tl<T: Real>(points: &[(T, T)]) -> Result<RegressionResult<T>, AnalysisError> {
    let (x, y): (Vec<T>, Vec<T>) = points.iter().copied().unzip();
    ols(&x, &y)
}
