//! Finite-size scaling collapse near the first kink.
//!
//! Time is measured in units of the system size, `τ = t/M`. With
//! `τ_c ∼ M^{−1/c}` the rescaled curves
//!
//! ```text
//! x = (τ − τ_c) M^{1/c},   (1 − m/M) M^{b/c},   (S_min/M) M^a
//! ```
//!
//! should coincide for all `M`. `c` comes from a log-log regression of
//! `τ_c` against `M`; `b` and `a` minimise a collapse cost one at a time.

use super::regression::{ols, RegressionResult};
use super::AnalysisError;
use crate::scalar::Real;

/// Samples of one system size around its kink.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseSeries<T> {
    pub m: usize,
    pub t_c: T,
    pub times: Vec<T>,
    /// Decayed fraction `1 − m(t)/M`.
    pub order: Vec<T>,
    pub s_min: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseConfig<T> {
    /// Samples with `|t − t_c| ≤ neighborhood` (raw time) enter the cost.
    pub neighborhood: T,
    /// Points on the common abscissa.
    pub grid_points: usize,
    /// Search interval for `a` and `b`.
    pub bracket: (T, T),
    pub tolerance: T,
}

impl<T: Real> Default for CollapseConfig<T> {
    fn default() -> Self {
        Self { neighborhood: T::lit(0.5), grid_points: 201, bracket: (T::lit(-2.0), T::lit(4.0)), tolerance: T::lit(1e-6) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    /// Collapse cost of the order parameter at `b` and of `S_min` at `a`.
    pub cost_b: T,
    pub cost_a: T,
    /// The same costs without rescaling the vertical axis.
    pub baseline_b: T,
    pub baseline_a: T,
    /// Regression of `ln τ_c` on `ln M`.
    pub c_fit: RegressionResult<T>,
    pub sizes: Vec<usize>,
}

impl<T: Real> ScalingFit<T> {
    pub fn cost(&self) -> T {
        self.cost_a + self.cost_b
    }
}

/// Minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_min<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / T::lit(2.0);
    (x, f(x))
}

/// Linear interpolation of ascending `(xs, ys)` at `x`.
fn interpolate<T: Real>(xs: &[T], ys: &[T], x: T) -> T {
    let k = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    if x1 == x0 {
        return ys[k];
    }
    ys[k - 1] + (ys[k] - ys[k - 1]) * (x - x0) / (x1 - x0)
}

fn median<T: Real>(v: &mut [T]) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

/// Spread of rescaled curves `(x_i, y_i · scale_i)` around their pointwise
/// median on the overlap of their abscissae: `Σ (y − med)² / Σ med²` over
/// the grid, so a common factor on every curve leaves the cost unchanged.
pub fn collapse_cost<T: Real>(curves: &[(Vec<T>, Vec<T>)], scales: &[T], grid_points: usize) -> Result<T, AnalysisError> {
    if curves.len() < 2 || curves.len() != scales.len() {
        return Err(AnalysisError::Input("collapse needs at least two curves with one scale each".into()));
    }
    if curves.iter().any(|(x, y)| x.len() < 2 || x.len() != y.len()) {
        return Err(AnalysisError::Input("every curve needs at least two samples".into()));
    }
    let lo = curves.iter().map(|(x, _)| x[0]).fold(T::neg_infinity(), T::max);
    let hi = curves.iter().map(|(x, _)| x[x.len() - 1]).fold(T::infinity(), T::min);
    if !(hi > lo) {
        return Err(AnalysisError::Fit("rescaled curves do not overlap".into()));
    }
    let n = grid_points.max(2);
    let (mut num, mut den) = (T::zero(), T::zero());
    let mut column = vec![T::zero(); curves.len()];
    for g in 0..n {
        let x = lo + (hi - lo) * T::from_usize_lossy(g) / T::from_usize_lossy(n - 1);
        for (slot, ((xs, ys), &s)) in column.iter_mut().zip(curves.iter().zip(scales)) {
            *slot = interpolate(xs, ys, x) * s;
        }
        let values = column.clone();
        let med = median(&mut column);
        num = num + values.iter().fold(T::zero(), |acc, &v| acc + (v - med) * (v - med));
        den = den + med * med * T::from_usize_lossy(values.len());
    }
    if !(den > T::zero()) {
        return Err(AnalysisError::Fit("collapsed curves vanish on the overlap".into()));
    }
    Ok(num / den)
}

/// Exponent minimising `cost`: coarse scan of the bracket, then golden
/// section around the best scan point.
fn minimise<T: Real, F: Fn(T) -> Result<T, AnalysisError>>(
    cost: F,
    bracket: (T, T),
    tol: T,
) -> Result<(T, T), AnalysisError> {
    let scan = 60usize;
    let step = (bracket.1 - bracket.0) / T::from_usize_lossy(scan);
    let mut best = (bracket.0, cost(bracket.0)?);
    for i in 1..=scan {
        let e = bracket.0 + step * T::from_usize_lossy(i);
        let v = cost(e)?;
        if v < best.1 {
            best = (e, v);
        }
    }
    let lo = (best.0 - step).max(bracket.0);
    let hi = (best.0 + step).min(bracket.1);
    let (x, fx) = golden_section_min(|e| cost(e).unwrap_or(T::infinity()), lo, hi, tol);
    Ok(if fx <= best.1 { (x, fx) } else { best })
}

/// Fit `(a, b, c)` from the first-kink neighbourhoods of at least three
/// system sizes.
pub fn fit_collapse<T: Real>(series: &[CollapseSeries<T>], config: &CollapseConfig<T>) -> Result<ScalingFit<T>, AnalysisError> {
    let mut sizes: Vec<usize> = series.iter().map(|s| s.m).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 || sizes.len() != series.len() {
        return Err(AnalysisError::Input(format!("collapse needs at least 3 distinct system sizes, got {:?}", sizes)));
    }
    for s in series {
        if s.times.len() != s.order.len() || s.times.len() != s.s_min.len() {
            return Err(AnalysisError::Input(format!("ragged series for M = {}", s.m)));
        }
        if !(s.t_c > T::zero()) {
            return Err(AnalysisError::Fit(format!("critical time {} for M = {} is not positive", s.t_c, s.m)));
        }
    }
    let ln_m: Vec<T> = series.iter().map(|s| T::from_usize_lossy(s.m).ln()).collect();
    let ln_tau: Vec<T> = series.iter().map(|s| (s.t_c / T::from_usize_lossy(s.m)).ln()).collect();
    let c_fit = ols(&ln_m, &ln_tau)?;
    if !(c_fit.slope < T::zero()) {
        return Err(AnalysisError::Fit(format!("τ_c does not decrease with M (slope {})", c_fit.slope)));
    }
    let c = -T::one() / c_fit.slope;

    // rescaled abscissa and raw ordinates within the neighbourhood
    let mut order_curves = Vec::new();
    let mut smin_curves = Vec::new();
    for s in series {
        let mf = T::from_usize_lossy(s.m);
        let stretch = mf.powf(T::one() / c) / mf;
        let mut x = Vec::new();
        let mut yo = Vec::new();
        let mut ys = Vec::new();
        for i in 0..s.times.len() {
            if (s.times[i] - s.t_c).abs() <= config.neighborhood {
                x.push((s.times[i] - s.t_c) * stretch);
                yo.push(s.order[i]);
                ys.push(s.s_min[i] / mf);
            }
        }
        if x.len() < 2 {
            return Err(AnalysisError::Fit(format!("fewer than 2 samples near t_c for M = {}", s.m)));
        }
        order_curves.push((x.clone(), yo));
        smin_curves.push((x, ys));
    }
    let ms: Vec<T> = series.iter().map(|s| T::from_usize_lossy(s.m)).collect();
    let cost_b = |b: T| {
        let scales: Vec<T> = ms.iter().map(|&m| m.powf(b / c)).collect();
        collapse_cost(&order_curves, &scales, config.grid_points)
    };
    let cost_a = |a: T| {
        let scales: Vec<T> = ms.iter().map(|&m| m.powf(a)).collect();
        collapse_cost(&smin_curves, &scales, config.grid_points)
    };
    let (b, best_b) = minimise(cost_b, config.bracket, config.tolerance)?;
    let (a, best_a) = minimise(cost_a, config.bracket, config.tolerance)?;
    Ok(ScalingFit {
        a,
        b,
        c,
        cost_b: best_b,
        cost_a: best_a,
        baseline_b: cost_b(T::zero())?,
        baseline_a: cost_a(T::zero())?,
        c_fit,
        sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Curves obeying the scaling forms exactly with exponents `(a, b, c)`
    /// and `τ_c = 2.3 M^{−1/c}`.
    fn manufactured(a: f64, b: f64, c: f64) -> Vec<CollapseSeries<f64>> {
        (3..=7)
            .map(|m| {
                let mf = m as f64;
                let tau_c = 2.3 * mf.powf(-1.0 / c);
                let t_c = tau_c * mf;
                let times: Vec<f64> = (0..400).map(|k| k as f64 * 0.02).collect();
                let x: Vec<f64> = times.iter().map(|&t| (t / mf - tau_c) * mf.powf(1.0 / c)).collect();
                let order = x.iter().map(|&x| (0.6 + 0.9 * x + 0.3 * x * x).max(0.01) * mf.powf(-b / c)).collect();
                let s_min = x.iter().map(|&x| mf * mf.powf(-a) * (0.7 + 0.4 * x - 0.2 * (3.0 * x).tanh())).collect();
                CollapseSeries { m, t_c, times, order, s_min }
            })
            .collect()
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section_min(|x: f64| (x - 0.37).powi(2) + 0.5 * (x - 0.37).powi(4), -2.0, 4.0, 1e-10);
        assert!((x - 0.37).abs() < 1e-8);
        assert!(fx < 1e-16);
    }

    #[test]
    fn recovers_unit_exponents() {
        let fit = fit_collapse(&manufactured(1.0, 1.0, 1.0), &CollapseConfig::default()).unwrap();
        assert!((fit.c - 1.0).abs() < 0.02, "{fit:?}");
        assert!((fit.b - 1.0).abs() < 0.02, "{fit:?}");
        assert!((fit.a - 1.0).abs() < 0.02, "{fit:?}");
        assert!(fit.cost_b < fit.baseline_b);
        assert!(fit.cost_a < fit.baseline_a);
        assert_eq!(fit.sizes, vec![3, 4, 5, 6, 7]);
    }

    #[test]
    fn recovers_other_exponents() {
        let fit = fit_collapse(&manufactured(0.8, 1.3, 1.2), &CollapseConfig::default()).unwrap();
        assert!((fit.c - 1.2).abs() < 0.02, "{fit:?}");
        assert!((fit.b - 1.3).abs() < 0.02, "{fit:?}");
        assert!((fit.a - 0.8).abs() < 0.02, "{fit:?}");
    }

    #[test]
    fn too_few_sizes() {
        let s = manufactured(1.0, 1.0, 1.0);
        assert!(matches!(fit_collapse(&s[..2], &CollapseConfig::default()), Err(AnalysisError::Input(_))));
    }

    #[test]
    fn degenerate_critical_times() {
        let mut s = manufactured(1.0, 1.0, 1.0);
        for x in s.iter_mut() {
            // τ_c growing with M
            x.t_c = x.m as f64 * x.m as f64;
        }
        assert!(matches!(fit_collapse(&s, &CollapseConfig::default()), Err(AnalysisError::Fit(_))));
    }

    #[test]
    fn cost_is_scale_invariant() {
        let curves = vec![
            (vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0]),
            (vec![0.0, 1.0, 2.0], vec![1.5, 2.5, 2.0]),
            (vec![0.5, 1.5, 2.5], vec![1.2, 2.2, 3.3]),
        ];
        let c1: f64 = collapse_cost(&curves, &[1.0, 1.0, 1.0], 50).unwrap();
        let c2 = collapse_cost(&curves, &[7.0, 7.0, 7.0], 50).unwrap();
        assert!((c1 - c2).abs() < 1e-12 * c1);
        let same = vec![curves[0].clone(), curves[0].clone()];
        assert_eq!(collapse_cost(&same, &[1.0, 1.0], 10).unwrap(), 0.0);
    }
}
