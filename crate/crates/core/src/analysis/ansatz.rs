use super::AnalysisError;
use crate::scalar::Real;

/// Two-Schmidt-value ansatz for strong interaction: the leading weights are
/// `(1−λ)²` (nothing emitted) and `λ²` (one particle emitted), so
/// `m = [M (1−λ)² + (M−1) λ²] / [(1−λ)² + λ²]`.
pub fn ansatz_particle_number<T: Real>(m: usize, lambda: T) -> T {
    let mf = T::from_usize_lossy(m);
    let stay = (T::one() - lambda).powi(2);
    let leave = lambda.powi(2);
    (mf * stay + (mf - T::one()) * leave) / (stay + leave)
}

/// Decayed fraction `1 − m/M` where the two ansatz Schmidt values cross
/// (`λ = 1/2`). Closed form `1/(2M)`.
pub fn ansatz_crossing<T: Real>(m: usize) -> Result<T, AnalysisError> {
    if m < 2 {
        return Err(AnalysisError::Range(format!("ansatz needs M >= 2, got {m}")));
    }
    Ok(T::one() / (T::lit(2.0) * T::from_usize_lossy(m)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(ansatz_crossing::<f64>(2).unwrap(), 0.25);
        assert_eq!(ansatz_crossing::<f64>(5).unwrap(), 0.1);
        assert_eq!(ansatz_crossing::<f64>(1_000_000).unwrap(), 5e-7);
        assert!(ansatz_crossing::<f64>(1).is_err());
    }

    #[test]
    fn crossing_agrees_with_parametric_form() {
        for m in [2usize, 7, 1000, 1_000_000] {
            let n = ansatz_particle_number(m, 0.5f64);
            let df = 1.0 - n / m as f64;
            assert!((df - ansatz_crossing::<f64>(m).unwrap()).abs() < 1e-15);
        }
        assert_eq!(ansatz_particle_number(4, 0.0f64), 4.0);
        assert_eq!(ansatz_particle_number(4, 1.0f64), 3.0);
    }

    #[test]
    fn vanishes_like_one_over_two_m() {
        let mut prev = 1.0f64;
        for m in [2usize, 10, 100, 10_000] {
            let c = ansatz_crossing::<f64>(m).unwrap();
            assert!(c < prev);
            assert!((c * 2.0 * m as f64 - 1.0).abs() < 1e-15);
            prev = c;
        }
    }
}
