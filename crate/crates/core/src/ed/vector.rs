//! Deterministic dense vector kernels over complex amplitudes.
//!
//! Reductions are split into fixed-size chunks whose partial sums are added
//! in chunk order, so results do not depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;

pub(crate) const CHUNK: usize = 1 << 14;

pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let partial = |(x, y): (&[Complex64], &[Complex64])| {
        x.iter().zip(y).fold(Complex64::new(0.0, 0.0), |acc, (u, v)| acc + u.conj() * v)
    };
    if a.len() <= CHUNK {
        return partial((a, b));
    }
    let parts: Vec<Complex64> = a.par_chunks(CHUNK).zip(b.par_chunks(CHUNK)).map(partial).collect();
    parts.into_iter().sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    let partial = |x: &[Complex64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if a.len() <= CHUNK {
        return partial(a);
    }
    let parts: Vec<f64> = a.par_chunks(CHUNK).map(partial).collect();
    parts.into_iter().sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    y.par_iter_mut().with_min_len(CHUNK).zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn scale(alpha: f64, x: &mut [Complex64]) {
    x.par_iter_mut().with_min_len(CHUNK).for_each(|xi| *xi *= alpha);
}
