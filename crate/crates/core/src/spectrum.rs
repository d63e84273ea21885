//! Schmidt spectra, Rényi entropies and the per-time-step record both
//! engines emit.
//!
//! The entanglement Hamiltonian `H_E = −ln ρ_s` has levels `ε_i = −ln λ_i`;
//! its ground level is the min-entropy.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectrumError {
    #[error("requested {k} Schmidt values but only {available} exist")]
    Range { k: usize, available: String },
    #[error("invalid Rényi order `{0}`")]
    BadOrder(String),
}

/// Rényi order `n`. `n = 1` is the von Neumann entropy, `n = ∞` the
/// min-entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenyiOrder {
    VonNeumann,
    Finite(f64),
    Min,
}

impl RenyiOrder {
    pub fn finite(n: f64) -> Result<Self, SpectrumError> {
        if !(n.is_finite() && n > 0.0) {
            return Err(SpectrumError::BadOrder(n.to_string()));
        }
        Ok(if n == 1.0 { Self::VonNeumann } else { Self::Finite(n) })
    }

    /// Parse a comma-separated list such as `1,2,inf`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>, SpectrumError> {
        let mut out: Vec<Self> = Vec::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let order: Self = tok.parse()?;
            if !out.contains(&order) {
                out.push(order);
            }
        }
        Ok(out)
    }

    /// Column label used in CSV output.
    pub fn label(&self) -> String {
        match self {
            Self::VonNeumann => "S_vN".to_string(),
            Self::Min => "S_min".to_string(),
            Self::Finite(n) => format!("S_{n}"),
        }
    }
}

impl FromStr for RenyiOrder {
    type Err = SpectrumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "min" => Ok(Self::Min),
            "vn" | "1" => Ok(Self::VonNeumann),
            other => other
                .parse::<f64>()
                .map_err(|_| SpectrumError::BadOrder(s.to_string()))
                .and_then(Self::finite),
        }
    }
}

impl fmt::Display for RenyiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::VonNeumann => write!(f, "1"),
            Self::Min => write!(f, "inf"),
            Self::Finite(n) => write!(f, "{n}"),
        }
    }
}

/// One Schmidt value with its entanglement-Hamiltonian level and the
/// system particle number of its eigenvector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtLevel<T> {
    pub lambda: T,
    pub epsilon: T,
    pub sector: usize,
}

impl<T: Real> SchmidtLevel<T> {
    pub fn new(lambda: T, sector: usize) -> Self {
        Self { lambda, epsilon: -lambda.ln(), sector }
    }
}

/// Entanglement data at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementRecord<T> {
    pub step: usize,
    pub time: T,
    /// Particles in the system.
    pub m: T,
    /// `1 − m/M`.
    pub decayed_fraction: T,
    pub s_vn: T,
    /// Finite Rényi orders other than 1, in request order.
    pub renyi: Vec<(f64, T)>,
    pub s_min: T,
    /// Largest Schmidt values, descending.
    pub levels: Vec<SchmidtLevel<T>>,
    /// Sum over the full Schmidt spectrum.
    pub schmidt_total: T,
}

impl<T: Real> EntanglementRecord<T> {
    pub fn renyi(&self, n: f64) -> Option<T> {
        if n == 1.0 {
            return Some(self.s_vn);
        }
        self.renyi.iter().find(|(o, _)| *o == n).map(|&(_, s)| s)
    }

    pub fn lambda(&self, i: usize) -> Option<T> {
        self.levels.get(i).map(|l| l.lambda)
    }
}

fn xlnx<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.ln()
    }
}

/// Entropies of a full (normalised) Schmidt spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Entropies<T> {
    pub s_vn: T,
    pub renyi: Vec<(f64, T)>,
    pub s_min: T,
}

fn finite_orders(orders: &[RenyiOrder]) -> impl Iterator<Item = f64> + '_ {
    orders.iter().filter_map(|o| match o {
        RenyiOrder::Finite(n) => Some(*n),
        _ => None,
    })
}

/// `S_vN = −Σ λ ln λ`, `S_n = ln(Σ λ^n)/(1−n)`, `S_min = −ln max λ`.
pub fn entropies_from_schmidt<T: Real>(lambdas: &[T], orders: &[RenyiOrder]) -> Entropies<T> {
    let s_vn = -lambdas.iter().fold(T::zero(), |acc, &l| acc + xlnx(l));
    let renyi = finite_orders(orders)
        .map(|n| {
            let nt = T::lit(n);
            let sum = lambdas
                .iter()
                .filter(|&&l| l > T::zero())
                .fold(T::zero(), |acc, &l| acc + l.powf(nt));
            (n, sum.ln() / (T::one() - nt))
        })
        .collect();
    let max = lambdas.iter().fold(T::zero(), |acc, &l| acc.max(l));
    Entropies { s_vn, renyi, s_min: -max.ln() }
}

/// Eigenvalues of the system block of a free-fermion correlation matrix,
/// clamped to `[0, 1]` and sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOccupations<T>(Vec<T>);

impl<T: Real> ModeOccupations<T> {
    pub fn new(mut nu: Vec<T>) -> Self {
        for x in nu.iter_mut() {
            *x = x.max(T::zero()).min(T::one());
        }
        nu.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        Self(nu)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ ν_j`, the mean particle number of the block.
    pub fn total(&self) -> T {
        self.0.iter().fold(T::zero(), |a, &b| a + b)
    }
}

/// Free-fermion entropies from mode occupations; `0·ln 0 := 0`.
pub fn entropies_from_modes<T: Real>(nu: &ModeOccupations<T>, orders: &[RenyiOrder]) -> Entropies<T> {
    let s_vn = -nu
        .0
        .iter()
        .fold(T::zero(), |acc, &v| acc + xlnx(v) + xlnx(T::one() - v));
    let renyi = finite_orders(orders)
        .map(|n| {
            let nt = T::lit(n);
            let sum = nu
                .0
                .iter()
                .fold(T::zero(), |acc, &v| acc + (v.powf(nt) + (T::one() - v).powf(nt)).ln());
            (n, sum / (T::one() - nt))
        })
        .collect();
    let s_min = -nu
        .0
        .iter()
        .fold(T::zero(), |acc, &v| acc + v.max(T::one() - v).ln());
    Entropies { s_vn, renyi, s_min }
}

#[derive(Debug)]
struct Candidate<T> {
    value: T,
    /// Flipped positions into the ratio-sorted mode order, ascending.
    flips: Vec<usize>,
}

impl<T: Real> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Candidate<T> {}

impl<T: Real> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Candidate<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .partial_cmp(&other.value)
            .unwrap_or(Ordering::Equal)
            // on ties prefer the lexicographically smaller flip set
            .then_with(|| other.flips.cmp(&self.flips))
    }
}

/// The `k` largest many-body Schmidt values of a Gaussian state.
///
/// Every Schmidt value is `Π_j x_j` with `x_j ∈ {ν_j, 1−ν_j}`. Starting from
/// the all-majority product, each flip of mode `j` multiplies by
/// `r_j = min/max ≤ 1`; subsets of flips are enumerated best-first. The
/// sector of a value is the number of modes taken as occupied.
pub fn schmidt_topk_from_modes<T: Real>(
    nu: &ModeOccupations<T>,
    k: usize,
) -> Result<Vec<SchmidtLevel<T>>, SpectrumError> {
    let m = nu.len();
    let available_ok = m >= usize::BITS as usize - 1 || k <= 1usize << m;
    if k == 0 || !available_ok {
        return Err(SpectrumError::Range {
            k,
            available: if m < 63 { (1u64 << m).to_string() } else { format!("2^{m}") },
        });
    }

    struct Mode<T> {
        ratio: T,
        majority_occupied: bool,
    }
    let mut base = T::one();
    let mut base_sector = 0usize;
    let mut modes: Vec<Mode<T>> = nu
        .0
        .iter()
        .map(|&v| {
            let (hi, lo) = if v >= T::one() - v { (v, T::one() - v) } else { (T::one() - v, v) };
            let majority_occupied = v >= T::one() - v;
            base = base * hi;
            if majority_occupied {
                base_sector += 1;
            }
            Mode { ratio: if hi > T::zero() { lo / hi } else { T::zero() }, majority_occupied }
        })
        .collect();
    modes.sort_by(|a, b| b.ratio.partial_cmp(&a.ratio).unwrap_or(Ordering::Equal));

    let sector_of = |flips: &[usize]| -> usize {
        flips.iter().fold(base_sector, |s, &i| if modes[i].majority_occupied { s - 1 } else { s + 1 })
    };

    let mut out = Vec::with_capacity(k);
    let mut heap = BinaryHeap::new();
    heap.push(Candidate { value: base, flips: Vec::new() });
    while let Some(c) = heap.pop() {
        out.push(SchmidtLevel::new(c.value, sector_of(&c.flips)));
        if out.len() == k {
            break;
        }
        // Successors: append the next mode, or advance the last flip.
        // Together these reach every subset exactly once.
        let next = c.flips.last().map_or(0, |&i| i + 1);
        if next < m {
            let mut flips = c.flips.clone();
            flips.push(next);
            heap.push(Candidate { value: c.value * modes[next].ratio, flips });
            if let Some(&last) = c.flips.last() {
                let mut flips = c.flips.clone();
                *flips.last_mut().unwrap() = next;
                let value = if modes[last].ratio > T::zero() {
                    c.value / modes[last].ratio * modes[next].ratio
                } else {
                    // recompute to avoid 0/0
                    flips.iter().fold(base, |v, &i| v * modes[i].ratio)
                };
                heap.push(Candidate { value, flips });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// All 2^M products with their sectors, sorted descending.
    fn enumerate_products(nu: &[f64]) -> Vec<(f64, usize)> {
        let m = nu.len();
        let mut all: Vec<(f64, usize)> = (0..1usize << m)
            .map(|mask| {
                let mut p = 1.0;
                for (j, &v) in nu.iter().enumerate() {
                    p *= if mask >> j & 1 == 1 { v } else { 1.0 - v };
                }
                (p, mask.count_ones() as usize)
            })
            .collect();
        all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        all
    }

    #[test]
    fn parse_orders() {
        let o = RenyiOrder::parse_list("1,2,inf").unwrap();
        assert_eq!(o, vec![RenyiOrder::VonNeumann, RenyiOrder::Finite(2.0), RenyiOrder::Min]);
        assert!(RenyiOrder::parse_list("0").is_err());
        assert!(RenyiOrder::parse_list("x").is_err());
        assert_eq!(RenyiOrder::Finite(3.0).label(), "S_3");
        assert_eq!(RenyiOrder::Finite(0.5).label(), "S_0.5");
    }

    #[test]
    fn product_state_modes_have_zero_entropy() {
        let nu = ModeOccupations::new(vec![1.0, 0.0, 1.0]);
        let e = entropies_from_modes(&nu, &[RenyiOrder::Finite(2.0)]);
        assert_eq!(e.s_vn, 0.0);
        assert_eq!(e.s_min, 0.0);
        assert_eq!(e.renyi[0].1, 0.0);
    }

    #[test]
    fn half_filled_mode_is_ln2() {
        let nu = ModeOccupations::new(vec![0.5]);
        let e = entropies_from_modes(&nu, &[RenyiOrder::Finite(2.0)]);
        assert_abs_diff_eq!(e.s_vn, std::f64::consts::LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(e.s_min, std::f64::consts::LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(e.renyi[0].1, std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn two_mode_min_entropy_against_full_spectrum() {
        // closed form: −ln(0.9·0.7)
        let nu = ModeOccupations::new(vec![0.9, 0.3]);
        let orders = [RenyiOrder::Finite(2.0), RenyiOrder::Finite(3.5)];
        let e = entropies_from_modes(&nu, &orders);
        assert_abs_diff_eq!(e.s_min, 0.462035459596559, epsilon = 1e-12);
        // brute force: the 4×4 RDM of two independent modes is diagonal
        let spectrum: Vec<f64> = enumerate_products(&[0.9, 0.3]).into_iter().map(|p| p.0).collect();
        let full = entropies_from_schmidt(&spectrum, &orders);
        assert_abs_diff_eq!(e.s_vn, full.s_vn, epsilon = 1e-14);
        assert_abs_diff_eq!(e.s_min, full.s_min, epsilon = 1e-14);
        for (a, b) in e.renyi.iter().zip(&full.renyi) {
            assert_eq!(a.0, b.0);
            assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-14);
        }
    }

    #[test]
    fn topk_pure_state() {
        let nu = ModeOccupations::new(vec![1.0, 1.0, 0.0]);
        let top = schmidt_topk_from_modes(&nu, 1).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].lambda, 1.0);
        assert_eq!(top[0].sector, 2);
        assert_eq!(top[0].epsilon, 0.0);
    }

    #[test]
    fn topk_two_modes() {
        let nu = ModeOccupations::new(vec![0.9, 0.3]);
        let top = schmidt_topk_from_modes(&nu, 4).unwrap();
        let expected = [(0.63, 1), (0.27, 2), (0.07, 0), (0.03, 1)];
        for (lvl, (l, s)) in top.iter().zip(expected) {
            assert_abs_diff_eq!(lvl.lambda, l, epsilon = 1e-15);
            assert_eq!(lvl.sector, s);
        }
    }

    #[test]
    fn topk_range_errors() {
        let nu = ModeOccupations::new(vec![0.9, 0.3]);
        assert!(schmidt_topk_from_modes(&nu, 5).is_err());
        assert!(schmidt_topk_from_modes(&nu, 0).is_err());
    }

    #[test]
    fn top_value_is_exp_of_min_entropy() {
        let nu = ModeOccupations::<f64>::new(vec![0.81, 0.44, 0.05, 0.62]);
        let top = schmidt_topk_from_modes(&nu, 1).unwrap();
        let e = entropies_from_modes(&nu, &[]);
        assert_abs_diff_eq!(-top[0].lambda.ln(), e.s_min, epsilon = 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let nu = ModeOccupations::new(vec![0.5f32, 0.5]);
        let e = entropies_from_modes(&nu, &[]);
        assert!((e.s_vn - 2.0 * std::f32::consts::LN_2).abs() < 1e-6);
        let top = schmidt_topk_from_modes(&nu, 4).unwrap();
        assert!(top.iter().all(|l| (l.lambda - 0.25).abs() < 1e-7));
    }

    proptest::proptest! {
        #[test]
        fn topk_matches_enumeration(nu in proptest::collection::vec(0.0f64..=1.0, 1..7), k in 1usize..12) {
            let modes = ModeOccupations::new(nu.clone());
            let all = enumerate_products(modes.as_slice());
            let k = k.min(all.len());
            let top = schmidt_topk_from_modes(&modes, k).unwrap();
            proptest::prop_assert_eq!(top.len(), k);
            for (lvl, (p, _)) in top.iter().zip(&all) {
                proptest::prop_assert!((lvl.lambda - p).abs() < 1e-12);
            }
            let sum: f64 = top.iter().map(|l| l.lambda).sum();
            proptest::prop_assert!(sum <= 1.0 + 1e-12);
            for w in top.windows(2) {
                proptest::prop_assert!(w[0].lambda >= w[1].lambda);
            }
        }

        #[test]
        fn topk_sectors_consistent(nu in proptest::collection::vec(0.01f64..0.99, 1..6)) {
            // a level's value must be achievable by some configuration in its sector
            let modes = ModeOccupations::new(nu);
            let v = modes.as_slice();
            let all = enumerate_products(v);
            let top = schmidt_topk_from_modes(&modes, all.len()).unwrap();
            for lvl in &top {
                proptest::prop_assert!(all.iter().any(|(p, s)| *s == lvl.sector && (p - lvl.lambda).abs() < 1e-12));
            }
        }
    }
}
