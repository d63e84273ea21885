//! Fixed-particle-number basis with combinatorial-number-system ranking.
//!
//! Site `i` is bit `i`. States are stored in ascending integer order, which
//! is exactly the order of their combinatorial rank
//! `rank(s) = Σ_k C(p_k, k+1)` where `p_0 < p_1 < …` are the occupied sites.
//! Because the system occupies the low bits, states sharing an environment
//! configuration are contiguous.

use super::EdError;

/// Default limit on the stored sector dimension.
pub const DEFAULT_CAPACITY: usize = 1 << 22;

/// `C(n, k)` without overflow for everything a 64-site chain needs.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[derive(Debug, Clone)]
pub struct SectorBasis {
    l: usize,
    m: usize,
    states: Vec<u64>,
    /// `binom[n * stride + k] = C(n, k)` for `n ≤ L`, `k ≤ M + 1`.
    binom: Vec<u64>,
    stride: usize,
}

impl SectorBasis {
    pub fn new(l: usize, m: usize) -> Result<Self, EdError> {
        Self::with_capacity(l, m, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(l: usize, m: usize, capacity: usize) -> Result<Self, EdError> {
        if l == 0 || l > 64 || m > l {
            return Err(EdError::Geometry { l, m });
        }
        let dim = binomial(l as u64, m as u64);
        if dim > capacity as u128 {
            return Err(EdError::Capacity { l, m, dim, capacity });
        }
        let stride = m + 2;
        let mut binom = vec![0u64; (l + 1) * stride];
        for n in 0..=l {
            for k in 0..stride {
                binom[n * stride + k] = binomial(n as u64, k as u64) as u64;
            }
        }
        let mut states = Vec::with_capacity(dim as usize);
        if m == 0 {
            states.push(0);
        } else {
            let end = if l == 64 { None } else { Some(1u64 << l) };
            let mut s: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
            loop {
                states.push(s);
                // Gosper's hack: next integer with the same popcount
                let c = s & s.wrapping_neg();
                let (r, overflow) = s.overflowing_add(c);
                if overflow || r == 0 {
                    break;
                }
                let next = (((r ^ s) >> 2) / c) | r;
                if end.is_some_and(|e| next >= e) {
                    break;
                }
                s = next;
            }
        }
        debug_assert_eq!(states.len() as u128, dim);
        Ok(Self { l, m, states, binom, stride })
    }

    pub fn sites(&self) -> usize {
        self.l
    }

    pub fn particles(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn unrank(&self, index: usize) -> u64 {
        self.states[index]
    }

    /// `C(n, k)` from the cached table (`k ≤ M + 1`).
    #[inline]
    pub fn choose(&self, n: usize, k: usize) -> u64 {
        self.binom[n * self.stride + k]
    }

    pub fn rank(&self, state: u64) -> usize {
        let mut rest = state;
        let mut k = 0;
        let mut r = 0u64;
        while rest != 0 {
            let p = rest.trailing_zeros() as usize;
            k += 1;
            r += self.choose(p, k);
            rest &= rest - 1;
        }
        r as usize
    }

    pub fn contains(&self, state: u64) -> bool {
        state.count_ones() as usize == self.m && (self.l == 64 || state >> self.l == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_dimension() {
        let b = SectorBasis::new(4, 2).unwrap();
        assert_eq!(b.dim(), 6);
        assert_eq!(b.states(), &[0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
    }

    #[test]
    fn l50_sector_dimensions() {
        assert_eq!(binomial(50, 5), 2_118_760);
        assert_eq!(binomial(50, 7), 99_884_400);
        match SectorBasis::new(50, 7).unwrap_err() {
            EdError::Capacity { l: 50, m: 7, dim, .. } => assert_eq!(dim, 99_884_400),
            other => panic!("unexpected {other:?}"),
        }
        assert!(SectorBasis::with_capacity(50, 6, 1 << 22).is_err());
    }

    #[test]
    fn rank_unrank_bijection() {
        for (l, m) in [(1, 1), (6, 3), (10, 4), (12, 0), (9, 9), (20, 3)] {
            let b = SectorBasis::new(l, m).unwrap();
            assert_eq!(b.dim() as u128, binomial(l as u64, m as u64));
            for i in 0..b.dim() {
                let s = b.unrank(i);
                assert!(b.contains(s));
                assert_eq!(b.rank(s), i);
            }
            assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn sixty_four_sites() {
        let b = SectorBasis::new(64, 1).unwrap();
        assert_eq!(b.dim(), 64);
        assert_eq!(b.unrank(63), 1u64 << 63);
        assert_eq!(b.rank(1u64 << 63), 63);
    }

    #[test]
    fn bad_geometry() {
        assert!(SectorBasis::new(65, 1).is_err());
        assert!(SectorBasis::new(3, 4).is_err());
    }
}
