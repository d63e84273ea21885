//! Matrix-free action of the chain Hamiltonian on a sector state.
//!
//! With Jordan–Wigner strings along the chain, a nearest-neighbour hop never
//! passes an occupied site, so every hopping matrix element is simply `−t`.
//! Moving the `k`-th particle (counting from site 0) from `p` to `p ± 1`
//! keeps the particle order, which changes the rank by `+C(p, k)` for a
//! right hop and `−C(p−1, k)` for a left hop.

use num_complex::Complex64;
use rayon::prelude::*;

use super::basis::SectorBasis;
use super::vector;
use crate::model::ModelParams;

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    diagonal: Vec<f64>,
    bond_hopping: Vec<f64>,
    sites: usize,
}

impl Hamiltonian {
    pub fn new(params: &ModelParams<f64>, basis: &SectorBasis) -> Self {
        let l = params.l();
        assert_eq!(basis.sites(), l, "basis built for a different chain");
        // bonds (i, i+1) with both ends inside the system
        let interacting_bonds: u64 = if params.m >= 2 { (1u64 << (params.m - 1)) - 1 } else { 0 };
        let diagonal = basis
            .states()
            .par_iter()
            .map(|&s| params.v * (s & (s >> 1) & interacting_bonds).count_ones() as f64)
            .collect();
        let bond_hopping = (0..l - 1).map(|i| params.bond_hopping(i)).collect();
        Self { diagonal, bond_hopping, sites: l }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `out = H psi`.
    pub fn apply(&self, basis: &SectorBasis, psi: &[Complex64], out: &mut [Complex64]) {
        let states = basis.states();
        assert_eq!(psi.len(), states.len());
        assert_eq!(out.len(), states.len());
        let l = self.sites;
        out.par_iter_mut().with_min_len(1024).enumerate().for_each(|(i, o)| {
            let s = states[i];
            let mut acc = psi[i] * self.diagonal[i];
            let mut rest = s;
            let mut k = 0usize;
            while rest != 0 {
                let p = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if p + 1 < l && s >> (p + 1) & 1 == 0 {
                    let j = i + basis.choose(p, k) as usize;
                    acc -= psi[j] * self.bond_hopping[p];
                }
                if p > 0 && s >> (p - 1) & 1 == 0 {
                    let j = i - basis.choose(p - 1, k) as usize;
                    acc -= psi[j] * self.bond_hopping[p - 1];
                }
                k += 1;
            }
            *o = acc;
        });
    }

    /// `⟨psi|H|psi⟩` (real for Hermitian `H`).
    pub fn expectation(&self, basis: &SectorBasis, psi: &[Complex64]) -> f64 {
        let mut h_psi = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(basis, psi, &mut h_psi);
        vector::dot(psi, &h_psi).re
    }
}

/// One-shot `H psi` for the given couplings.
pub fn apply_hamiltonian(params: &ModelParams<f64>, basis: &SectorBasis, psi: &[Complex64]) -> Vec<Complex64> {
    let h = Hamiltonian::new(params, basis);
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    h.apply(basis, psi, &mut out);
    out
}
