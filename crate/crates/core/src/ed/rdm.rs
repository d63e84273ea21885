//! Reduced density matrices of the system (`sites 0..M`) and, for small
//! chains, of the environment.
//!
//! `ρ_s[a, b] = Σ_e ψ(a, e) ψ*(b, e)`. The global particle number is fixed,
//! so `a` and `b` must carry the same number of particles: `ρ_s` is stored
//! as one Hermitian block per system particle number.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::basis::SectorBasis;
use super::vector::CHUNK;
use super::EdError;
use crate::spectrum::{entropies_from_schmidt, EntanglementRecord, RenyiOrder, SchmidtLevel};

/// One particle-number block of a reduced density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityBlock {
    pub particles: usize,
    /// Local bit patterns spanning the block, ascending.
    pub patterns: Vec<u64>,
    pub matrix: DMatrix<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    pub sites: usize,
    /// Indexed by particle number `0..=sites`.
    pub blocks: Vec<DensityBlock>,
}

impl ReducedDensityMatrix {
    fn empty(sites: usize, max_particles: usize) -> (Self, Vec<usize>) {
        // position of every local pattern inside its block
        let mut position = vec![0usize; 1 << sites];
        let mut blocks: Vec<DensityBlock> = (0..=sites)
            .map(|k| DensityBlock { particles: k, patterns: Vec::new(), matrix: DMatrix::zeros(0, 0) })
            .collect();
        for a in 0..(1u64 << sites) {
            let k = a.count_ones() as usize;
            position[a as usize] = blocks[k].patterns.len();
            blocks[k].patterns.push(a);
        }
        for b in blocks.iter_mut() {
            let n = if b.particles <= max_particles { b.patterns.len() } else { 0 };
            if n == 0 {
                b.patterns.clear();
            }
            b.matrix = DMatrix::zeros(n, n);
        }
        (Self { sites, blocks }, position)
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.matrix.diagonal().iter().map(|z| z.re).sum::<f64>()).sum()
    }

    /// Mean particle number `Σ_k k · tr ρ_k`.
    pub fn particle_number(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.particles as f64 * b.matrix.diagonal().iter().map(|z| z.re).sum::<f64>())
            .sum()
    }

    /// Dense `2^sites` matrix in local-pattern order.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = 1usize << self.sites;
        let mut out = DMatrix::zeros(n, n);
        for b in &self.blocks {
            for (i, &pa) in b.patterns.iter().enumerate() {
                for (j, &pb) in b.patterns.iter().enumerate() {
                    out[(pa as usize, pb as usize)] = b.matrix[(i, j)];
                }
            }
        }
        out
    }

    /// Eigenvalues per block, each tagged with the block particle number.
    /// Small negative eigenvalues are clamped to zero; anything below
    /// `−1e−10` is reported.
    pub fn spectrum(&self) -> Result<Vec<(f64, usize)>, EdError> {
        let mut out = Vec::with_capacity(1 << self.sites.min(20));
        for b in &self.blocks {
            if b.matrix.nrows() == 0 {
                continue;
            }
            for &ev in b.matrix.clone().symmetric_eigenvalues().iter() {
                if ev < -1e-10 {
                    return Err(EdError::Numeric(format!(
                        "reduced density matrix eigenvalue {ev:e} in sector {}",
                        b.particles
                    )));
                }
                out.push((ev.max(0.0), b.particles));
            }
        }
        out.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        Ok(out)
    }
}

/// Contiguous basis ranges that never split an environment configuration.
fn aligned_chunks(states: &[u64], m: usize, target: usize) -> Vec<std::ops::Range<usize>> {
    let dim = states.len();
    let n_chunks = (dim / target).max(1);
    let mut bounds = vec![0usize];
    for c in 1..n_chunks {
        let mut b = (c * dim / n_chunks).max(*bounds.last().unwrap());
        while b > 0 && b < dim && states[b] >> m == states[b - 1] >> m {
            b += 1;
        }
        if b < dim && b > *bounds.last().unwrap() {
            bounds.push(b);
        }
    }
    bounds.push(dim);
    bounds.windows(2).map(|w| w[0]..w[1]).collect()
}

/// `ρ_s` of the first `m` sites.
pub fn reduced_density_matrix(psi: &[Complex64], basis: &SectorBasis, m: usize) -> ReducedDensityMatrix {
    assert!(m <= 16, "system reduced density matrix limited to 16 sites");
    assert_eq!(psi.len(), basis.dim());
    let states = basis.states();
    let mask = (1u64 << m) - 1;
    let (template, position) = ReducedDensityMatrix::empty(m, basis.particles().min(m));

    let partials: Vec<ReducedDensityMatrix> = aligned_chunks(states, m, 1 << 16)
        .into_par_iter()
        .map(|range| {
            let mut acc = template.clone();
            let mut start = range.start;
            while start < range.end {
                let env = states[start] >> m;
                let mut end = start + 1;
                while end < range.end && states[end] >> m == env {
                    end += 1;
                }
                let k = (states[start] & mask).count_ones() as usize;
                let block = &mut acc.blocks[k].matrix;
                for i in start..end {
                    let pi = position[(states[i] & mask) as usize];
                    let ai = psi[i];
                    for j in start..end {
                        let pj = position[(states[j] & mask) as usize];
                        block[(pi, pj)] += ai * psi[j].conj();
                    }
                }
                start = end;
            }
            acc
        })
        .collect();

    let mut total = template;
    for p in partials {
        for (t, b) in total.blocks.iter_mut().zip(p.blocks) {
            t.matrix += b.matrix;
        }
    }
    total
}

/// Reduced density matrix of the environment `m..L`; only practical for
/// short chains.
pub fn environment_density_matrix(psi: &[Complex64], basis: &SectorBasis, m: usize) -> ReducedDensityMatrix {
    let n = basis.sites() - m;
    assert!(n <= 14, "environment reduced density matrix limited to 14 sites");
    let states = basis.states();
    let mask = (1u64 << m) - 1;
    let (mut rho, position) = ReducedDensityMatrix::empty(n, basis.particles().min(n));
    // group by system pattern
    let mut by_system: Vec<Vec<(u64, Complex64)>> = vec![Vec::new(); 1 << m];
    for (i, &s) in states.iter().enumerate() {
        by_system[(s & mask) as usize].push((s >> m, psi[i]));
    }
    for group in by_system {
        for &(ea, ca) in &group {
            let k = ea.count_ones() as usize;
            let block = &mut rho.blocks[k].matrix;
            for &(eb, cb) in &group {
                block[(position[ea as usize], position[eb as usize])] += ca * cb.conj();
            }
        }
    }
    rho
}

/// Particles on sites `0..m`, read directly from the amplitudes.
pub fn system_particle_number(psi: &[Complex64], basis: &SectorBasis, m: usize) -> f64 {
    let mask = (1u64 << m) - 1;
    let parts: Vec<f64> = basis
        .states()
        .par_chunks(CHUNK)
        .zip(psi.par_chunks(CHUNK))
        .map(|(s, a)| s.iter().zip(a).map(|(&s, a)| (s & mask).count_ones() as f64 * a.norm_sqr()).sum())
        .collect();
    parts.into_iter().sum()
}

/// Schmidt spectrum, entropies and entanglement-Hamiltonian levels.
pub fn spectrum_and_entropies(
    rho: &ReducedDensityMatrix,
    orders: &[RenyiOrder],
    topk: usize,
    step: usize,
    time: f64,
    particles: f64,
    m: usize,
) -> Result<EntanglementRecord<f64>, EdError> {
    let spectrum = rho.spectrum()?;
    let lambdas: Vec<f64> = spectrum.iter().map(|p| p.0).collect();
    let e = entropies_from_schmidt(&lambdas, orders);
    let levels = spectrum.iter().take(topk).map(|&(l, s)| SchmidtLevel::new(l, s)).collect();
    Ok(EntanglementRecord {
        step,
        time,
        m: particles,
        decayed_fraction: 1.0 - particles / m as f64,
        s_vn: e.s_vn,
        renyi: e.renyi,
        s_min: e.s_min,
        levels,
        schmidt_total: lambdas.iter().sum(),
    })
}
