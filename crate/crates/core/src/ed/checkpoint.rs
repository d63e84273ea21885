//! Binary restart file for a sector state.
//!
//! Layout, all little-endian:
//!
//! | bytes | field                              |
//! |-------|------------------------------------|
//! | 8     | `L` (u64)                          |
//! | 8     | `M` (u64)                          |
//! | 8     | step index (u64)                   |
//! | 8     | `dt` (f64)                         |
//! | 16·d  | amplitudes as (re, im) f64 pairs   |
//!
//! `d = C(L, M)` is implied by the header.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::basis::binomial;
use super::EdError;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub sites: usize,
    pub particles: usize,
    pub step: usize,
    pub dt: f64,
    pub amplitudes: Vec<Complex64>,
}

impl Checkpoint {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), EdError> {
        w.write_all(&(self.sites as u64).to_le_bytes())?;
        w.write_all(&(self.particles as u64).to_le_bytes())?;
        w.write_all(&(self.step as u64).to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.amplitudes.len());
        for z in &self.amplitudes {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, EdError> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8], EdError> {
            r.read_exact(&mut word).map_err(|e| EdError::Checkpoint(format!("truncated header: {e}")))?;
            Ok(word)
        };
        let sites = u64::from_le_bytes(next(&mut r)?) as usize;
        let particles = u64::from_le_bytes(next(&mut r)?) as usize;
        let step = u64::from_le_bytes(next(&mut r)?) as usize;
        let dt = f64::from_le_bytes(next(&mut r)?);
        if sites == 0 || sites > 64 || particles > sites {
            return Err(EdError::Checkpoint(format!("bad geometry L = {sites}, M = {particles}")));
        }
        let dim = binomial(sites as u64, particles as u64) as usize;
        let mut raw = Vec::new();
        r.read_to_end(&mut raw)?;
        if raw.len() != 16 * dim {
            return Err(EdError::Checkpoint(format!(
                "expected {} amplitude bytes, found {}",
                16 * dim,
                raw.len()
            )));
        }
        let amplitudes = raw
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self { sites, particles, step, dt, amplitudes })
    }
}
