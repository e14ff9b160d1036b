//! Occupation-basis vectors and the built-in initial states.

use num_complex::Complex64;

use crate::{OracleError, Result};

pub const MAX_SITES: usize = 14;

/// A pure state over the `2^L` occupation configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    sites: usize,
    amps: Vec<Complex64>,
}

impl FockVector {
    pub fn vacuum(sites: usize) -> Result<Self> {
        check_sites(sites)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << sites];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { sites, amps })
    }

    pub fn from_amplitudes(sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_sites(sites)?;
        if amps.len() != 1 << sites {
            return Err(OracleError::InvalidInput(format!("{} amplitudes do not fit {sites} sites", amps.len())));
        }
        let mut v = Self { sites, amps };
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(OracleError::InvalidInput("state has zero or non-finite norm".into()));
        }
        v.scale(1.0 / norm);
        Ok(v)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn scale(&mut self, s: f64) {
        for a in &mut self.amps {
            *a *= s;
        }
    }

    /// Applies `c†_x` (1-based site), dropping configurations already occupied there.
    pub fn create(&self, x: usize) -> Self {
        let bit = 1usize << (x - 1);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            if i & bit == 0 && a != Complex64::new(0.0, 0.0) {
                out[i | bit] += jw_sign(i, x - 1) * a;
            }
        }
        Self { sites: self.sites, amps: out }
    }

    fn add(&self, other: &Self, a: f64, b: f64) -> Self {
        let amps = self.amps.iter().zip(&other.amps).map(|(x, y)| a * x + b * y).collect();
        Self { sites: self.sites, amps }
    }

    /// Charge of the 1-based inclusive site range `[first, last]` in basis state `i`.
    pub fn block_charge(i: usize, first: usize, last: usize) -> u32 {
        let mask = ((1usize << (last - first + 1)) - 1) << (first - 1);
        (i & mask).count_ones()
    }

    /// `⟨ψ|Q|ψ⟩` over the given sites.
    pub fn mean_charge(&self, first: usize, last: usize) -> f64 {
        self.amps.iter().enumerate().map(|(i, a)| a.norm_sqr() * Self::block_charge(i, first, last) as f64).sum()
    }

    /// Largest and smallest total charge carried with non-negligible weight.
    pub fn total_charges(&self) -> Vec<u32> {
        let mut out: Vec<u32> =
            self.amps.iter().enumerate().filter(|(_, a)| a.norm_sqr() > 1e-24).map(|(i, _)| i.count_ones()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// `(-1)^{number of occupied sites below bit b}`.
pub(crate) fn jw_sign(config: usize, b: usize) -> f64 {
    if (config & ((1usize << b) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_sites(sites: usize) -> Result<()> {
    if sites == 0 || sites > MAX_SITES {
        return Err(OracleError::InvalidInput(format!("chain length must be in 1..={MAX_SITES}, got {sites}")));
    }
    Ok(())
}

/// Builds `neel`, `dimer`, `dimer-flipped` or `tilted:<theta>` on `L` sites.
///
/// - Néel: `Π_x c†_{2x} |0⟩`;
/// - dimer: `Π_x (c†_{2x-1} − c†_{2x})/√2 |0⟩`, the flipped variant with `+`;
/// - tilted: `Π_x (sin θ/2 + cos θ/2 c†_x) |0⟩`.
pub fn build_state(name: &str, sites: usize) -> Result<FockVector> {
    if sites % 2 == 1 {
        return Err(OracleError::InvalidInput(format!("chain length must be even, got {sites}")));
    }
    let mut psi = FockVector::vacuum(sites)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match name {
        "neel" => {
            for x in (1..=sites / 2).rev() {
                psi = psi.create(2 * x);
            }
        }
        "dimer" | "dimer-flipped" => {
            let sign = if name == "dimer" { -1.0 } else { 1.0 };
            for x in (1..=sites / 2).rev() {
                psi = psi.create(2 * x - 1).add(&psi.create(2 * x), r, sign * r);
            }
        }
        _ => {
            let theta: f64 = name
                .strip_prefix("tilted:")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| OracleError::InvalidInput(format!("unknown state '{name}'")))?;
            let (s, c) = ((0.5 * theta).sin(), (0.5 * theta).cos());
            for x in (1..=sites).rev() {
                psi = psi.add(&psi.create(x), s, c);
            }
        }
    }
    Ok(psi)
}
