//! Exact time evolution by spectral decomposition in each charge sector.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::fock::{jw_sign, FockVector, MAX_SITES};
use crate::{OracleError, Result};

struct Sector {
    /// Basis configurations, ascending.
    configs: Vec<usize>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

/// Ring of `L` sites with its sector spectra, computed on first use.
pub struct Simulator {
    sites: usize,
    sectors: HashMap<u32, Sector>,
}

impl Simulator {
    pub fn new(sites: usize) -> Result<Self> {
        if sites < 2 || sites > MAX_SITES {
            return Err(OracleError::InvalidInput(format!("chain length must be in 2..={MAX_SITES}, got {sites}")));
        }
        Ok(Self { sites, sectors: HashMap::new() })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Hamiltonian matrix of the `n`-particle sector in its ascending basis.
    pub fn sector_hamiltonian(&self, n: u32) -> (Vec<usize>, DMatrix<f64>) {
        let configs: Vec<usize> = (0..1usize << self.sites).filter(|c| c.count_ones() == n).collect();
        let index: HashMap<usize, usize> = configs.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let dim = configs.len();
        let mut h = DMatrix::zeros(dim, dim);
        for (col, &c) in configs.iter().enumerate() {
            for x in 0..self.sites {
                let y = (x + 1) % self.sites;
                if y == x {
                    continue;
                }
                for (to, from) in [(x, y), (y, x)] {
                    if let Some((next, sign)) = hop(c, to, from) {
                        h[(index[&next], col)] += -0.5 * sign;
                    }
                }
            }
        }
        (configs, h)
    }

    fn sector(&mut self, n: u32) -> &Sector {
        if !self.sectors.contains_key(&n) {
            let (configs, h) = self.sector_hamiltonian(n);
            let eig = SymmetricEigen::new(h);
            self.sectors.insert(n, Sector { configs, eigenvalues: eig.eigenvalues, eigenvectors: eig.eigenvectors });
        }
        &self.sectors[&n]
    }

    /// `e^{-iHΔt} |ψ⟩`.
    pub fn evolve(&mut self, psi: &FockVector, dt: f64) -> Result<FockVector> {
        if psi.sites() != self.sites {
            return Err(OracleError::InvalidInput(format!(
                "state has {} sites, simulator {}",
                psi.sites(),
                self.sites
            )));
        }
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(OracleError::InvalidInput(format!("time step must be finite and non-negative, got {dt}")));
        }
        let mut out = psi.clone();
        if dt == 0.0 {
            return Ok(out);
        }
        for n in psi.total_charges() {
            let sector = self.sector(n);
            let amps = psi.amplitudes();
            let re = DVector::from_iterator(sector.configs.len(), sector.configs.iter().map(|&c| amps[c].re));
            let im = DVector::from_iterator(sector.configs.len(), sector.configs.iter().map(|&c| amps[c].im));
            let v = &sector.eigenvectors;
            let (cr, ci) = (v.tr_mul(&re), v.tr_mul(&im));
            let mut pr = DVector::zeros(cr.len());
            let mut pi = DVector::zeros(cr.len());
            for j in 0..cr.len() {
                let z = Complex64::new(cr[j], ci[j]) * Complex64::from_polar(1.0, -sector.eigenvalues[j] * dt);
                pr[j] = z.re;
                pi[j] = z.im;
            }
            let (nr, ni) = (v * pr, v * pi);
            let target = out.amplitudes_mut();
            for (j, &c) in sector.configs.iter().enumerate() {
                target[c] = Complex64::new(nr[j], ni[j]);
            }
        }
        Ok(out)
    }
}

/// `c†_to c_from` on a configuration, with its fermionic sign.
fn hop(config: usize, to: usize, from: usize) -> Option<(usize, f64)> {
    if config & (1 << from) == 0 || config & (1 << to) != 0 {
        return None;
    }
    let removed = config & !(1 << from);
    let sign = jw_sign(config, from) * jw_sign(removed, to);
    Some((removed | (1 << to), sign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build_state;
    use std::f64::consts::PI;

    #[test]
    fn zero_step_is_identity() {
        let psi = build_state("dimer", 6).unwrap();
        let mut sim = Simulator::new(6).unwrap();
        assert_eq!(sim.evolve(&psi, 0.0).unwrap(), psi);
    }

    #[test]
    fn unitary() {
        for name in ["neel", "tilted:1.1"] {
            let psi = build_state(name, 8).unwrap();
            let mut sim = Simulator::new(8).unwrap();
            let out = sim.evolve(&psi, 100.0).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let sim = Simulator::new(6).unwrap();
        for n in 0..=6 {
            let (_, h) = sim.sector_hamiltonian(n);
            assert!((&h - h.transpose()).amax() < 1e-15);
        }
    }

    /// Single-particle sector against the `L × L` hopping matrix.
    #[test]
    fn single_particle_dispersion() {
        let l = 8;
        let mut hop = DMatrix::<f64>::zeros(l, l);
        for x in 0..l {
            hop[(x, (x + 1) % l)] = -0.5;
            hop[((x + 1) % l, x)] = -0.5;
        }
        let eig = SymmetricEigen::new(hop);
        let mut sim = Simulator::new(l).unwrap();
        let t = 3.7;
        for j in 0..l {
            let k = 2.0 * PI * j as f64 / l as f64;
            let mut amps = vec![Complex64::new(0.0, 0.0); 1 << l];
            for x in 0..l {
                amps[1 << x] = Complex64::from_polar(1.0 / (l as f64).sqrt(), k * x as f64);
            }
            let psi = FockVector::from_amplitudes(l, amps.clone()).unwrap();
            let out = sim.evolve(&psi, t).unwrap();
            let phase = Complex64::from_polar(1.0, k.cos() * t);
            // Oracle: e^{-iht} = V e^{-iEt} V^T on the site vector.
            let mut oracle = vec![Complex64::new(0.0, 0.0); l];
            for a in 0..l {
                let overlap: Complex64 = (0..l).map(|x| eig.eigenvectors[(x, a)] * amps[1 << x]).sum();
                let evolved = overlap * Complex64::from_polar(1.0, -eig.eigenvalues[a] * t);
                for x in 0..l {
                    oracle[x] += eig.eigenvectors[(x, a)] * evolved;
                }
            }
            for x in 0..l {
                let got = out.amplitudes()[1 << x];
                assert!((got - oracle[x]).norm() < 1e-12);
                assert!((got - phase * amps[1 << x]).norm() < 1e-12);
            }
        }
    }
}
