//! Band structure and initial-state mode occupations.
//!
//! Every state is described by its momentum-resolved occupation `n(k)` and a
//! pairing class. Particle-hole paired states correlate `k` with `k - π` and
//! carry a definite total charge; squeezed states correlate `k` with `-k`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_bz, QuadratureConfig};

/// Nearest-neighbour tight-binding band `ε(k) = -cos k`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DispersionModel;

impl DispersionModel {
    pub fn energy(&self, k: f64) -> f64 {
        -k.cos()
    }

    pub fn velocity(&self, k: f64) -> f64 {
        velocity(k)
    }

    pub fn max_velocity(&self) -> f64 {
        MAX_VELOCITY
    }
}

pub const MAX_VELOCITY: f64 = 1.0;

/// Group velocity `v_k = sin k` of the tight-binding band.
///
/// Near the zone edge it is evaluated as `sin(π - k)` so that its zeros and
/// kinks match the break points produced by `speed_kinks`.
#[inline]
pub fn velocity(k: f64) -> f64 {
    if k > FRAC_PI_2 {
        (PI - k).sin()
    } else if k < -FRAC_PI_2 {
        -(PI + k).sin()
    } else {
        k.sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pairing {
    SymmetricParticleHole,
    SqueezedPair,
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    Neel,
    Dimer { flipped: bool },
    Tilted { cos_theta: f64 },
    Table { k: Vec<f64>, n: Vec<f64> },
}

/// Mode occupation `n(k)` together with its pairing class.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationFunction {
    profile: Profile,
    pairing: Pairing,
    label: String,
}

impl OccupationFunction {
    pub fn neel() -> Self {
        Self { profile: Profile::Neel, pairing: Pairing::SymmetricParticleHole, label: "neel".into() }
    }

    /// Dimer state, `n(k) = (1 - cos k)/2`.
    pub fn dimer() -> Self {
        Self {
            profile: Profile::Dimer { flipped: false },
            pairing: Pairing::SymmetricParticleHole,
            label: "dimer".into(),
        }
    }

    /// Dimer with the opposite sign convention, `n(k) = (1 + cos k)/2`.
    pub fn dimer_flipped() -> Self {
        Self {
            profile: Profile::Dimer { flipped: true },
            pairing: Pairing::SymmetricParticleHole,
            label: "dimer-flipped".into(),
        }
    }

    /// Tilted ferromagnet at angle `theta ∈ (0, π)`, a squeezed state.
    pub fn tilted(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::InvalidInput(format!("tilt angle {theta} outside (0, pi)")));
        }
        Ok(Self {
            profile: Profile::Tilted { cos_theta: theta.cos() },
            pairing: Pairing::SqueezedPair,
            label: format!("tilted:{theta}"),
        })
    }

    /// Piecewise-linear occupation through the points `(k_i, n_i)`, clamped at the ends.
    pub fn from_table(k: Vec<f64>, n: Vec<f64>, pairing: Pairing, label: &str) -> Result<Self> {
        if k.len() != n.len() || k.len() < 2 {
            return Err(Error::InvalidInput("occupation table needs at least two (k, n) rows".into()));
        }
        if k.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("occupation table momenta must increase strictly".into()));
        }
        if n.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::InvalidInput("occupation table values must lie in [0, 1]".into()));
        }
        Ok(Self { profile: Profile::Table { k, n }, pairing, label: label.into() })
    }

    /// Uniform tabulation on `points` momenta, reusable when `n(k)` is expensive.
    pub fn tabulate(&self, points: usize) -> Result<Self> {
        let points = points.max(2);
        let k: Vec<f64> = (0..points).map(|i| -PI + 2.0 * PI * i as f64 / (points - 1) as f64).collect();
        let n = k.iter().map(|&x| self.evaluate(x)).collect();
        Self::from_table(k, n, self.pairing, &self.label)
    }

    pub fn evaluate(&self, k: f64) -> f64 {
        self.split(k).0
    }

    /// `(n, 1 - n)`, each to full relative precision for the analytic profiles.
    pub fn split(&self, k: f64) -> (f64, f64) {
        let (s2, c2) = ((0.5 * k).sin().powi(2), (0.5 * k).cos().powi(2));
        match &self.profile {
            Profile::Neel => (0.5, 0.5),
            Profile::Dimer { flipped: false } => (s2, c2),
            Profile::Dimer { flipped: true } => (c2, s2),
            Profile::Tilted { cos_theta } => {
                let c = *cos_theta;
                let (a, b) = ((1.0 + c).powi(2) * s2, (1.0 - c).powi(2) * c2);
                (a / (a + b), b / (a + b))
            }
            Profile::Table { k: ks, n } => {
                let v = interpolate(ks, n, k);
                (v, 1.0 - v)
            }
        }
    }

    pub fn pairing(&self) -> Pairing {
        self.pairing
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_neel(&self) -> bool {
        matches!(self.profile, Profile::Neel)
    }

    /// `n(1 - n)` at momentum `k`.
    pub fn fluctuation(&self, k: f64) -> f64 {
        let (n, h) = self.split(k);
        n * h
    }

    /// Checks the pairing symmetry on a 1001-point grid.
    pub fn check_pairing(&self) -> Result<()> {
        for i in 0..1001 {
            let k = -PI + 2.0 * PI * i as f64 / 1000.0;
            let n = self.evaluate(k);
            let dev = match self.pairing {
                Pairing::SymmetricParticleHole => (self.evaluate(wrap(k - PI)) - (1.0 - n)).abs(),
                Pairing::SqueezedPair => (self.evaluate(-k) - n).abs(),
            };
            if dev >= 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "occupation '{}' violates its {:?} pairing at k = {k} (deviation {dev:e})",
                    self.label, self.pairing
                )));
            }
        }
        Ok(())
    }
}

/// Tilted-ferromagnet `cos Θ_k` denominator guard, exposed for diagnostics.
pub fn tilted_denominator(k: f64, theta: f64) -> Result<f64> {
    let c = theta.cos();
    let den = 1.0 - 2.0 * c * k.cos() + c * c;
    if den < 1e-14 {
        return Err(Error::Domain(format!("tilted occupation singular at k = {k}, theta = {theta}")));
    }
    Ok(den)
}

pub fn occupation_neel(_k: f64) -> f64 {
    0.5
}

pub fn occupation_dimer(k: f64) -> f64 {
    0.5 * (1.0 - k.cos())
}

/// Tilted-ferromagnet occupation `(1 + cos Θ_k)/2`.
pub fn occupation_tilted(k: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::InvalidInput(format!("tilt angle {theta} outside (0, pi)")));
    }
    let c = theta.cos();
    let den = tilted_denominator(k, theta)?;
    Ok((0.5 * (1.0 + (2.0 * c - (1.0 + c * c) * k.cos()) / den)).clamp(0.0, 1.0))
}

/// Pair entropy density: Von Neumann for `alpha == 1`, Rényi otherwise.
pub fn pair_entropy(n: f64, alpha: f64) -> f64 {
    let n = n.clamp(0.0, 1.0);
    if alpha == 1.0 {
        xlogx_neg(n) + xlogx_neg(1.0 - n)
    } else {
        ((1.0 - n).powf(alpha) + n.powf(alpha)).ln() / (1.0 - alpha)
    }
}

fn xlogx_neg(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

fn wrap(k: f64) -> f64 {
    if k < -PI {
        k + 2.0 * PI
    } else if k > PI {
        k - 2.0 * PI
    } else {
        k
    }
}

fn interpolate(ks: &[f64], ns: &[f64], k: f64) -> f64 {
    if k <= ks[0] {
        return ns[0];
    }
    let last = ks.len() - 1;
    if k >= ks[last] {
        return ns[last];
    }
    let i = ks.partition_point(|&x| x <= k) - 1;
    let f = (k - ks[i]) / (ks[i + 1] - ks[i]);
    ns[i] + f * (ns[i + 1] - ns[i])
}

/// An initial state: its occupation plus the mean subsystem charge density.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchState {
    pub occupation: OccupationFunction,
    pub mean_density: f64,
}

impl QuenchState {
    pub fn new(occupation: OccupationFunction, quad: &QuadratureConfig) -> Result<Self> {
        let mean_density = match occupation.pairing() {
            Pairing::SymmetricParticleHole => 0.5,
            Pairing::SqueezedPair => integrate_bz(|k| occupation.evaluate(k), &[], quad)?.value,
        };
        Ok(Self { occupation, mean_density })
    }

    /// Resolves `neel`, `dimer`, `dimer-flipped`, `tilted:<theta>` or `custom:<file>`.
    ///
    /// Custom files hold `k,n` rows; the pairing is inferred from the data
    /// (particle-hole symmetry is tried first).
    pub fn from_name(name: &str, quad: &QuadratureConfig) -> Result<Self> {
        let occupation = match name {
            "neel" => OccupationFunction::neel(),
            "dimer" => OccupationFunction::dimer(),
            "dimer-flipped" => OccupationFunction::dimer_flipped(),
            _ => {
                if let Some(theta) = name.strip_prefix("tilted:") {
                    let theta: f64 =
                        theta.parse().map_err(|_| Error::InvalidInput(format!("bad tilt angle in '{name}'")))?;
                    OccupationFunction::tilted(theta)?
                } else if let Some(path) = name.strip_prefix("custom:") {
                    load_custom(Path::new(path))?
                } else {
                    return Err(Error::InvalidInput(format!("unknown state '{name}'")));
                }
            }
        };
        Self::new(occupation, quad)
    }

    pub fn pairing(&self) -> Pairing {
        self.occupation.pairing()
    }
}

fn load_custom(path: &Path) -> Result<OccupationFunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let mut ks = Vec::new();
    let mut ns = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
            return Err(Error::InvalidInput(format!("malformed row '{line}' in {}", path.display())));
        };
        // A non-numeric first row is treated as a header.
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(k), Ok(n)) => {
                ks.push(k);
                ns.push(n);
            }
            _ if ks.is_empty() => continue,
            _ => return Err(Error::InvalidInput(format!("malformed row '{line}' in {}", path.display()))),
        }
    }
    let label = format!("custom:{}", path.display());
    let symmetric = OccupationFunction::from_table(ks.clone(), ns.clone(), Pairing::SymmetricParticleHole, &label)?;
    if symmetric.check_pairing().is_ok() {
        return Ok(symmetric);
    }
    let squeezed = OccupationFunction::from_table(ks, ns, Pairing::SqueezedPair, &label)?;
    squeezed.check_pairing()?;
    Ok(squeezed)
}
