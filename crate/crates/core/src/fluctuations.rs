//! Charge-fluctuation functionals: variances, Drude self weight, number
//! entropy and entanglement asymmetry.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_bz, speed_kinks, Estimate, QuadratureConfig};
use crate::states::{velocity, OccupationFunction};

/// `∫ dk/2π min(2|v_k| s, ℓ)` for the tight-binding band, in closed form.
pub fn light_cone_length(s: f64, ell: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if 2.0 * s <= ell {
        return 4.0 * s / PI;
    }
    let k_star = (ell / (2.0 * s)).asin();
    2.0 / PI * (2.0 * s * (1.0 - k_star.cos()) + ell * (PI / 2.0 - k_star))
}

/// `∫ dk/2π weight(k) n(k)(1 - n(k))`, splitting at the given pair speeds.
pub fn weighted_fluctuation(
    weight: impl Fn(f64) -> f64,
    speeds: &[f64],
    occ: &OccupationFunction,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    integrate_bz(|k| weight(k) * occ.fluctuation(k), &speed_kinks(speeds), cfg)
}

fn cone(k: f64, s: f64, ell: f64) -> f64 {
    (2.0 * velocity(k).abs() * s).min(ell)
}

/// `σ_τ² = ∫ dk/2π min(2|v_k|τ, ℓ) n(1 - n)`.
pub fn variance_symmetric(tau: f64, ell: f64, occ: &OccupationFunction, cfg: &QuadratureConfig) -> Result<Estimate> {
    check_times(tau, ell)?;
    weighted_fluctuation(|k| cone(k, tau, ell), &[ell / (2.0 * tau)], occ, cfg)
}

/// `σ_τ² = ∫ dk/2π [2ℓ - min(2|v_k|τ, ℓ)] n(1 - n)` for squeezed states.
pub fn variance_squeezed(tau: f64, ell: f64, occ: &OccupationFunction, cfg: &QuadratureConfig) -> Result<Estimate> {
    check_times(tau, ell)?;
    weighted_fluctuation(|k| 2.0 * ell - cone(k, tau, ell), &[ell / (2.0 * tau)], occ, cfg)
}

/// Long-time squeezed variance `σ_∞² = ℓ ∫ dk/2π n(1 - n)`.
pub fn variance_squeezed_infinite(ell: f64, occ: &OccupationFunction, cfg: &QuadratureConfig) -> Result<Estimate> {
    check_times(0.0, ell)?;
    weighted_fluctuation(|_| ell, &[], occ, cfg)
}

/// Drude self weight `D = ∫ dk/2π |v_k| n(1 - n)`.
pub fn drude_weight(occ: &OccupationFunction, cfg: &QuadratureConfig) -> Result<Estimate> {
    weighted_fluctuation(|k| velocity(k).abs(), &[], occ, cfg)
}

/// Gaussian number entropy `½ log(2πe σ²)`.
pub fn number_entropy(variance: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::Domain(format!("number entropy needs a positive variance, got {variance}")));
    }
    Ok(0.5 * (2.0 * PI * E * variance).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    /// `½ log(2πe 𝒳_τ)`, or `-∞` once `𝒳_τ` vanishes.
    pub value: f64,
    /// `𝒳_τ = 2 ∫ dk/2π [ℓ - min(2|v_k|τ, ℓ)] n(1 - n)`.
    pub weight: f64,
    /// Set when `𝒳_τ ≤ 0` and the short-time form no longer applies.
    pub exceeded: bool,
}

/// Short-time entanglement asymmetry of a squeezed state after a measurement at `τ`.
pub fn asymmetry(tau: f64, ell: f64, occ: &OccupationFunction, cfg: &QuadratureConfig) -> Result<Asymmetry> {
    check_times(tau, ell)?;
    let weight = weighted_fluctuation(|k| 2.0 * (ell - cone(k, tau, ell)), &[ell / (2.0 * tau)], occ, cfg)?.value;
    let scale = ell * 1e-13;
    if weight <= scale {
        return Ok(Asymmetry { value: f64::NEG_INFINITY, weight: weight.max(0.0), exceeded: true });
    }
    Ok(Asymmetry { value: number_entropy(weight)?, weight, exceeded: false })
}

fn check_times(tau: f64, ell: f64) -> Result<()> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be non-negative, got {tau}")));
    }
    if !(ell > 0.0) {
        return Err(Error::InvalidInput(format!("subsystem length must be positive, got {ell}")));
    }
    Ok(())
}
