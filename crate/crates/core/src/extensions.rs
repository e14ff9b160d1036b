//! Full counting statistics of the subsystem charge, and charge measurements
//! on regions other than the subsystem itself.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::counting::{counting_measure_in, ConfigurationClass, FinalTag, Layout, Member, Schedule};
use crate::entropy::{
    pair_entropy_split, unmeasured_entropy, ClassicalCorrection, Diagnostics, EntropyReport, QuantumCorrection,
};
use crate::error::{Error, Result};
use crate::intervals::IntervalSet;
use crate::quadrature::{integrate_bz, integrate_bz_scaled, speed_kinks, QuadratureConfig};
use crate::saddle::{modified_split, solve_saddle_squeezed, SaddleMode};
use crate::states::{velocity, OccupationFunction, Pairing, QuenchState};

/// Regions shorter than this (in sites) are flagged as outside hydrodynamics.
pub const HYDRODYNAMIC_MIN_LENGTH: f64 = 10.0;

/// `log(h + n e^{iφ})` for a split with `n + h = 1`, continuous in `φ` from
/// `φ = 0`, returned as `(residual, winding)` with the log equal to
/// `residual + i·winding`.
///
/// When `n > h` the circle winds around the origin and the winding phase is `φ`.
fn log_circle(n: f64, h: f64, phi: f64) -> (Complex64, f64) {
    let modulus = if phi.cos() >= 0.0 {
        let half = (0.5 * phi).sin();
        0.5 * (-4.0 * n * h * half * half).ln_1p()
    } else {
        let half = (0.5 * phi).cos();
        0.5 * ((n - h) * (n - h) + 4.0 * n * h * half * half).ln()
    };
    if n > h {
        let r = h / n;
        (Complex64::new(modulus, (-r * phi.sin()).atan2(1.0 + r * phi.cos())), phi)
    } else {
        let r = if h > 0.0 { n / h } else { 0.0 };
        (Complex64::new(modulus, (r * phi.sin()).atan2(1.0 + r * phi.cos())), 0.0)
    }
}

fn log_circle_full(n: f64, h: f64, phi: f64) -> Complex64 {
    let (z, w) = log_circle(n, h, phi);
    z + Complex64::new(0.0, w)
}

/// Momenta where `n(k) = 1/2`; the winding of `log_circle` changes there.
fn half_filling_points(occ: &OccupationFunction) -> Vec<f64> {
    const GRID: usize = 1024;
    let g = |k: f64| {
        let (n, h) = occ.split(k);
        n - h
    };
    let ks: Vec<f64> = (0..=GRID).map(|i| -PI + 2.0 * PI * i as f64 / GRID as f64).collect();
    let mut out = Vec::new();
    for w in ks.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (ga, gb) = (g(a), g(b));
        if gb == 0.0 && ga != 0.0 {
            out.push(b);
        }
        if ga * gb >= 0.0 {
            continue;
        }
        for _ in 0..64 {
            let mid = 0.5 * (a + b);
            if g(mid) * ga > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

fn integrate_complex(f: impl Fn(f64) -> Complex64, breaks: &[f64], cfg: &QuadratureConfig) -> Result<Complex64> {
    let re = integrate_bz(|k| f(k).re, breaks, cfg)?.value;
    let im = integrate_bz_scaled(|k| f(k).im, breaks, cfg, re.abs())?.value;
    let z = Complex64::new(re, im);
    if !z.is_finite() {
        return Err(Error::Domain("the generating function vanishes at this counting field".into()));
    }
    Ok(z)
}

/// Logarithm of the charge generating function `log ⟨e^{iβQ_A}⟩` at time `τ < ℓ/2`.
///
/// Symmetric states: `iβℓ/2 + 2τ ∫ dk/2π |v_k| log(n e^{iβ/2} + (1 − n) e^{−iβ/2})`.
/// Squeezed states: `(ℓ/2) ∫ dk/2π log(n e^{2iβ} + 1 − n)
/// + τ ∫ dk/2π |v_k| log[(n e^{iβ} + 1 − n)² / (n e^{2iβ} + 1 − n)]`.
pub fn fcs_generating_function(
    beta: f64,
    tau: f64,
    ell: f64,
    occ: &OccupationFunction,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    if !(beta.abs() <= PI) {
        return Err(Error::InvalidInput(format!("counting field must lie in [-π, π], got {beta}")));
    }
    if !(ell > 0.0) || !(tau >= 0.0) {
        return Err(Error::InvalidInput(format!("need ℓ > 0 and τ ≥ 0, got ℓ = {ell}, τ = {tau}")));
    }
    if !(2.0 * tau < ell) {
        return Err(Error::Regime(format!("generating-function closed forms need τ < ℓ/2, got τ = {tau}, ℓ = {ell}")));
    }
    if beta == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let breaks = half_filling_points(occ);
    match occ.pairing() {
        Pairing::SymmetricParticleHole => {
            let body = integrate_complex(
                |k| {
                    let (n, h) = occ.split(k);
                    velocity(k).abs() * (log_circle_full(n, h, beta) - Complex64::new(0.0, 0.5 * beta))
                },
                &breaks,
                cfg,
            )?;
            Ok(Complex64::new(0.0, 0.5 * beta * ell) + 2.0 * tau * body)
        }
        Pairing::SqueezedPair => {
            let initial = integrate_complex(
                |k| {
                    let (n, h) = occ.split(k);
                    log_circle_full(n, h, 2.0 * beta)
                },
                &breaks,
                cfg,
            )?;
            let crossed = integrate_complex(
                |k| {
                    let (n, h) = occ.split(k);
                    // The winding phases cancel exactly.
                    velocity(k).abs() * (2.0 * log_circle(n, h, beta).0 - log_circle(n, h, 2.0 * beta).0)
                },
                &breaks,
                cfg,
            )?;
            Ok(0.5 * ell * initial + tau * crossed)
        }
    }
}

/// `F₁(β)` on `points` equally spaced counting fields covering `[−π, π]`.
pub fn fcs_sweep(
    points: usize,
    tau: f64,
    ell: f64,
    occ: &OccupationFunction,
    cfg: &QuadratureConfig,
) -> Result<Vec<(f64, Complex64)>> {
    if points < 2 {
        return Err(Error::InvalidInput("a sweep needs at least two points".into()));
    }
    (0..points)
        .map(|i| {
            let beta = -PI + 2.0 * PI * i as f64 / (points - 1) as f64;
            Ok((beta, fcs_generating_function(beta, tau, ell, occ, cfg)?))
        })
        .collect()
}

/// Where the charge is measured, relative to `A = [0, ℓ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "kebab-case")]
pub enum MeasuredRegion {
    SubsystemA,
    /// The rest of a system of `total_length` sites.
    ComplementOfA {
        total_length: f64,
    },
    /// `B = [ℓ + d, ℓ + d + ℓ_B]`.
    DisjointB {
        distance: f64,
        length: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub ell: f64,
    pub region: MeasuredRegion,
}

impl GeometrySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return Err(Error::InvalidInput(format!("subsystem length must be positive, got {}", self.ell)));
        }
        match self.region {
            MeasuredRegion::SubsystemA => Ok(()),
            MeasuredRegion::ComplementOfA { total_length } => {
                if !(total_length > self.ell && total_length.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "total length {total_length} must exceed the subsystem length {}",
                        self.ell
                    )));
                }
                Ok(())
            }
            MeasuredRegion::DisjointB { distance, length } => {
                if !(distance >= 0.0 && distance.is_finite()) || !(length > 0.0 && length.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "need d ≥ 0 and ℓ_B > 0, got d = {distance}, ℓ_B = {length}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Number of sites whose charge is measured.
    pub fn measured_length(&self) -> f64 {
        match self.region {
            MeasuredRegion::SubsystemA => self.ell,
            MeasuredRegion::ComplementOfA { total_length } => total_length - self.ell,
            MeasuredRegion::DisjointB { length, .. } => length,
        }
    }

    /// Classifier layout. The complement is taken as the whole line minus `A`,
    /// which is accurate while pairs have not wrapped around the system.
    pub fn layout(&self) -> Layout {
        let a = IntervalSet::interval(0.0, self.ell);
        let measured = match self.region {
            MeasuredRegion::SubsystemA => a.clone(),
            MeasuredRegion::ComplementOfA { .. } => a.complement(),
            MeasuredRegion::DisjointB { distance, length } => {
                IntervalSet::interval(self.ell + distance, self.ell + distance + length)
            }
        };
        Layout { measured, subsystem: a }
    }

    fn too_small(&self) -> bool {
        let small = |x: f64| x < HYDRODYNAMIC_MIN_LENGTH;
        match self.region {
            MeasuredRegion::SubsystemA => small(self.ell),
            MeasuredRegion::ComplementOfA { total_length } => small(self.ell) || small(total_length - self.ell),
            MeasuredRegion::DisjointB { distance, length } => {
                small(self.ell) || small(length) || (distance > 0.0 && small(distance))
            }
        }
    }
}

/// Shared pairs at time `t` born inside the measured region (`τ = 0` measurement),
/// in the `χ` normalization where a fully shared subsystem gives `min(2|v|t, ℓ)`.
pub fn measured_shared_chi(geom: &GeometrySpec, v: f64, t: f64) -> Result<f64> {
    let schedule = Schedule::new(geom.ell, 0.0, 1, t)?;
    Ok(shared_chi_in(&schedule, &geom.layout(), v))
}

fn shared_chi_in(schedule: &Schedule, layout: &Layout, v: f64) -> f64 {
    let raw: f64 = [Member::Primary, Member::Partner]
        .into_iter()
        .map(|lone| {
            counting_measure_in(&ConfigurationClass::new(vec![2], FinalTag::Shared, Some(lone)), v, schedule, layout)
        })
        .sum();
    0.5 * raw
}

fn geometry_kinks(geom: &GeometrySpec, t: f64) -> Vec<f64> {
    if t == 0.0 {
        return Vec::new();
    }
    let layout = geom.layout();
    let mut ends = layout.measured.endpoints();
    ends.extend(layout.subsystem.endpoints());
    let mut speeds = Vec::new();
    for (i, a) in ends.iter().enumerate() {
        for b in &ends[i + 1..] {
            let gap = (a - b).abs();
            speeds.extend_from_slice(&[gap / t, gap / (2.0 * t)]);
        }
    }
    speed_kinks(&speeds)
}

/// Entropy of `A` at time `t` after the charge `q` of the measured region was
/// found at time zero, on a squeezed state.
///
/// Pairs born inside the measured region and shared at time `t` carry the
/// tilted occupation; all others keep `n`. The outcome is the charge of the
/// measured region, whose mean is `ρ̄` times its length.
pub fn geometry_entropy(
    geom: &GeometrySpec,
    t: f64,
    q: f64,
    alpha: f64,
    state: &QuenchState,
    mode: SaddleMode,
    cfg: &QuadratureConfig,
) -> Result<EntropyReport> {
    geom.validate()?;
    if state.pairing() != Pairing::SqueezedPair {
        return Err(Error::InvalidInput(format!(
            "measurements on other regions are implemented for squeezed states, '{}' is particle-hole symmetric",
            state.occupation.label()
        )));
    }
    if alpha != 1.0 {
        return Err(Error::Unsupported(format!("Rényi index {alpha} for measurements on other regions")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("final time must be non-negative, got {t}")));
    }
    let occ = &state.occupation;
    let saddle = solve_saddle_squeezed(&[q], 0.0, geom.measured_length(), state, mode, cfg)?;
    let lambda = saddle.lambdas[0];
    let baseline = unmeasured_entropy(1.0, t, geom.ell, occ, cfg)?;
    let kinks = geometry_kinks(geom, t);
    let schedule = Schedule::new(geom.ell, 0.0, 1, t)?;
    let layout = geom.layout();
    let shift = integrate_bz(
        |k| {
            let split = occ.split(k);
            let chi = shared_chi_in(&schedule, &layout, velocity(k));
            if chi == 0.0 {
                return 0.0;
            }
            chi * (pair_entropy_split(modified_split(split, lambda, 2.0), 1.0) - pair_entropy_split(split, 1.0))
        },
        &kinks,
        cfg,
    );
    let shift = shift?;
    let mut flags = saddle.flags.clone();
    if geom.too_small() {
        flags.push("geometry-too-small".to_string());
    }
    let diagnostics = Diagnostics { error_estimate: baseline.error + shift.error, flags, lambdas: saddle.lambdas };
    Ok(EntropyReport::assemble(
        1.0,
        baseline.value,
        vec![QuantumCorrection { label: "measured-region".into(), value: shift.value }],
        ClassicalCorrection { regime: "unknown".into(), value: None },
        diagnostics,
    ))
}

/// Long-time complement-measurement entropy `ℓ ∫ dk/2π s[n_λ]`.
pub fn complement_saturation(
    geom: &GeometrySpec,
    q: f64,
    state: &QuenchState,
    mode: SaddleMode,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    geom.validate()?;
    if !matches!(geom.region, MeasuredRegion::ComplementOfA { .. }) {
        return Err(Error::InvalidInput("saturation value is defined for complement measurements".into()));
    }
    let saddle = solve_saddle_squeezed(&[q], 0.0, geom.measured_length(), state, mode, cfg)?;
    let lambda = saddle.lambdas[0];
    let occ = &state.occupation;
    Ok(geom.ell * integrate_bz(|k| pair_entropy_split(modified_split(occ.split(k), lambda, 2.0), 1.0), &[], cfg)?.value)
}
