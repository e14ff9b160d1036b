//! Exact results for the Néel state.
//!
//! With `b = 4τ/π` lone pairs per measurement, the outcome probability of a
//! charge step `Δq` is the Fourier coefficient
//! `M(Δq) = ∫ dλ/2π e^{-iΔqλ} cos^b(λ/2)`, and each measurement lowers the
//! entropy by exactly `-log M(Δq)`, for every Rényi index.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fluctuations::light_cone_length;
use crate::quadrature::{integrate, QuadratureConfig};

/// Stirling terms are flagged below this value of `min(2τ/π ± Δq)`.
pub const STIRLING_WARN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeelMethod {
    BetaClosedForm,
    FourierQuadrature,
    Stirling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeelExactResult {
    pub alpha: f64,
    pub entropy: f64,
    /// Unmeasured `S_A(t) = J_t log 2`.
    pub baseline: f64,
    /// `log M(Δq_i)` per measurement.
    pub log_moments: Vec<f64>,
    pub method: NeelMethod,
    pub flags: Vec<String>,
}

fn lone_count(tau: f64) -> f64 {
    4.0 * tau / PI
}

fn check_domain(dq: f64, tau: f64) -> Result<()> {
    let half = 2.0 * tau / PI;
    if !(tau >= 0.0) || !dq.is_finite() {
        return Err(Error::InvalidInput(format!("need tau >= 0 and finite charge, got tau = {tau}, dq = {dq}")));
    }
    if !(half + dq + 1.0 > 0.0 && half - dq + 1.0 > 0.0) {
        return Err(Error::Infeasible { index: 1, dq, bound: half + 1.0 });
    }
    Ok(())
}

/// `log M(Δq)` from log-Gamma functions.
pub fn neel_log_charged_moment(dq: f64, tau: f64) -> Result<f64> {
    check_domain(dq, tau)?;
    let b = lone_count(tau);
    let h = 0.5 * b;
    Ok(ln_gamma(b + 1.0) - b * LN_2 - ln_gamma(h + dq + 1.0) - ln_gamma(h - dq + 1.0))
}

/// `M(Δq) = 2 / (2^x x B((x+y+1)/2, (x-y+1)/2))` with `x = 4τ/π + 1`, `y = 2Δq`.
pub fn neel_charged_moment(dq: f64, tau: f64) -> Result<f64> {
    Ok(neel_log_charged_moment(dq, tau)?.exp())
}

/// `M(Δq)` by adaptive quadrature of `(1/π) ∫_0^π cos(Δqλ) cos^b(λ/2) dλ`.
pub fn neel_charged_moment_quadrature(dq: f64, tau: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput(format!("need tau >= 0, got {tau}")));
    }
    let b = lone_count(tau);
    let v = integrate(|l| (dq * l).cos() * (0.5 * l).cos().max(0.0).powf(b), 0.0, PI, &[], cfg)?.value;
    Ok(v / PI)
}

/// Terms of the large-`τ` expansion of `log M(Δq)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StirlingTerms {
    /// `-(2τ/π + Δq) log(1 + πΔq/2τ)`.
    pub entropic_plus: f64,
    /// `-(2τ/π - Δq) log(1 - πΔq/2τ)`.
    pub entropic_minus: f64,
    /// `-½ log[(π²/2τ)((2τ/π)² - Δq²)]`.
    pub log_sqrt: f64,
    /// Set when `min(2τ/π ± Δq) < 10`.
    pub warning: bool,
}

impl StirlingTerms {
    pub fn total(&self) -> f64 {
        self.entropic_plus + self.entropic_minus + self.log_sqrt
    }
}

pub fn stirling_expansion(dq: f64, tau: f64) -> Result<StirlingTerms> {
    let h = 2.0 * tau / PI;
    if !(tau > 0.0 && dq.abs() < h) {
        return Err(Error::Domain(format!("Stirling expansion needs |dq| < 2 tau / pi, got dq = {dq}, tau = {tau}")));
    }
    let x = dq / h;
    Ok(StirlingTerms {
        entropic_plus: -(h + dq) * x.ln_1p(),
        entropic_minus: -(h - dq) * (-x).ln_1p(),
        log_sqrt: -0.5 * (PI * PI / (2.0 * tau) * (h * h - dq * dq)).ln(),
        warning: (h - dq.abs()) < STIRLING_WARN,
    })
}

/// Rényi entropy of the lone-pair sector rebuilt from moments at index `α`:
/// `(1/(1-α)) [-αb log 2 + log C(b, b/2 + Δq) - α log M(Δq)]`.
pub fn neel_lone_renyi(alpha: f64, dq: f64, tau: f64) -> Result<f64> {
    let b = lone_count(tau);
    let c = 0.5 * b + dq;
    let log_binom = ln_gamma(b + 1.0) - ln_gamma(c + 1.0) - ln_gamma(b - c + 1.0);
    let log_m = neel_log_charged_moment(dq, tau)?;
    if alpha == 1.0 {
        return Ok(b * LN_2 + log_m);
    }
    Ok((-alpha * b * LN_2 + log_binom - alpha * log_m) / (1.0 - alpha))
}

/// Exact entropy after measurements with charge steps `dq_seq` at `τ, 2τ, …`.
///
/// Exact while every pair made lone by a measurement is still shared at `t`,
/// i.e. `t + mτ ≤ ℓ`; `t = ∞` returns the saturated `ℓ log 2`.
pub fn neel_entropy_exact(
    t: f64,
    tau: f64,
    ell: f64,
    dq_seq: &[f64],
    alpha: f64,
    method: NeelMethod,
    cfg: &QuadratureConfig,
) -> Result<NeelExactResult> {
    let m = dq_seq.len();
    if m == 0 || !(ell > 0.0) || !(alpha > 0.0) {
        return Err(Error::InvalidInput("need at least one outcome, ell > 0 and alpha > 0".into()));
    }
    if t < m as f64 * tau {
        return Err(Error::InvalidInput(format!("final time {t} precedes the last measurement at {}", m as f64 * tau)));
    }
    let mut flags = Vec::new();
    if (lone_count(tau) - lone_count(tau).round()).abs() > 1e-12 {
        flags.push("continuum-tau".to_string());
    }
    if t == f64::INFINITY {
        return Ok(NeelExactResult {
            alpha,
            entropy: ell * LN_2,
            baseline: ell * LN_2,
            log_moments: vec![0.0; m],
            method,
            flags,
        });
    }
    if t + m as f64 * tau > ell {
        return Err(Error::Regime(format!(
            "exact Neel result holds for t + m tau <= ell, i.e. t <= {} here",
            ell - m as f64 * tau
        )));
    }
    let baseline = light_cone_length(t, ell) * LN_2;
    let mut log_moments = Vec::with_capacity(m);
    for (i, &dq) in dq_seq.iter().enumerate() {
        let v = match method {
            NeelMethod::BetaClosedForm => neel_log_charged_moment(dq, tau),
            NeelMethod::FourierQuadrature => {
                check_domain(dq, tau)?;
                let mv = neel_charged_moment_quadrature(dq, tau, cfg)?;
                if mv > 0.0 {
                    Ok(mv.ln())
                } else {
                    Err(Error::Domain(format!("charged moment {mv:e} is not positive")))
                }
            }
            NeelMethod::Stirling => stirling_expansion(dq, tau).map(|s| {
                if s.warning && !flags.iter().any(|f| f == "stirling-small-argument") {
                    flags.push("stirling-small-argument".to_string());
                }
                s.total()
            }),
        }
        .map_err(|e| match e {
            Error::Infeasible { dq, bound, .. } => Error::Infeasible { index: i + 1, dq, bound },
            other => other,
        })?;
        log_moments.push(v);
    }
    let entropy = baseline + log_moments.iter().sum::<f64>();
    Ok(NeelExactResult { alpha, entropy, baseline, log_moments, method, flags })
}

/// Exact outcome-averaged correction `Σ_Δq M log M` over integer steps, per measurement.
pub fn neel_average_correction_exact(tau: f64) -> Result<f64> {
    let h = 2.0 * tau / PI;
    let jmax = (h + 1.0).ceil() as i64;
    let mut acc = 0.0;
    for j in -jmax..=jmax {
        let dq = j as f64;
        if h + 1.0 + dq > 0.0 && h + 1.0 - dq > 0.0 {
            let lm = neel_log_charged_moment(dq, tau)?;
            acc += lm.exp() * lm;
        }
    }
    Ok(acc)
}
