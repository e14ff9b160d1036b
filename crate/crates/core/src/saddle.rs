//! Saddle-point equations for measurement outcomes.
//!
//! Sign convention: `λ > 0` enriches the occupation, so an outcome above the
//! mean charge produces a positive multiplier.

use serde::{Deserialize, Serialize};

use crate::counting::{count_patterns, kink_speeds, step_weights, Layout, Schedule};
use crate::error::{Error, Result};
use crate::fluctuations::{light_cone_length, variance_squeezed};
use crate::quadrature::{integrate_bz, speed_kinks, QuadratureConfig};
use crate::states::{velocity, OccupationFunction, Pairing, QuenchState};

/// Multipliers are searched in `[-LAMBDA_LIMIT, LAMBDA_LIMIT]`.
pub const LAMBDA_LIMIT: f64 = 50.0;

/// Outcomes within this fraction of the time-delay bound are tagged unreliable.
pub const UNRELIABLE_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SaddleMode {
    #[default]
    Exact,
    Linearized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleSolution {
    /// One multiplier per measurement.
    pub lambdas: Vec<f64>,
    pub feasible: bool,
    pub mode: SaddleMode,
    pub regime: String,
    pub flags: Vec<String>,
}

impl SaddleSolution {
    /// Partial sums `Σ_{s=l}^{m} λ_s` for `l = 1..m`.
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.lambdas.len()];
        let mut acc = 0.0;
        for (i, l) in self.lambdas.iter().enumerate().rev() {
            acc += l;
            out[i] = acc;
        }
        out
    }

    fn from_partial_sums(sums: &[f64], mode: SaddleMode, regime: &str, flags: Vec<String>) -> Self {
        let lambdas = (0..sums.len()).map(|i| sums[i] - sums.get(i + 1).copied().unwrap_or(0.0)).collect();
        Self { lambdas, feasible: true, mode, regime: regime.into(), flags }
    }
}

/// `n e^{wλ} / (n e^{wλ} + 1 - n)`, evaluated through the logit to stay in `[0, 1]`.
pub fn modified_occupation(n: f64, lambda: f64, w: f64) -> f64 {
    let n = n.clamp(0.0, 1.0);
    modified_split((n, 1.0 - n), lambda, w).0
}

/// `(n_λ, 1 - n_λ)` from an accurate split `(n, 1 - n)`.
pub fn modified_split((n, h): (f64, f64), lambda: f64, w: f64) -> (f64, f64) {
    if n <= 0.0 || h <= 0.0 {
        return (n, h);
    }
    let z = n.ln() - h.ln() + w * lambda;
    let s = |z: f64| if z >= 0.0 { 1.0 / (1.0 + (-z).exp()) } else { z.exp() / (1.0 + z.exp()) };
    (s(z), s(-z))
}

/// `n_λ - n = n(1 - n)(e^{wλ} - 1) / (1 - n + n e^{wλ})`, free of cancellation.
pub fn occupation_shift((n, h): (f64, f64), lambda: f64, w: f64) -> f64 {
    let x = w * lambda;
    if n <= 0.0 || h <= 0.0 || x == 0.0 {
        return 0.0;
    }
    if x > 0.0 {
        let e = (-x).exp();
        n * h * (-(-x).exp_m1()) / (h * e + n)
    } else {
        n * h * x.exp_m1() / (h + n * x.exp())
    }
}

/// `n_λ (1 - n_λ)` from an accurate split.
pub fn modified_fluctuation(split: (f64, f64), lambda: f64, w: f64) -> f64 {
    let (a, b) = modified_split(split, lambda, w);
    a * b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepFeasibility {
    /// 1-based measurement index.
    pub index: usize,
    pub dq: f64,
    /// Largest admissible `|Δq|`; infinite when the step is unconstrained.
    pub bound: f64,
    pub feasible: bool,
    pub near_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub steps: Vec<StepFeasibility>,
}

impl Feasibility {
    pub fn feasible(&self) -> bool {
        self.steps.iter().all(|s| s.feasible)
    }

    pub fn near_boundary(&self) -> bool {
        self.steps.iter().any(|s| s.near_boundary)
    }

    /// The first violated step as an error, if any.
    pub fn check(&self) -> Result<()> {
        match self.steps.iter().find(|s| !s.feasible) {
            Some(s) => Err(Error::Infeasible { index: s.index, dq: s.dq, bound: s.bound }),
            None => Ok(()),
        }
    }
}

/// Time-delay bound of each step: half the light-cone length gained during it.
///
/// Equals `2τ/π` per step while `2mτ ≤ ℓ`.
pub fn step_bounds(tau: f64, ell: f64, m: usize) -> Vec<f64> {
    (1..=m)
        .map(|l| 0.5 * (light_cone_length(l as f64 * tau, ell) - light_cone_length((l - 1) as f64 * tau, ell)))
        .collect()
}

/// Checks every charge step against its time-delay bound.
///
/// For squeezed states the first step is unconstrained.
pub fn feasibility(dq_seq: &[f64], tau: f64, ell: f64, pairing: Pairing) -> Feasibility {
    let bounds = step_bounds(tau, ell, dq_seq.len());
    let steps = dq_seq
        .iter()
        .zip(bounds)
        .enumerate()
        .map(|(i, (&dq, bound))| {
            let bound = if i == 0 && pairing == Pairing::SqueezedPair { f64::INFINITY } else { bound };
            let tol = 1e-12 * bound.max(1.0);
            StepFeasibility {
                index: i + 1,
                dq,
                bound,
                feasible: dq.abs() <= bound + tol,
                near_boundary: dq.abs() >= (1.0 - UNRELIABLE_MARGIN) * bound,
            }
        })
        .collect();
    Feasibility { steps }
}

/// Root of a strictly increasing `g` on `[-LAMBDA_LIMIT, LAMBDA_LIMIT]`.
///
/// Bisection down to a bracket of width 1e-12, then two Newton polish steps.
/// A derivative that fails to integrate only skips the polish.
fn monotone_root(g: impl Fn(f64) -> Result<f64>, dg: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (mut lo, mut hi) = (-LAMBDA_LIMIT, LAMBDA_LIMIT);
    if g(lo)? > 0.0 || g(hi)? < 0.0 {
        return Err(Error::SaddleBoundary { limit: LAMBDA_LIMIT });
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let val = g(mid)?;
        if val == 0.0 {
            return Ok(mid);
        }
        if val < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let val = g(x)?;
        if let Ok(der) = dg(x) {
            let step = val / der;
            if der > 0.0 && step.abs() < 1e-9 {
                x -= step;
            }
        }
    }
    Ok(x)
}

fn cone_kinks(tau: f64, ell: f64, m: usize) -> Vec<f64> {
    let speeds: Vec<f64> = (1..=m).map(|l| ell / (2.0 * l as f64 * tau)).collect();
    speed_kinks(&speeds)
}

fn regime_tag(tau: f64, ell: f64, m: usize) -> &'static str {
    if 2.0 * m as f64 * tau <= ell {
        "light-cone"
    } else {
        "saturating"
    }
}

/// Exact root of `∫ weight (n_P - n) = Δq` for one symmetric step.
fn symmetric_step_root(
    dq: f64,
    weight: impl Fn(f64) -> f64 + Copy,
    kinks: &[f64],
    occ: &OccupationFunction,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if dq == 0.0 {
        return Ok(0.0);
    }
    monotone_root(
        |p| Ok(integrate_bz(|k| weight(k) * occupation_shift(occ.split(k), p, 1.0), kinks, cfg)?.value - dq),
        |p| Ok(integrate_bz(|k| weight(k) * modified_fluctuation(occ.split(k), p, 1.0), kinks, cfg)?.value),
    )
}

/// Single measurement on a particle-hole symmetric state.
pub fn solve_saddle_symmetric_single(
    dq: f64,
    tau: f64,
    ell: f64,
    occ: &OccupationFunction,
    mode: SaddleMode,
    cfg: &QuadratureConfig,
) -> Result<SaddleSolution> {
    solve_saddle_symmetric_multi(&[dq], tau, ell, occ, mode, cfg)
}

/// Successive measurements on a particle-hole symmetric state.
///
/// Step `l` fixes the partial sum `Σ_{s≥l} λ_s` from the charge increment
/// `Δq_l = q_l - q_{l-1}` and the light-cone weight gained during that step.
pub fn solve_saddle_symmetric_multi(
    dq_seq: &[f64],
    tau: f64,
    ell: f64,
    occ: &OccupationFunction,
    mode: SaddleMode,
    cfg: &QuadratureConfig,
) -> Result<SaddleSolution> {
    if dq_seq.is_empty() {
        return Err(Error::InvalidInput("no measurement outcomes given".into()));
    }
    let m = dq_seq.len();
    let feas = feasibility(dq_seq, tau, ell, Pairing::SymmetricParticleHole);
    feas.check()?;
    let schedule = Schedule::new(ell, tau, m, m as f64 * tau)?;
    let kinks = cone_kinks(tau, ell, m);
    let mut sums = Vec::with_capacity(m);
    for (l, &dq) in dq_seq.iter().enumerate() {
        let weight = move |k: f64| step_weights(&schedule, velocity(k))[l];
        let sum = match mode {
            SaddleMode::Exact => symmetric_step_root(dq, weight, &kinks, occ, cfg)?,
            SaddleMode::Linearized => {
                let var = integrate_bz(|k| weight(k) * occ.fluctuation(k), &kinks, cfg)?.value;
                if var <= 1e-14 * ell {
                    return Err(Error::Regime(format!(
                        "charge variance saturated before measurement {}; its multiplier is undetermined",
                        l + 1
                    )));
                }
                dq / var
            }
        };
        sums.push(sum);
    }
    let mut flags = Vec::new();
    if feas.near_boundary() {
        flags.push("saddle-unreliable".to_string());
    }
    Ok(SaddleSolution::from_partial_sums(&sums, mode, regime_tag(tau, ell, m), flags))
}

/// Measurement-count patterns at momentum `k` for `m` measurements on `A`.
fn patterns_at(k: f64, schedule: &Schedule) -> Vec<(Vec<u8>, f64)> {
    count_patterns(velocity(k), schedule, &Layout::standard(schedule.ell))
}

/// Measurements on a squeezed state, `m ≤ 2`.
///
/// The charge measured at step `s` is `∫ Σ_patterns ½ raw · c_s · n_ξ` with the
/// pattern tilt `ξ = Σ_r c_r λ_r`. Linearized mode solves the system at `λ = 0`.
pub fn solve_saddle_squeezed(
    q_seq: &[f64],
    tau: f64,
    ell: f64,
    state: &QuenchState,
    mode: SaddleMode,
    cfg: &QuadratureConfig,
) -> Result<SaddleSolution> {
    let m = q_seq.len();
    if m == 0 {
        return Err(Error::InvalidInput("no measurement outcomes given".into()));
    }
    if m > 2 {
        return Err(Error::Unsupported(format!(
            "squeezed-state saddle points are implemented for at most two measurements, got {m}"
        )));
    }
    let occ = &state.occupation;
    let q_bar = state.mean_density * ell;
    let mut dq_seq = vec![q_seq[0] - q_bar];
    dq_seq.extend(q_seq.windows(2).map(|w| w[1] - w[0]));
    let feas = feasibility(&dq_seq, tau, ell, Pairing::SqueezedPair);
    feas.check()?;
    if q_seq.iter().any(|&q| !(q > 0.0 && q < ell)) {
        let i = q_seq.iter().position(|&q| !(q > 0.0 && q < ell)).unwrap_or(0);
        return Err(Error::Infeasible { index: i + 1, dq: q_seq[i] - q_bar, bound: q_bar.min(ell - q_bar) });
    }
    let mut flags = Vec::new();
    if feas.near_boundary() {
        flags.push("saddle-unreliable".to_string());
    }
    let regime = regime_tag(tau, ell, m);

    if m == 1 {
        let lambda = match mode {
            SaddleMode::Linearized => {
                let var = variance_squeezed(tau, ell, occ, cfg)?.value;
                if var <= 0.0 {
                    return Err(Error::Regime("squeezed charge variance vanishes".into()));
                }
                dq_seq[0] / var
            }
            SaddleMode::Exact => {
                let kinks = cone_kinks(tau, ell, 1);
                let cone = move |k: f64| (2.0 * velocity(k).abs() * tau).min(ell);
                let dq = dq_seq[0];
                monotone_root(
                    |lam| {
                        let f = |k: f64| {
                            let n = occ.split(k);
                            (ell - cone(k)) * occupation_shift(n, lam, 2.0) + cone(k) * occupation_shift(n, lam, 1.0)
                        };
                        Ok(integrate_bz(f, &kinks, cfg)?.value - dq)
                    },
                    |lam| {
                        let f = |k: f64| {
                            let n = occ.split(k);
                            2.0 * (ell - cone(k)) * modified_fluctuation(n, lam, 2.0)
                                + cone(k) * modified_fluctuation(n, lam, 1.0)
                        };
                        Ok(integrate_bz(f, &kinks, cfg)?.value)
                    },
                )?
            }
        };
        return Ok(SaddleSolution { lambdas: vec![lambda], feasible: true, mode, regime: regime.into(), flags });
    }

    let schedule = Schedule::new(ell, tau, m, m as f64 * tau)?;
    let kinks = speed_kinks(&kink_speeds(&schedule, &Layout::standard(ell)));
    let system = |lam: &[f64]| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let mut charge = vec![0.0; m];
        let mut jac = vec![vec![0.0; m]; m];
        for s in 0..m {
            charge[s] = integrate_bz(
                |k| {
                    let n = occ.split(k);
                    patterns_at(k, &schedule)
                        .iter()
                        .map(|(c, h)| h * c[s] as f64 * modified_split(n, tilt(c, lam), 1.0).0)
                        .sum()
                },
                &kinks,
                cfg,
            )?
            .value;
            for r in s..m {
                jac[s][r] = integrate_bz(
                    |k| {
                        let n = occ.split(k);
                        patterns_at(k, &schedule)
                            .iter()
                            .map(|(c, h)| h * (c[s] * c[r]) as f64 * modified_fluctuation(n, tilt(c, lam), 1.0))
                            .sum()
                    },
                    &kinks,
                    cfg,
                )?
                .value;
                jac[r][s] = jac[s][r];
            }
        }
        Ok((charge, jac))
    };

    let (charge0, jac0) = system(&[0.0, 0.0])?;
    let rhs: Vec<f64> = (0..m).map(|s| q_seq[s] - charge0[s]).collect();
    let mut lam = solve2(&jac0, &rhs)?;
    if mode == SaddleMode::Exact {
        lam = newton2(&system, q_seq, lam, ell)?;
    }
    Ok(SaddleSolution { lambdas: lam, feasible: true, mode, regime: regime.into(), flags })
}

fn tilt(counts: &[u8], lam: &[f64]) -> f64 {
    counts.iter().zip(lam).map(|(&c, l)| c as f64 * l).sum()
}

fn solve2(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = (a[0][0].abs() + a[1][1].abs()).powi(2).max(f64::MIN_POSITIVE);
    if det.abs() <= 1e-12 * scale {
        return Err(Error::Regime("two-measurement saddle system is singular".into()));
    }
    Ok(vec![(b[0] * a[1][1] - a[0][1] * b[1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det])
}

type System<'a> = dyn Fn(&[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> + 'a;

fn newton2(system: &System<'_>, target: &[f64], start: Vec<f64>, ell: f64) -> Result<Vec<f64>> {
    let residual = |lam: &[f64]| -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
        let (q, j) = system(lam)?;
        let r: Vec<f64> = q.iter().zip(target).map(|(a, b)| a - b).collect();
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok((r, j, norm))
    };
    let mut lam = start;
    let (mut r, mut j, mut norm) = residual(&lam)?;
    for _ in 0..100 {
        if norm <= 1e-11 * ell {
            return Ok(lam);
        }
        let step = solve2(&j, &r)?;
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = lam.iter().zip(&step).map(|(l, s)| l - t * s).collect();
            if trial.iter().any(|x| x.abs() > LAMBDA_LIMIT) {
                t *= 0.5;
            } else {
                let (r2, j2, n2) = residual(&trial)?;
                if n2 < norm || t < 1e-6 {
                    lam = trial;
                    r = r2;
                    j = j2;
                    norm = n2;
                    break;
                }
                t *= 0.5;
            }
            if t < 1e-12 {
                return Err(Error::SaddleBoundary { limit: LAMBDA_LIMIT });
            }
        }
    }
    if norm <= 1e-8 * ell {
        Ok(lam)
    } else {
        Err(Error::SaddleBoundary { limit: LAMBDA_LIMIT })
    }
}
