//! Entanglement entropy after charge measurements, assembled from the
//! quasiparticle picture.
//!
//! A report carries the unmeasured baseline `S_A(t)`, one quantum correction
//! per measurement-count pattern of the shared pairs, and the classical
//! `log N` term. The total is always the sum of the listed parts.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::counting::{
    chi_ballistic_single, chi_lone_steps, classify, kink_speeds, step_weights, FinalTag, Layout, Member, Schedule,
};
use crate::error::{Error, Result};
use crate::fluctuations::{asymmetry, variance_squeezed};
use crate::quadrature::{integrate_bz, speed_kinks, Estimate, QuadratureConfig};
use crate::saddle::{modified_split, solve_saddle_squeezed, solve_saddle_symmetric_multi, SaddleMode, SaddleSolution};
use crate::states::{velocity, OccupationFunction, Pairing, QuenchState};

/// Lattice sums switch to their Gaussian limits above this variance.
const CONTINUUM_VARIANCE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyOptions {
    pub alpha: f64,
    pub mode: SaddleMode,
    pub quadrature: QuadratureConfig,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        Self { alpha: 1.0, mode: SaddleMode::Exact, quadrature: QuadratureConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumCorrection {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCorrection {
    pub regime: String,
    /// `None` when no formula covers the regime; the total then omits it.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Sum of the quadrature error estimates behind the report.
    pub error_estimate: f64,
    pub flags: Vec<String>,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub alpha: f64,
    pub baseline: f64,
    pub quantum_corrections: Vec<QuantumCorrection>,
    pub classical_correction: ClassicalCorrection,
    pub total: f64,
    pub diagnostics: Diagnostics,
}

impl EntropyReport {
    /// Sums the parts in a fixed order: baseline, quantum terms in list order, classical.
    pub fn assemble(
        alpha: f64,
        baseline: f64,
        quantum_corrections: Vec<QuantumCorrection>,
        classical_correction: ClassicalCorrection,
        mut diagnostics: Diagnostics,
    ) -> Self {
        let mut total = baseline;
        for q in &quantum_corrections {
            total += q.value;
        }
        match classical_correction.value {
            Some(v) => total += v,
            None => push_flag(&mut diagnostics.flags, "logN-regime-unknown"),
        }
        Self { alpha, baseline, quantum_corrections, classical_correction, total, diagnostics }
    }

    pub fn quantum_total(&self) -> f64 {
        self.quantum_corrections.iter().map(|q| q.value).sum()
    }

    /// `total - baseline`.
    pub fn correction(&self) -> f64 {
        self.total - self.baseline
    }
}

fn push_flag(flags: &mut Vec<String>, flag: &str) {
    if !flags.iter().any(|f| f == flag) {
        flags.push(flag.to_string());
    }
}

/// Pair entropy from an accurate split `(n, 1 - n)`.
pub fn pair_entropy_split((n, h): (f64, f64), alpha: f64) -> f64 {
    let xlx = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    if alpha == 1.0 {
        xlx(n) + xlx(h)
    } else {
        (n.max(0.0).powf(alpha) + h.max(0.0).powf(alpha)).ln() / (1.0 - alpha)
    }
}

/// `S_A(t) = ∫ dk/2π min(2|v_k|t, ℓ) s^{(α)}[n(k)]`.
pub fn unmeasured_entropy(
    alpha: f64,
    t: f64,
    ell: f64,
    occ: &OccupationFunction,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    if !(t >= 0.0) || !(ell > 0.0) {
        return Err(Error::InvalidInput(format!("need t >= 0 and ell > 0, got t = {t}, ell = {ell}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("Renyi index must be positive, got {alpha}")));
    }
    if t == 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let kinks = speed_kinks(&[ell / (2.0 * t)]);
    integrate_bz(|k| (2.0 * velocity(k).abs() * t).min(ell) * pair_entropy_split(occ.split(k), alpha), &kinks, cfg)
}

/// How the multipliers tilt a shared pair with a given count pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TiltRule {
    /// Particle-hole pairs: only steps with exactly one member measured tilt.
    LoneSteps,
    /// Squeezed pairs: every measured member tilts.
    MemberCounts,
}

impl TiltRule {
    pub fn for_pairing(pairing: Pairing) -> Self {
        match pairing {
            Pairing::SymmetricParticleHole => Self::LoneSteps,
            Pairing::SqueezedPair => Self::MemberCounts,
        }
    }

    pub fn tilt(self, counts: &[u8], lambdas: &[f64]) -> f64 {
        counts
            .iter()
            .zip(lambdas)
            .map(|(&c, l)| match self {
                Self::LoneSteps => {
                    if c == 1 {
                        *l
                    } else {
                        0.0
                    }
                }
                Self::MemberCounts => c as f64 * l,
            })
            .sum()
    }

    /// Grouping key: patterns with the same key always receive the same tilt.
    fn key(self, counts: &[u8]) -> Vec<u8> {
        match self {
            Self::LoneSteps => counts.iter().map(|&c| (c == 1) as u8).collect(),
            Self::MemberCounts => counts.to_vec(),
        }
    }
}

/// Shared pairs at the final time by count pattern, each counted once via the
/// member inside the subsystem.
pub fn shared_patterns(v: f64, schedule: &Schedule, layout: &Layout) -> Vec<(Vec<u8>, f64)> {
    if schedule.m == 1 && *layout == Layout::standard(schedule.ell) {
        let c = chi_ballistic_single(schedule, v);
        return vec![(vec![0], c.shared[0]), (vec![1], c.shared[1]), (vec![2], c.shared[2])];
    }
    let mut acc: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    for (class, m) in classify(v, schedule, layout) {
        if class.final_tag == FinalTag::Shared && class.lone == Some(Member::Primary) && m.is_finite() {
            *acc.entry(class.counts).or_insert(0.0) += m;
        }
    }
    acc.into_iter().collect()
}

fn layout_kinks(schedule: &Schedule, layout: &Layout) -> Vec<f64> {
    speed_kinks(&kink_speeds(schedule, layout))
}

fn pattern_label(rule: TiltRule, key: &[u8]) -> String {
    match rule {
        TiltRule::LoneSteps => {
            let steps: Vec<String> =
                key.iter().enumerate().filter(|(_, &b)| b == 1).map(|(i, _)| (i + 1).to_string()).collect();
            format!("lone@{{{}}}", steps.join(","))
        }
        TiltRule::MemberCounts => {
            let c: Vec<String> = key.iter().map(u8::to_string).collect();
            format!("counts({})", c.join(","))
        }
    }
}

/// `∫ dk/2π χ_pattern(k) (s[n_ξ(k)] - s[n(k)])` for every realized pattern with a tilt.
///
/// Realized patterns are found by probing the midpoints between kink speeds,
/// where class measures are linear in `|v|`.
pub fn measurement_corrections(
    occ: &OccupationFunction,
    schedule: &Schedule,
    layout: &Layout,
    lambdas: &[f64],
    rule: TiltRule,
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<(Vec<QuantumCorrection>, f64)> {
    let mut speeds = vec![0.0];
    speeds.extend(kink_speeds(schedule, layout));
    speeds.push(1.0);
    speeds.sort_by(f64::total_cmp);
    let mut keys: BTreeMap<Vec<u8>, ()> = BTreeMap::new();
    for w in speeds.windows(2) {
        let v = 0.5 * (w[0] + w[1]);
        for (counts, m) in shared_patterns(v, schedule, layout) {
            if m > 0.0 && counts.iter().any(|&c| c > 0) && rule.key(&counts).iter().any(|&c| c > 0) {
                keys.insert(rule.key(&counts), ());
            }
        }
    }
    let kinks = layout_kinks(schedule, layout);
    let mut out = Vec::with_capacity(keys.len());
    let mut err = 0.0;
    for key in keys.into_keys() {
        let xi = rule.tilt(&key, lambdas);
        let est = if xi == 0.0 {
            Estimate::exact(0.0)
        } else {
            integrate_bz(
                |k| {
                    let split = occ.split(k);
                    let delta =
                        pair_entropy_split(modified_split(split, xi, 1.0), alpha) - pair_entropy_split(split, alpha);
                    let weight: f64 = shared_patterns(velocity(k), schedule, layout)
                        .iter()
                        .filter(|(c, _)| rule.key(c) == key)
                        .map(|(_, m)| m)
                        .sum();
                    weight * delta
                },
                &kinks,
                cfg,
            )?
        };
        err += est.error;
        out.push(QuantumCorrection { label: pattern_label(rule, &key), value: est.value });
    }
    Ok((out, err))
}

fn lattice_log_z(x: f64) -> f64 {
    if x >= CONTINUUM_VARIANCE {
        return 0.5 * (2.0 * PI * x).ln();
    }
    let jmax = (12.0 * x.sqrt()).ceil() as i64 + 1;
    (-jmax..=jmax).map(|j| (-(j * j) as f64 / (2.0 * x)).exp()).sum::<f64>().ln()
}

/// Entropy and second moment of the integer lattice Gaussian of variance parameter `x`.
fn lattice_moments(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0);
    }
    if x >= CONTINUUM_VARIANCE {
        return (0.5 * (2.0 * PI * std::f64::consts::E * x).ln(), x);
    }
    let log_z = lattice_log_z(x);
    let jmax = (12.0 * x.sqrt()).ceil() as i64 + 1;
    let (mut h, mut m2) = (0.0, 0.0);
    for j in -jmax..=jmax {
        let e = (j * j) as f64 / (2.0 * x);
        let p = (-e - log_z).exp();
        h += p * (e + log_z);
        m2 += p * (j * j) as f64;
    }
    (h, m2)
}

/// Classical `log N` term of one measurement step.
///
/// `a` is the fluctuation weight of pairs made lone by the step that have left
/// the subsystem, `b` that of lone pairs still shared, and `b_prime` the
/// Rényi-index derivative of `b`. The lattice form interpolates between
/// `-½ log(2πb) + ½ b'/b` (`a = 0`) and `0` (`b = 0`).
pub fn log_n_lattice(a: f64, b: f64, b_prime: f64) -> f64 {
    let (a, b) = (a.max(0.0), b.max(0.0));
    if a + b <= 0.0 {
        return 0.0;
    }
    let derivative = 0.5 * b_prime / (a + b);
    if b <= 0.0 {
        return derivative;
    }
    let v = a * b / (a + b);
    let (h, m2) = lattice_moments(v);
    h - m2 / (2.0 * b) - lattice_log_z(b) + derivative
}

/// Inputs of [`log_n_lattice`] for each step of a symmetric protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNInputs {
    pub a: f64,
    pub b: f64,
    pub b_prime: f64,
}

fn entropy_derivative_weight((n, h): (f64, f64)) -> f64 {
    if n <= 0.0 || h <= 0.0 {
        0.0
    } else {
        n * h * (h - n) * (n.ln() - h.ln())
    }
}

/// Per-step `log N` inputs for measurements on the standard layout.
pub fn log_n_inputs_symmetric(
    schedule: &Schedule,
    occ: &OccupationFunction,
    cfg: &QuadratureConfig,
) -> Result<(Vec<LogNInputs>, f64)> {
    let kinks = layout_kinks(schedule, &Layout::standard(schedule.ell));
    let mut out = Vec::with_capacity(schedule.m);
    let mut err = 0.0;
    for l in 0..schedule.m {
        let lone = |k: f64| chi_lone_steps(schedule, velocity(k))[l];
        let step = integrate_bz(|k| step_weights(schedule, velocity(k))[l] * occ.fluctuation(k), &kinks, cfg)?;
        let b = integrate_bz(|k| lone(k) * occ.fluctuation(k), &kinks, cfg)?;
        let bp = integrate_bz(|k| lone(k) * entropy_derivative_weight(occ.split(k)), &kinks, cfg)?;
        err += step.error + b.error + bp.error;
        out.push(LogNInputs { a: (step.value - b.value).max(0.0), b: b.value, b_prime: bp.value });
    }
    Ok((out, err))
}

fn symmetric_regime(schedule: &Schedule) -> &'static str {
    let last = schedule.m as f64 * schedule.tau;
    if schedule.t == last {
        "measurement-time"
    } else if 2.0 * schedule.t <= schedule.ell {
        "light-cone"
    } else {
        "lattice-interpolated"
    }
}

/// The `log N` term for the given protocol and its regime tag.
pub fn log_n_correction(
    schedule: &Schedule,
    state: &QuenchState,
    cfg: &QuadratureConfig,
) -> Result<(ClassicalCorrection, f64)> {
    let occ = &state.occupation;
    match occ.pairing() {
        Pairing::SymmetricParticleHole => {
            let (inputs, err) = log_n_inputs_symmetric(schedule, occ, cfg)?;
            let value = inputs.iter().map(|i| log_n_lattice(i.a, i.b, i.b_prime)).sum();
            Ok((ClassicalCorrection { regime: symmetric_regime(schedule).into(), value: Some(value) }, err))
        }
        Pairing::SqueezedPair => {
            let (t, tau, ell, m) = (schedule.t, schedule.tau, schedule.ell, schedule.m);
            let last = m as f64 * tau;
            if t >= last + 10.0 * ell {
                return Ok((ClassicalCorrection { regime: "long-time".into(), value: Some(0.0) }, 0.0));
            }
            if m == 1 && tau == 0.0 && 2.0 * t <= ell {
                return Ok((ClassicalCorrection { regime: "initial-measurement".into(), value: Some(0.0) }, 0.0));
            }
            if m == 1 && t == tau {
                let asym = asymmetry(tau, ell, occ, cfg)?;
                let var = variance_squeezed(tau, ell, occ, cfg)?;
                if !asym.exceeded && var.value > 0.0 {
                    let value = 0.5 * (asym.weight / var.value).ln();
                    return Ok((
                        ClassicalCorrection { regime: "measurement-time".into(), value: Some(value) },
                        var.error,
                    ));
                }
            }
            Ok((ClassicalCorrection { regime: "unknown".into(), value: None }, 0.0))
        }
    }
}

fn check_alpha(alpha: f64, occ: &OccupationFunction) -> Result<()> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("Renyi index must be positive, got {alpha}")));
    }
    if alpha != 1.0 && !occ.is_neel() {
        return Err(Error::Unsupported(format!(
            "measured Renyi entropies (alpha = {alpha}) are only available for the Neel state"
        )));
    }
    Ok(())
}

/// Report for any supported protocol, given solved multipliers.
fn report(
    state: &QuenchState,
    schedule: &Schedule,
    saddle: SaddleSolution,
    opts: &EntropyOptions,
) -> Result<EntropyReport> {
    let occ = &state.occupation;
    let cfg = &opts.quadrature;
    let layout = Layout::standard(schedule.ell);
    // Néel Rényi corrections are α-independent; only the baseline uses α.
    let baseline = unmeasured_entropy(opts.alpha, schedule.t, schedule.ell, occ, cfg)?;
    let rule = TiltRule::for_pairing(occ.pairing());
    let (quantum, qerr) = measurement_corrections(occ, schedule, &layout, &saddle.lambdas, rule, 1.0, cfg)?;
    let (classical, lerr) = log_n_correction(schedule, state, cfg)?;
    let mut flags = saddle.flags.clone();
    if schedule.beyond_light_cone() {
        push_flag(&mut flags, "classifier-crossover");
    }
    let diagnostics = Diagnostics { error_estimate: baseline.error + qerr + lerr, flags, lambdas: saddle.lambdas };
    Ok(EntropyReport::assemble(opts.alpha, baseline.value, quantum, classical, diagnostics))
}

/// Charge increments `Δq_1 = q_1 - q̄`, `Δq_l = q_l - q_{l-1}`.
pub fn charge_steps(q_seq: &[f64], state: &QuenchState, ell: f64) -> Vec<f64> {
    let mut prev = state.mean_density * ell;
    q_seq
        .iter()
        .map(|&q| {
            let d = q - prev;
            prev = q;
            d
        })
        .collect()
}

fn require_pairing(state: &QuenchState, pairing: Pairing) -> Result<()> {
    if state.occupation.pairing() != pairing {
        return Err(Error::InvalidInput(format!(
            "state '{}' has {:?} pairing, this protocol needs {:?}",
            state.occupation.label(),
            state.occupation.pairing(),
            pairing
        )));
    }
    Ok(())
}

/// One measurement of charge `q` at `τ` on a particle-hole symmetric state.
pub fn entropy_symmetric_single(
    t: f64,
    tau: f64,
    ell: f64,
    q: f64,
    state: &QuenchState,
    opts: &EntropyOptions,
) -> Result<EntropyReport> {
    entropy_symmetric_multi(t, tau, ell, &[q], state, opts)
}

/// Measurements with outcomes `q_seq` at `τ, 2τ, …` on a particle-hole symmetric state.
pub fn entropy_symmetric_multi(
    t: f64,
    tau: f64,
    ell: f64,
    q_seq: &[f64],
    state: &QuenchState,
    opts: &EntropyOptions,
) -> Result<EntropyReport> {
    require_pairing(state, Pairing::SymmetricParticleHole)?;
    check_alpha(opts.alpha, &state.occupation)?;
    let schedule = Schedule::new(ell, tau, q_seq.len(), t)?;
    let dq = charge_steps(q_seq, state, ell);
    let saddle = solve_saddle_symmetric_multi(&dq, tau, ell, &state.occupation, opts.mode, &opts.quadrature)?;
    report(state, &schedule, saddle, opts)
}

/// One measurement of charge `q` at `τ` on a squeezed state.
pub fn entropy_squeezed_single(
    t: f64,
    tau: f64,
    ell: f64,
    q: f64,
    state: &QuenchState,
    opts: &EntropyOptions,
) -> Result<EntropyReport> {
    entropy_squeezed(t, tau, ell, &[q], state, opts)
}

/// Two measurements with outcomes `q1`, `q2` at `τ` and `2τ` on a squeezed state.
pub fn entropy_squeezed_double(
    t: f64,
    tau: f64,
    ell: f64,
    q1: f64,
    q2: f64,
    state: &QuenchState,
    opts: &EntropyOptions,
) -> Result<EntropyReport> {
    entropy_squeezed(t, tau, ell, &[q1, q2], state, opts)
}

fn entropy_squeezed(
    t: f64,
    tau: f64,
    ell: f64,
    q_seq: &[f64],
    state: &QuenchState,
    opts: &EntropyOptions,
) -> Result<EntropyReport> {
    require_pairing(state, Pairing::SqueezedPair)?;
    check_alpha(opts.alpha, &state.occupation)?;
    let schedule = Schedule::new(ell, tau, q_seq.len(), t)?;
    let saddle = solve_saddle_squeezed(q_seq, tau, ell, state, opts.mode, &opts.quadrature)?;
    report(state, &schedule, saddle, opts)
}

/// Dispatches on the state's pairing; `q_seq` holds absolute charges.
pub fn entropy_after(
    t: f64,
    tau: f64,
    ell: f64,
    q_seq: &[f64],
    state: &QuenchState,
    opts: &EntropyOptions,
) -> Result<EntropyReport> {
    match state.occupation.pairing() {
        Pairing::SymmetricParticleHole => entropy_symmetric_multi(t, tau, ell, q_seq, state, opts),
        Pairing::SqueezedPair => entropy_squeezed(t, tau, ell, q_seq, state, opts),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedCorrection {
    /// Outcome-averaged configuration (quantum) part, at second order in `Δq`.
    pub configuration: f64,
    pub classical: ClassicalCorrection,
    pub total: f64,
}

/// Outcome-averaged correction `⟨S_A(t|q)⟩ - S_A(t)` for `m` symmetric measurements.
///
/// Per step, `(1/2σ_l²) ∫ χ^{(1,l)} [−ν + ν(1 − 2n) log((1 − n)/n)]` with the
/// step variance `σ_l²`, plus the outcome-independent `log N`.
pub fn averaged_correction(
    t: f64,
    tau: f64,
    ell: f64,
    m: usize,
    state: &QuenchState,
    cfg: &QuadratureConfig,
) -> Result<AveragedCorrection> {
    require_pairing(state, Pairing::SymmetricParticleHole)?;
    let schedule = Schedule::new(ell, tau, m, t)?;
    let occ = &state.occupation;
    let kinks = layout_kinks(&schedule, &Layout::standard(ell));
    let mut configuration = 0.0;
    for l in 0..m {
        let step = integrate_bz(|k| step_weights(&schedule, velocity(k))[l] * occ.fluctuation(k), &kinks, cfg)?.value;
        if step <= 0.0 {
            return Err(Error::Regime(format!("step {} has no charge fluctuations to average over", l + 1)));
        }
        let integral = integrate_bz(
            |k| {
                let (n, h) = occ.split(k);
                let nu = n * h;
                let skew = if n > 0.0 && h > 0.0 { nu * (h - n) * (h.ln() - n.ln()) } else { 0.0 };
                chi_lone_steps(&schedule, velocity(k))[l] * (skew - nu)
            },
            &kinks,
            cfg,
        )?
        .value;
        configuration += integral / (2.0 * step);
    }
    let (classical, _) = log_n_correction(&schedule, state, cfg)?;
    let total = configuration + classical.value.unwrap_or(0.0);
    Ok(AveragedCorrection { configuration, classical, total })
}
