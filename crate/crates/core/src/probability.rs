//! Statistics of measurement outcomes and Monte-Carlo averages over them.
//!
//! Outcomes are drawn on the integer charge lattice: a step with continuous
//! law `F` yields the integer `j` with probability `F(j + ½ − c) − F(j − ½ − c)`,
//! which is exactly the law of rounding a continuous draw to the nearest
//! integer. Infeasible sequences are rejected as a whole.
//!
//! Sample `i` is drawn from the ChaCha8 stream `seed_from_u64(seed)` with
//! stream index `i / 4096`, so results do not depend on the worker count.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::counting::{kink_speeds, step_weights, Layout, Schedule};
use crate::entropy::{entropy_after, EntropyOptions, EntropyReport};
use crate::error::{Error, Result};
use crate::fluctuations::{variance_squeezed, variance_symmetric};
use crate::quadrature::{integrate, integrate_bz, speed_kinks, QuadratureConfig};
use crate::saddle::feasibility;
use crate::states::{velocity, Pairing, QuenchState};

/// Samples drawn from one RNG stream.
pub const CHUNK: usize = 4096;

/// Hard cap on rejected sequences in one call to [`sample_outcomes`].
pub const MAX_REJECTIONS: u64 = 1_000_000;

/// Smallest accepted Monte-Carlo sample count.
pub const MIN_SAMPLES: usize = 100;

/// Gaussian tables extend this many standard deviations past the center.
const GAUSSIAN_REACH: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistributionKind {
    GaussianSingle,
    GaussianChain,
    NeelExact,
}

/// Joint law of the outcomes `q_1, …, q_m` of one protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub kind: DistributionKind,
    /// Mean charge before the first measurement.
    pub center: f64,
    /// Variance of each charge step; unused by `NeelExact`.
    pub step_variances: Vec<f64>,
    pub tau: f64,
    pub ell: f64,
    pub pairing: Pairing,
    steps: usize,
    neel_norm: f64,
}

impl OutcomeDistribution {
    pub fn gaussian_single(center: f64, variance: f64, tau: f64, ell: f64, pairing: Pairing) -> Result<Self> {
        Self::gaussian(DistributionKind::GaussianSingle, center, vec![variance], tau, ell, pairing)
    }

    pub fn gaussian_chain(center: f64, step_variances: Vec<f64>, tau: f64, ell: f64, pairing: Pairing) -> Result<Self> {
        Self::gaussian(DistributionKind::GaussianChain, center, step_variances, tau, ell, pairing)
    }

    fn gaussian(
        kind: DistributionKind,
        center: f64,
        step_variances: Vec<f64>,
        tau: f64,
        ell: f64,
        pairing: Pairing,
    ) -> Result<Self> {
        check_geometry(center, tau, ell)?;
        if step_variances.is_empty() {
            return Err(Error::InvalidInput("a distribution needs at least one step".into()));
        }
        if step_variances.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("step variances must be finite and non-negative".into()));
        }
        let steps = step_variances.len();
        Ok(Self { kind, center, step_variances, tau, ell, pairing, steps, neel_norm: 1.0 })
    }

    /// Néel outcomes for `m` measurements, each step with the entropic law of
    /// width `2τ/π`, normalised by quadrature.
    pub fn neel_exact(tau: f64, ell: f64, center: f64, m: usize, cfg: &QuadratureConfig) -> Result<Self> {
        check_geometry(center, tau, ell)?;
        if m == 0 {
            return Err(Error::InvalidInput("a distribution needs at least one step".into()));
        }
        if !(tau > 0.0) {
            return Err(Error::InvalidInput("the Néel law needs τ > 0".into()));
        }
        let h = 2.0 * tau / PI;
        let norm = integrate(|x| neel_weight(x, h), -h, h, &[0.0], cfg)?.value;
        Ok(Self {
            kind: DistributionKind::NeelExact,
            center,
            step_variances: vec![tau / PI; m],
            tau,
            ell,
            pairing: Pairing::SymmetricParticleHole,
            steps: m,
            neel_norm: norm,
        })
    }

    /// Saddle-point Gaussian law of a protocol.
    ///
    /// Symmetric states give one step of variance `σ_τ²`, or a chain whose
    /// step variances integrate the per-step weights against `n(1 − n)`.
    /// Squeezed states support a single measurement.
    pub fn for_protocol(protocol: &Protocol) -> Result<Self> {
        let Protocol { state, ell, tau, m, .. } = protocol;
        let (ell, tau, m) = (*ell, *tau, *m);
        let cfg = &protocol.options.quadrature;
        let occ = &state.occupation;
        let center = state.mean_density * ell;
        match (state.pairing(), m) {
            (_, 0) => Err(Error::InvalidInput("a protocol needs at least one measurement".into())),
            (Pairing::SymmetricParticleHole, 1) => {
                let var = variance_symmetric(tau, ell, occ, cfg)?.value;
                Self::gaussian_single(center, var, tau, ell, Pairing::SymmetricParticleHole)
            }
            (Pairing::SymmetricParticleHole, _) => {
                let schedule = Schedule::new(ell, tau, m, m as f64 * tau)?;
                let kinks = speed_kinks(&kink_speeds(&schedule, &Layout::standard(ell)));
                let vars = (0..m)
                    .map(|l| {
                        Ok(integrate_bz(|k| step_weights(&schedule, velocity(k))[l] * occ.fluctuation(k), &kinks, cfg)?
                            .value)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::gaussian_chain(center, vars, tau, ell, Pairing::SymmetricParticleHole)
            }
            (Pairing::SqueezedPair, 1) => {
                let var = variance_squeezed(tau, ell, occ, cfg)?.value;
                Self::gaussian_single(center, var, tau, ell, Pairing::SqueezedPair)
            }
            (Pairing::SqueezedPair, _) => {
                Err(Error::Unsupported("outcome statistics of repeated squeezed measurements".into()))
            }
        }
    }

    /// Number of measurements.
    pub fn steps(&self) -> usize {
        self.steps
    }

    fn step_density(&self, l: usize, dq: f64) -> Result<f64> {
        match self.kind {
            DistributionKind::NeelExact => {
                let h = 2.0 * self.tau / PI;
                Ok(if dq.abs() <= h { neel_weight(dq, h) / self.neel_norm } else { 0.0 })
            }
            _ => {
                let var = self.step_variances[l];
                if var == 0.0 {
                    return Err(Error::Domain("a zero-variance step has no density".into()));
                }
                Ok((-dq * dq / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
            }
        }
    }

    /// Step law `F(b) − F(a)` on the interval `[a, b]`.
    fn step_mass(&self, l: usize, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
        match self.kind {
            DistributionKind::NeelExact => {
                let h = 2.0 * self.tau / PI;
                let (a, b) = (a.max(-h), b.min(h));
                if a >= b {
                    return Ok(0.0);
                }
                Ok(integrate(|x| neel_weight(x, h), a, b, &[], cfg)?.value / self.neel_norm)
            }
            _ => {
                let s = self.step_variances[l].sqrt() * SQRT_2;
                if s == 0.0 {
                    return Ok(if a <= 0.0 && 0.0 < b { 1.0 } else { 0.0 });
                }
                Ok(0.5 * (erfc(a / s) - erfc(b / s)))
            }
        }
    }

    fn step_reach(&self, l: usize) -> f64 {
        match self.kind {
            DistributionKind::NeelExact => 2.0 * self.tau / PI,
            _ => GAUSSIAN_REACH * self.step_variances[l].sqrt(),
        }
    }

    /// Integer-lattice table of step `l` around the continuous offset `c`.
    fn step_table(&self, l: usize, c: f64, cfg: &QuadratureConfig) -> Result<StepTable> {
        let reach = self.step_reach(l);
        let lo = (c - reach).floor() as i64 - 1;
        let hi = (c + reach).ceil() as i64 + 1;
        let mut cumulative = Vec::with_capacity((hi - lo + 1) as usize);
        let mut acc = 0.0;
        for j in lo..=hi {
            let x = j as f64 - c;
            acc += self.step_mass(l, x - 0.5, x + 0.5, cfg)?;
            cumulative.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::Sampling("step law has no mass on the integer lattice".into()));
        }
        Ok(StepTable { first: lo, cumulative })
    }
}

fn check_geometry(center: f64, tau: f64, ell: f64) -> Result<()> {
    if !(ell > 0.0 && ell.is_finite()) || !(tau >= 0.0 && tau.is_finite()) || !center.is_finite() {
        return Err(Error::InvalidInput("need finite ℓ > 0, τ ≥ 0 and a finite center".into()));
    }
    Ok(())
}

/// Unnormalised Néel step weight `exp{(x − h) log(1 − x/h) − (x + h) log(1 + x/h)}`.
fn neel_weight(x: f64, h: f64) -> f64 {
    let u = x / h;
    let xlogy = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * b.ln() };
    (xlogy(x - h, 1.0 - u) - xlogy(x + h, 1.0 + u)).exp()
}

struct StepTable {
    first: i64,
    cumulative: Vec<f64>,
}

impl StepTable {
    fn draw(&self, rng: &mut ChaCha8Rng) -> i64 {
        let total = *self.cumulative.last().expect("table is non-empty");
        let u = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1);
        self.first + idx as i64
    }
}

/// Joint density of the outcome sequence (one entry per measurement).
pub fn outcome_pdf(dist: &OutcomeDistribution, q_seq: &[f64]) -> Result<f64> {
    if q_seq.len() != dist.steps {
        return Err(Error::InvalidInput(format!("expected {} outcomes, got {}", dist.steps, q_seq.len())));
    }
    let mut prev = dist.center;
    let mut density = 1.0;
    for (l, &q) in q_seq.iter().enumerate() {
        density *= dist.step_density(l, q - prev)?;
        prev = q;
    }
    Ok(density)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub sequences: Vec<Vec<i64>>,
    pub rejections: u64,
}

fn is_feasible(dist: &OutcomeDistribution, seq: &[i64]) -> bool {
    let mut prev = dist.center;
    let dq: Vec<f64> = seq
        .iter()
        .map(|&q| {
            let d = q as f64 - prev;
            prev = q as f64;
            d
        })
        .collect();
    if dist.pairing == Pairing::SqueezedPair && seq.iter().any(|&q| q <= 0 || q as f64 >= dist.ell) {
        return false;
    }
    feasibility(&dq, dist.tau, dist.ell, dist.pairing).feasible()
}

/// Draws `count` feasible integer outcome sequences.
pub fn sample_outcomes(
    seed: u64,
    dist: &OutcomeDistribution,
    count: usize,
    cfg: &QuadratureConfig,
) -> Result<SampleBatch> {
    let first = dist.step_table(0, dist.center - dist.center.round(), cfg)?;
    let base = dist.center.round() as i64;
    let rest = (1..dist.steps).map(|l| dist.step_table(l, 0.0, cfg)).collect::<Result<Vec<_>>>()?;
    let chunks = count.div_ceil(CHUNK);
    let results: Vec<(Vec<Vec<i64>>, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = CHUNK.min(count - c * CHUNK);
            let mut out = Vec::with_capacity(n);
            let mut rejections = 0u64;
            while out.len() < n {
                let mut q = base + first.draw(&mut rng);
                let mut seq = vec![q];
                for table in &rest {
                    q += table.draw(&mut rng);
                    seq.push(q);
                }
                if is_feasible(dist, &seq) {
                    out.push(seq);
                } else {
                    rejections += 1;
                    if rejections > MAX_REJECTIONS {
                        break;
                    }
                }
            }
            (out, rejections)
        })
        .collect();
    let rejections: u64 = results.iter().map(|r| r.1).sum();
    if rejections > MAX_REJECTIONS {
        return Err(Error::Sampling(format!("more than {MAX_REJECTIONS} infeasible draws were rejected")));
    }
    let sequences = results.into_iter().flat_map(|r| r.0).collect();
    Ok(SampleBatch { sequences, rejections })
}

/// A measurement protocol: state, subsystem, measurement times and final time.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub state: QuenchState,
    pub ell: f64,
    pub tau: f64,
    pub m: usize,
    pub t: f64,
    pub options: EntropyOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub samples: usize,
    pub unique_outcomes: usize,
    pub rejections: u64,
    pub baseline: f64,
    pub mean: f64,
    pub stderr: f64,
    /// Mean and standard error of the quantum corrections alone.
    pub quantum_mean: f64,
    pub quantum_stderr: f64,
}

impl MonteCarloEstimate {
    /// Mean total minus the unmeasured baseline.
    pub fn correction(&self) -> f64 {
        self.mean - self.baseline
    }
}

/// Averages the entropy over outcomes drawn from the protocol's Gaussian law.
pub fn monte_carlo_average(protocol: &Protocol, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    let dist = OutcomeDistribution::for_protocol(protocol)?;
    monte_carlo_average_with(protocol, &dist, samples, seed)
}

/// Averages the entropy over outcomes drawn from `dist`.
///
/// Each distinct outcome sequence is evaluated once.
pub fn monte_carlo_average_with(
    protocol: &Protocol,
    dist: &OutcomeDistribution,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    if dist.steps != protocol.m {
        return Err(Error::InvalidInput("distribution and protocol disagree on the number of measurements".into()));
    }
    let batch = sample_outcomes(seed, dist, samples, &protocol.options.quadrature)?;
    if batch.rejections as f64 > 0.01 * samples as f64 {
        return Err(Error::Sampling(format!("{} of {samples} draws were infeasible after rounding", batch.rejections)));
    }
    let mut counts: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    for seq in batch.sequences {
        *counts.entry(seq).or_default() += 1;
    }
    let unique: Vec<(Vec<i64>, usize)> = counts.into_iter().collect();
    let reports: Vec<EntropyReport> = unique
        .par_iter()
        .map(|(seq, _)| {
            let q: Vec<f64> = seq.iter().map(|&x| x as f64).collect();
            entropy_after(protocol.t, protocol.tau, protocol.ell, &q, &protocol.state, &protocol.options)
        })
        .collect::<Result<_>>()?;
    let weights: Vec<f64> = unique.iter().map(|(_, c)| *c as f64 / samples as f64).collect();
    let totals: Vec<f64> = reports.iter().map(|r| r.total).collect();
    let quantum: Vec<f64> = reports.iter().map(EntropyReport::quantum_total).collect();
    let (mean, stderr) = weighted_mean_stderr(&weights, &totals, samples);
    let (quantum_mean, quantum_stderr) = weighted_mean_stderr(&weights, &quantum, samples);
    Ok(MonteCarloEstimate {
        samples,
        unique_outcomes: unique.len(),
        rejections: batch.rejections,
        baseline: reports[0].baseline,
        mean,
        stderr,
        quantum_mean,
        quantum_stderr,
    })
}

fn weighted_mean_stderr(weights: &[f64], values: &[f64], n: usize) -> (f64, f64) {
    let mean: f64 = weights.iter().zip(values).map(|(w, v)| w * v).sum();
    let var: f64 =
        weights.iter().zip(values).map(|(w, v)| w * (v - mean).powi(2)).sum::<f64>() * n as f64 / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddle::SaddleMode;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn protocol(name: &str, ell: f64, tau: f64, m: usize, t: f64) -> Protocol {
        let state = QuenchState::from_name(name, &cfg()).unwrap();
        Protocol { state, ell, tau, m, t, options: EntropyOptions { mode: SaddleMode::Exact, ..Default::default() } }
    }

    #[test]
    fn gaussian_mode_value() {
        let d = OutcomeDistribution::gaussian_single(50.0, 4.0, 10.0, 100.0, Pairing::SymmetricParticleHole).unwrap();
        let p = outcome_pdf(&d, &[50.0]).unwrap();
        assert!((p - 1.0 / (8.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn neel_law_integrates_to_one_and_vanishes_outside() {
        let d = OutcomeDistribution::neel_exact(30.0, 1000.0, 500.0, 1, &cfg()).unwrap();
        let h = 60.0 / PI;
        let mass = integrate(|x| outcome_pdf(&d, &[500.0 + x]).unwrap(), -h, h, &[0.0], &cfg()).unwrap().value;
        assert!((mass - 1.0).abs() < 1e-6);
        assert_eq!(outcome_pdf(&d, &[500.0 + h + 0.1]).unwrap(), 0.0);
    }

    #[test]
    fn neel_law_is_gaussian_at_small_steps() {
        let tau = 200.0;
        let d = OutcomeDistribution::neel_exact(tau, 4000.0, 0.0, 1, &cfg()).unwrap();
        let var = tau / PI;
        let sd = var.sqrt();
        let h = 2.0 * tau / PI;
        let mut x = -3.0 * sd;
        while x <= 3.0 * sd {
            let gauss = (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
            let p = outcome_pdf(&d, &[x]).unwrap();
            // Leading non-Gaussian term of the exponent is -x^4/(6h^3).
            let quartic = (-x.powi(4) / (6.0 * h.powi(3))).exp();
            assert!((p / (gauss * quartic) - 1.0).abs() < 3e-3, "x = {x}");
            if x.abs() <= 2.5 * sd {
                assert!((p / gauss - 1.0).abs() < 0.02, "x = {x}: {p} vs {gauss}");
            }
            x += 0.25 * sd;
        }
    }

    #[test]
    fn chain_factorizes() {
        let d = OutcomeDistribution::gaussian_chain(50.0, vec![3.0, 5.0], 10.0, 100.0, Pairing::SymmetricParticleHole)
            .unwrap();
        let s1 = OutcomeDistribution::gaussian_single(0.0, 3.0, 10.0, 100.0, Pairing::SymmetricParticleHole).unwrap();
        let s2 = OutcomeDistribution::gaussian_single(0.0, 5.0, 10.0, 100.0, Pairing::SymmetricParticleHole).unwrap();
        let joint = outcome_pdf(&d, &[52.0, 49.5]).unwrap();
        let product = outcome_pdf(&s1, &[2.0]).unwrap() * outcome_pdf(&s2, &[-2.5]).unwrap();
        assert!((joint / product - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = OutcomeDistribution::gaussian_single(50.0, 9.0, 30.0, 100.0, Pairing::SymmetricParticleHole).unwrap();
        let a = sample_outcomes(7, &d, 5000, &cfg()).unwrap();
        let b = sample_outcomes(7, &d, 5000, &cfg()).unwrap();
        assert_eq!(a, b);
        let c = sample_outcomes(8, &d, 5000, &cfg()).unwrap();
        assert_ne!(a.sequences, c.sequences);
    }

    #[test]
    fn chain_of_one_matches_single() {
        let single =
            OutcomeDistribution::gaussian_single(50.5, 9.0, 30.0, 100.0, Pairing::SymmetricParticleHole).unwrap();
        let chain =
            OutcomeDistribution::gaussian_chain(50.5, vec![9.0], 30.0, 100.0, Pairing::SymmetricParticleHole).unwrap();
        assert_eq!(
            sample_outcomes(3, &single, 9000, &cfg()).unwrap(),
            sample_outcomes(3, &chain, 9000, &cfg()).unwrap()
        );
    }

    #[test]
    fn sample_variance_matches_neel_variance() {
        let tau = 100.0;
        let p = protocol("neel", 1000.0, tau, 1, 200.0);
        let d = OutcomeDistribution::for_protocol(&p).unwrap();
        let n = 100_000;
        let batch = sample_outcomes(1, &d, n, &cfg()).unwrap();
        let xs: Vec<f64> = batch.sequences.iter().map(|s| s[0] as f64 - 500.0).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let expected = tau / PI;
        let se = expected * (2.0 / n as f64).sqrt();
        assert!((var - expected).abs() < 3.0 * se, "{var} vs {expected} ± {se}");
    }

    #[test]
    fn chain_increments_are_uncorrelated() {
        let d = OutcomeDistribution::gaussian_chain(
            500.0,
            vec![10.0, 20.0, 20.0],
            30.0,
            1000.0,
            Pairing::SymmetricParticleHole,
        )
        .unwrap();
        let n = 20_000;
        let batch = sample_outcomes(11, &d, n, &cfg()).unwrap();
        let steps: Vec<[f64; 3]> =
            batch.sequences.iter().map(|s| [s[0] as f64 - 500.0, (s[1] - s[0]) as f64, (s[2] - s[1]) as f64]).collect();
        let corr = |a: usize, b: usize| {
            let ma = steps.iter().map(|s| s[a]).sum::<f64>() / n as f64;
            let mb = steps.iter().map(|s| s[b]).sum::<f64>() / n as f64;
            let cov = steps.iter().map(|s| (s[a] - ma) * (s[b] - mb)).sum::<f64>();
            let va = steps.iter().map(|s| (s[a] - ma).powi(2)).sum::<f64>();
            let vb = steps.iter().map(|s| (s[b] - mb).powi(2)).sum::<f64>();
            cov / (va * vb).sqrt()
        };
        let limit = 3.0 / (n as f64).sqrt();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!(corr(a, b).abs() < limit, "corr({a},{b}) = {}", corr(a, b));
        }
    }

    #[test]
    fn rejection_enforces_the_window() {
        // Variance far above the window width forces rejections.
        let d = OutcomeDistribution::gaussian_single(50.0, 400.0, 10.0, 100.0, Pairing::SymmetricParticleHole).unwrap();
        let batch = sample_outcomes(2, &d, 1000, &cfg()).unwrap();
        let bound = 20.0 / PI;
        assert!(batch.rejections > 0);
        assert!(batch.sequences.iter().all(|s| (s[0] as f64 - 50.0).abs() <= bound));
    }

    #[test]
    fn neel_monte_carlo_matches_average() {
        let tau = 50.0;
        let p = protocol("neel", 1000.0, tau, 1, 100.0);
        let mc = monte_carlo_average(&p, 4000, 1).unwrap();
        let expected = -0.5 - 0.5 * (2.0 * tau).ln();
        assert!(
            (mc.correction() - expected).abs() < 3.0 * mc.stderr,
            "{} vs {expected} ± {}",
            mc.correction(),
            mc.stderr
        );
    }

    #[test]
    fn dimer_quantum_part() {
        let p = protocol("dimer", 1000.0, 50.0, 1, 100.0);
        let mc = monte_carlo_average(&p, 2000, 1).unwrap();
        assert!(
            (mc.quantum_mean + 0.25).abs() < 3.0 * mc.quantum_stderr,
            "{} ± {}",
            mc.quantum_mean,
            mc.quantum_stderr
        );
    }

    #[test]
    fn degenerate_distribution_gives_the_single_report() {
        let p = protocol("neel", 100.0, 10.0, 1, 20.0);
        let d = OutcomeDistribution::gaussian_single(50.0, 0.0, 10.0, 100.0, Pairing::SymmetricParticleHole).unwrap();
        let mc = monte_carlo_average_with(&p, &d, 500, 4).unwrap();
        let single = entropy_after(20.0, 10.0, 100.0, &[50.0], &p.state, &p.options).unwrap();
        assert_eq!(mc.mean, single.total);
        assert_eq!(mc.stderr, 0.0);
        assert_eq!(mc.unique_outcomes, 1);
    }

    #[test]
    fn too_few_samples() {
        let p = protocol("neel", 100.0, 10.0, 1, 20.0);
        assert!(matches!(monte_carlo_average(&p, 99, 1), Err(Error::InvalidInput(_))));
    }
}
