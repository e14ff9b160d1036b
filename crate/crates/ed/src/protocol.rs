//! Projective charge measurements and full measurement trajectories.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decomposition::{entropy_decomposition, Decomposition};
use crate::fock::{build_state, FockVector};
use crate::simulator::Simulator;
use crate::{OracleError, Result, FORBIDDEN_PROBABILITY};

impl FockVector {
    /// Born probabilities of each charge `0..=last-first+1` on sites `[first, last]`.
    pub fn charge_probabilities(&self, first: usize, last: usize) -> Result<Vec<f64>> {
        check_block(self, first, last)?;
        let mut p = vec![0.0; last - first + 2];
        for (i, a) in self.amplitudes().iter().enumerate() {
            p[FockVector::block_charge(i, first, last) as usize] += a.norm_sqr();
        }
        Ok(p)
    }

    /// Projects sites `[first, last]` (1-based, inclusive) onto charge `q`.
    ///
    /// Returns the normalised post-measurement state and the Born probability.
    pub fn project_charge(&self, first: usize, last: usize, q: i64) -> Result<(FockVector, f64)> {
        check_block(self, first, last)?;
        let mut out = self.clone();
        let mut prob = 0.0;
        for (i, a) in out.amplitudes_mut().iter_mut().enumerate() {
            if FockVector::block_charge(i, first, last) as i64 == q {
                prob += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if prob < FORBIDDEN_PROBABILITY {
            return Err(OracleError::ForbiddenOutcome { q, probability: prob });
        }
        out.scale(1.0 / prob.sqrt());
        Ok((out, prob))
    }
}

fn check_block(psi: &FockVector, first: usize, last: usize) -> Result<()> {
    if first == 0 || first > last || last > psi.sites() {
        return Err(OracleError::InvalidInput(format!(
            "sites [{first}, {last}] are not a block of a {}-site chain",
            psi.sites()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcomes {
    /// Prescribed charges, one per measurement.
    Forced(Vec<i64>),
    /// Born-rule draws from `ChaCha8Rng::seed_from_u64(seed)`.
    Sampled { seed: u64 },
}

/// Measurements of sites `1..=ℓ` at `τ, 2τ, …, mτ`; entropies recorded at `observe`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub state: String,
    pub sites: usize,
    pub ell: usize,
    pub tau: f64,
    pub m: usize,
    pub observe: Vec<f64>,
    pub outcomes: Outcomes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementEntry {
    pub time: f64,
    pub q: i64,
    pub probability: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasurementRecord {
    pub entries: Vec<MeasurementEntry>,
}

impl MeasurementRecord {
    /// Probability of the whole outcome sequence.
    pub fn sequence_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub decomposition: Decomposition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub record: MeasurementRecord,
    pub points: Vec<TrajectoryPoint>,
    pub final_state: FockVector,
}

/// Runs one pure-state trajectory. Observations at a measurement time see the
/// post-measurement state.
pub fn run_protocol(spec: &ProtocolSpec, sim: &mut Simulator) -> Result<Trajectory> {
    if sim.sites() != spec.sites {
        return Err(OracleError::InvalidInput("simulator and protocol disagree on the chain length".into()));
    }
    if !(spec.tau >= 0.0 && spec.tau.is_finite()) {
        return Err(OracleError::InvalidInput(format!("measurement period must be non-negative, got {}", spec.tau)));
    }
    if let Outcomes::Forced(qs) = &spec.outcomes {
        if qs.len() != spec.m {
            return Err(OracleError::InvalidInput(format!("{} forced outcomes for {} measurements", qs.len(), spec.m)));
        }
    }
    let mut observe = spec.observe.clone();
    if observe.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(OracleError::InvalidInput("observation times must be finite and non-negative".into()));
    }
    observe.sort_by(f64::total_cmp);

    let mut rng = match spec.outcomes {
        Outcomes::Sampled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Outcomes::Forced(_) => None,
    };
    let mut psi = build_state(&spec.state, spec.sites)?;
    let mut now = 0.0;
    let mut record = MeasurementRecord::default();
    let mut points = Vec::with_capacity(observe.len());
    let mut next_obs = observe.into_iter().peekable();

    for l in 1..=spec.m {
        let tm = l as f64 * spec.tau;
        while let Some(&to) = next_obs.peek() {
            if to >= tm {
                break;
            }
            psi = sim.evolve(&psi, to - now)?;
            now = to;
            points.push(TrajectoryPoint { time: to, decomposition: entropy_decomposition(&psi, spec.ell)? });
            next_obs.next();
        }
        psi = sim.evolve(&psi, tm - now)?;
        now = tm;
        let q = match (&spec.outcomes, rng.as_mut()) {
            (Outcomes::Forced(qs), _) => qs[l - 1],
            (_, Some(rng)) => {
                let p = psi.charge_probabilities(1, spec.ell)?;
                let u = rng.random::<f64>() * p.iter().sum::<f64>();
                let mut acc = 0.0;
                let mut pick = p.len() - 1;
                for (q, &w) in p.iter().enumerate() {
                    acc += w;
                    if u < acc && w >= FORBIDDEN_PROBABILITY {
                        pick = q;
                        break;
                    }
                }
                pick as i64
            }
            _ => unreachable!("sampled outcomes always carry a generator"),
        };
        let (next, probability) = psi.project_charge(1, spec.ell, q)?;
        psi = next;
        record.entries.push(MeasurementEntry { time: tm, q, probability });
    }
    for to in next_obs {
        psi = sim.evolve(&psi, to - now)?;
        now = to;
        points.push(TrajectoryPoint { time: to, decomposition: entropy_decomposition(&psi, spec.ell)? });
    }
    Ok(Trajectory { record, points, final_state: psi })
}
