//! Quasiparticle-pair configuration classes and their birth-position measures.
//!
//! A pair born at `x0` with momentum `k` has a primary member at `x0 + v_k s`
//! and a partner at `x0 - v_k s`. A configuration class records how many
//! members sit inside the measured region at each measurement time and which
//! members sit inside the subsystem `A = [0, ℓ]` at the final time. The measure
//! of a class is the length of the set of birth positions realizing it.
//!
//! Measures are reported raw, i.e. as plain lengths. The conventional `χ`
//! normalization counts a shared class once per tagged member and halves
//! untagged classes, see [`CountingResult::chi`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::IntervalSet;
use crate::states::{velocity, MAX_VELOCITY};

/// Measurement schedule: `m` measurements at `τ, 2τ, …, mτ`, final time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub ell: f64,
    pub tau: f64,
    pub m: usize,
    pub t: f64,
}

impl Schedule {
    pub fn new(ell: f64, tau: f64, m: usize, t: f64) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(Error::InvalidInput(format!("subsystem length must be positive, got {ell}")));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidInput(format!("measurement period must be non-negative, got {tau}")));
        }
        if m == 0 {
            return Err(Error::InvalidInput("at least one measurement is required".into()));
        }
        let last = m as f64 * tau;
        if !(t.is_finite() && t >= last - 1e-12 * last.max(1.0)) {
            return Err(Error::InvalidInput(format!("final time {t} precedes the last measurement at {last}")));
        }
        Ok(Self { ell, tau, m, t: t.max(last) })
    }

    pub fn measurement_times(&self) -> Vec<f64> {
        (1..=self.m).map(|l| l as f64 * self.tau).collect()
    }

    /// True when some pair has spread beyond the subsystem by the final time.
    pub fn beyond_light_cone(&self) -> bool {
        2.0 * MAX_VELOCITY * self.t > self.ell
    }
}

/// Measured region and subsystem used by the classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub measured: IntervalSet,
    pub subsystem: IntervalSet,
}

impl Layout {
    /// Measurements on `A = [0, ℓ]` itself.
    pub fn standard(ell: f64) -> Self {
        let a = IntervalSet::interval(0.0, ell);
        Self { measured: a.clone(), subsystem: a }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FinalTag {
    #[serde(rename = "AA")]
    Both,
    #[serde(rename = "AĀ")]
    Shared,
    #[serde(rename = "ĀĀ")]
    Neither,
}

/// Pair member: the primary one carries momentum `k`, the partner moves opposite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Member {
    Primary,
    Partner,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConfigurationClass {
    /// Members inside the measured region at each measurement time.
    pub counts: Vec<u8>,
    pub final_tag: FinalTag,
    /// For shared pairs, the member inside `A` at the final time.
    pub lone: Option<Member>,
}

impl ConfigurationClass {
    pub fn new(counts: Vec<u8>, final_tag: FinalTag, lone: Option<Member>) -> Self {
        Self { counts, final_tag, lone }
    }

    /// A class shared at the final time with the primary member inside `A`.
    pub fn shared(counts: Vec<u8>) -> Self {
        Self::new(counts, FinalTag::Shared, Some(Member::Primary))
    }

    pub fn label(&self) -> String {
        let counts: Vec<String> = self.counts.iter().map(u8::to_string).collect();
        let tag = match self.final_tag {
            FinalTag::Both => "AA",
            FinalTag::Shared => "AĀ",
            FinalTag::Neither => "ĀĀ",
        };
        match self.lone {
            Some(Member::Primary) => format!("({})|{tag}:primary", counts.join(",")),
            Some(Member::Partner) => format!("({})|{tag}:partner", counts.join(",")),
            None => format!("({})|{tag}", counts.join(",")),
        }
    }
}

pub fn pair_positions(x0: f64, k: f64, t: f64) -> (f64, f64) {
    let v = velocity(k);
    (x0 + v * t, x0 - v * t)
}

fn primary_in(region: &IntervalSet, v: f64, s: f64) -> IntervalSet {
    region.shift(-v * s)
}

fn partner_in(region: &IntervalSet, v: f64, s: f64) -> IntervalSet {
    region.shift(v * s)
}

/// Exact class measure on the standard layout, via interval algebra.
pub fn counting_measure(class: &ConfigurationClass, k: f64, schedule: &Schedule) -> f64 {
    counting_measure_in(class, velocity(k), schedule, &Layout::standard(schedule.ell))
}

/// Exact class measure for primary velocity `v` on an arbitrary layout.
pub fn counting_measure_in(class: &ConfigurationClass, v: f64, schedule: &Schedule, layout: &Layout) -> f64 {
    if class.counts.len() != schedule.m || (class.lone.is_some() != (class.final_tag == FinalTag::Shared)) {
        return 0.0;
    }
    let mut set = IntervalSet::real_line();
    for (s, &c) in schedule.measurement_times().into_iter().zip(&class.counts) {
        let p = primary_in(&layout.measured, v, s);
        let q = partner_in(&layout.measured, v, s);
        let cond = match c {
            2 => p.intersection(&q),
            1 => p.symmetric_difference(&q),
            0 => p.union(&q).complement(),
            _ => IntervalSet::empty(),
        };
        set = set.intersection(&cond);
    }
    let p = primary_in(&layout.subsystem, v, schedule.t);
    let q = partner_in(&layout.subsystem, v, schedule.t);
    let cond = match (class.final_tag, class.lone) {
        (FinalTag::Both, _) => p.intersection(&q),
        (FinalTag::Shared, Some(Member::Primary)) => p.difference(&q),
        (FinalTag::Shared, _) => q.difference(&p),
        (FinalTag::Neither, _) => p.union(&q).complement(),
    };
    set.intersection(&cond).measure()
}

fn classify_point(x0: f64, v: f64, times: &[f64], t: f64, layout: &Layout) -> ConfigurationClass {
    let counts = times
        .iter()
        .map(|&s| layout.measured.contains(x0 + v * s) as u8 + layout.measured.contains(x0 - v * s) as u8)
        .collect();
    let p = layout.subsystem.contains(x0 + v * t);
    let q = layout.subsystem.contains(x0 - v * t);
    let (final_tag, lone) = match (p, q) {
        (true, true) => (FinalTag::Both, None),
        (true, false) => (FinalTag::Shared, Some(Member::Primary)),
        (false, true) => (FinalTag::Shared, Some(Member::Partner)),
        (false, false) => (FinalTag::Neither, None),
    };
    ConfigurationClass { counts, final_tag, lone }
}

/// Every class realized for primary velocity `v`, with its raw measure.
///
/// The real line of birth positions is cut at every point where a member
/// crosses a region endpoint at an event time; each cell is classified once.
/// Unbounded cells carry infinite measure.
pub fn classify(v: f64, schedule: &Schedule, layout: &Layout) -> Vec<(ConfigurationClass, f64)> {
    let times = schedule.measurement_times();
    let mut cuts = Vec::new();
    for &s in &times {
        for e in layout.measured.endpoints() {
            cuts.extend_from_slice(&[e - v * s, e + v * s]);
        }
    }
    for e in layout.subsystem.endpoints() {
        cuts.extend_from_slice(&[e - v * schedule.t, e + v * schedule.t]);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut acc: BTreeMap<ConfigurationClass, f64> = BTreeMap::new();
    let mut add = |x0: f64, width: f64| {
        *acc.entry(classify_point(x0, v, &times, schedule.t, layout)).or_insert(0.0) += width;
    };
    match (cuts.first(), cuts.last()) {
        (Some(&lo), Some(&hi)) => {
            add(lo - 1.0, f64::INFINITY);
            for w in cuts.windows(2) {
                if w[1] > w[0] {
                    add(0.5 * (w[0] + w[1]), w[1] - w[0]);
                }
            }
            add(hi + 1.0, f64::INFINITY);
        }
        _ => add(0.0, f64::INFINITY),
    }
    acc.into_iter().collect()
}

/// Measurement-count patterns for primary velocity `v`, ignoring the final tag.
///
/// Each entry carries half the raw measure, i.e. the density of physical pairs
/// once both momenta `k` and `-k` are integrated over. Patterns with infinite
/// measure (no member ever measured) are dropped.
pub fn count_patterns(v: f64, schedule: &Schedule, layout: &Layout) -> Vec<(Vec<u8>, f64)> {
    let mut acc: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    for (class, m) in classify(v, schedule, layout) {
        if m.is_finite() && m > 0.0 {
            *acc.entry(class.counts).or_insert(0.0) += 0.5 * m;
        }
    }
    acc.into_iter().collect()
}

/// Pair speeds `|v|` at which two classifier cut points coincide.
///
/// Class measures are piecewise linear in `|v|` with kinks only at these speeds.
pub fn kink_speeds(schedule: &Schedule, layout: &Layout) -> Vec<f64> {
    let mut events: Vec<(f64, f64)> = Vec::new();
    for s in schedule.measurement_times() {
        events.extend(layout.measured.endpoints().into_iter().map(|e| (e, s)));
    }
    events.extend(layout.subsystem.endpoints().into_iter().map(|e| (e, schedule.t)));
    let mut speeds = Vec::new();
    for (i, &(ea, sa)) in events.iter().enumerate() {
        for &(eb, sb) in &events[i..] {
            for den in [sa + sb, sa - sb] {
                if den.abs() > 0.0 {
                    let w = ((ea - eb) / den).abs();
                    if w > 0.0 && w <= MAX_VELOCITY {
                        speeds.push(w);
                    }
                }
            }
        }
    }
    speeds.sort_by(f64::total_cmp);
    speeds.dedup();
    speeds
}

/// All classes at one momentum with their raw measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingResult {
    pub k: f64,
    pub schedule: Schedule,
    pub classes: Vec<(ConfigurationClass, f64)>,
}

impl CountingResult {
    pub fn compute(k: f64, schedule: &Schedule) -> Self {
        Self::compute_in(k, schedule, &Layout::standard(schedule.ell))
    }

    pub fn compute_in(k: f64, schedule: &Schedule, layout: &Layout) -> Self {
        Self { k, schedule: *schedule, classes: classify(velocity(k), schedule, layout) }
    }

    pub fn raw(&self, class: &ConfigurationClass) -> f64 {
        self.classes.iter().find(|(c, _)| c == class).map_or(0.0, |(_, m)| *m)
    }

    /// Conventional normalization: tagged classes at face value, untagged halved.
    pub fn chi(&self, class: &ConfigurationClass) -> f64 {
        let raw = self.raw(class);
        if class.lone.is_some() {
            raw
        } else {
            0.5 * raw
        }
    }

    fn sum_chi(&self, pred: impl Fn(&ConfigurationClass) -> bool) -> f64 {
        self.classes
            .iter()
            .filter(|(c, _)| c.lone != Some(Member::Partner) && pred(c))
            .map(|(c, m)| if c.lone.is_some() { *m } else { 0.5 * m })
            .sum()
    }

    /// `χ^{(1,l)}_{AĀ}`: first lone at measurement `l` (1-based), lone until the end, shared at `t`.
    pub fn lone_step(&self, l: usize) -> f64 {
        self.sum_chi(|c| {
            c.final_tag == FinalTag::Shared
                && c.counts.iter().enumerate().all(|(j, &n)| if j + 1 < l { n != 1 } else { n == 1 })
        })
    }

    /// Total of shared classes at the final time.
    pub fn shared_total(&self) -> f64 {
        self.sum_chi(|c| c.final_tag == FinalTag::Shared)
    }

    /// Pairs with exactly one member measured at measurement `j` (0-based).
    pub fn lone_at(&self, j: usize) -> f64 {
        self.sum_chi(|c| c.counts[j] == 1)
    }

    /// Pairs with both members measured at measurement `j` (0-based).
    pub fn full_at(&self, j: usize) -> f64 {
        self.sum_chi(|c| c.counts[j] == 2)
    }
}

/// Single-measurement `χ` values on the standard layout, valid at every time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleChi {
    /// `χ^{(c)}_{AĀ}` for `c = 0, 1, 2` members measured.
    pub shared: [f64; 3],
    /// `χ^{(2)}_{AA}`.
    pub both_full: f64,
    /// `χ^{(1)}_{ĀĀ}`.
    pub neither_lone: f64,
    /// `χ^{(2)}_{ĀĀ}`.
    pub neither_full: f64,
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// Ballistic closed forms for `m = 1` at primary velocity `v`.
pub fn chi_ballistic_single(schedule: &Schedule, v: f64) -> SingleChi {
    let (ell, tau, t) = (schedule.ell, schedule.tau, schedule.t);
    let w = v.abs();
    let shared1 = pos((2.0 * w * tau).min(ell - w * (t - tau)));
    let shared2 = pos((ell - w * t).min(w * t) - w * tau);
    let both_full = 0.5 * pos(ell - 2.0 * w * t);
    let lone = (2.0 * w * tau).min(ell);
    SingleChi {
        shared: [pos((2.0 * w * t).min(ell) - shared1 - shared2), shared1, shared2],
        both_full,
        neither_lone: pos(lone - shared1),
        neither_full: pos(0.5 * pos(ell - 2.0 * w * tau) - both_full - shared2),
    }
}

/// Ballistic closed forms of `χ^{(1,l)}_{AĀ}`, `l = 1..m`, at primary velocity `v`.
pub fn chi_lone_steps(schedule: &Schedule, v: f64) -> Vec<f64> {
    let w = v.abs();
    let (ell, tau, t) = (schedule.ell, schedule.tau, schedule.t);
    (1..=schedule.m)
        .map(|l| {
            let a = w * l as f64 * tau;
            let b = w * (l - 1) as f64 * tau;
            let u = a.min(ell - w * t);
            pos(pos(u + a) - pos(u.min(b) + b))
        })
        .collect()
}

/// Light-cone weight gained by step `l`: `min(2|v|lτ, ℓ) - min(2|v|(l-1)τ, ℓ)`.
pub fn step_weights(schedule: &Schedule, v: f64) -> Vec<f64> {
    let w = v.abs();
    (1..=schedule.m)
        .map(|l| {
            let hi = (2.0 * w * l as f64 * schedule.tau).min(schedule.ell);
            let lo = (2.0 * w * (l - 1) as f64 * schedule.tau).min(schedule.ell);
            hi - lo
        })
        .collect()
}

/// The published closed forms, restricted to the momenta where they are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormChi {
    /// `χ^{(1,l)}_{AĀ}` for `l = 1..m`.
    pub lone_steps: Vec<f64>,
    /// `χ^{(1)}_{ĀĀ}` (single measurement only).
    pub neither_lone: Option<f64>,
    /// `χ^{(0)}_{AĀ} + χ^{(2)}_{AĀ}` (single measurement only).
    pub shared_unmeasured_or_full: Option<f64>,
    /// Total full pairs at the measurement (single measurement only).
    pub full_at_measurement: Option<f64>,
}

/// Whether the published closed forms are exact at pair speed `w`.
pub fn closed_forms_exact(schedule: &Schedule, w: f64) -> bool {
    let (ell, tau, t) = (schedule.ell, schedule.tau, schedule.t);
    if schedule.m == 1 {
        2.0 * w * t <= ell || t == tau || w * (t - tau) >= ell
    } else {
        2.0 * w * t <= ell
    }
}

pub fn chi_closed_forms(schedule: &Schedule, k: f64) -> Result<ClosedFormChi> {
    let w = velocity(k).abs();
    if !closed_forms_exact(schedule, w) {
        return Err(Error::Regime(format!(
            "closed-form counting functions are not exact at k = {k} for t = {}, tau = {}, ell = {}; use counting_measure",
            schedule.t, schedule.tau, schedule.ell
        )));
    }
    let (ell, tau, t) = (schedule.ell, schedule.tau, schedule.t);
    if schedule.m == 1 {
        let lone = (2.0 * w * t).min(ell) - (2.0 * w * (t - tau)).min(ell);
        Ok(ClosedFormChi {
            lone_steps: vec![lone],
            neither_lone: Some((2.0 * w * tau).min(ell) - lone),
            shared_unmeasured_or_full: Some((2.0 * w * (t - tau)).min(ell)),
            full_at_measurement: Some(0.5 * (ell - (2.0 * w * tau).min(ell))),
        })
    } else {
        Ok(ClosedFormChi {
            lone_steps: vec![2.0 * w * tau; schedule.m],
            neither_lone: None,
            shared_unmeasured_or_full: None,
            full_at_measurement: None,
        })
    }
}
