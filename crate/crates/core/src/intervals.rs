//! Finite unions of closed real intervals, possibly unbounded.
//!
//! Sets are kept normalized: intervals sorted, disjoint and separated by gaps
//! of positive length. Complements are closed again, which only moves
//! measure-zero boundary points.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn real_line() -> Self {
        Self { intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)] }
    }

    /// `[a, b]`; empty when `a > b`.
    pub fn interval(a: f64, b: f64) -> Self {
        if a > b || a.is_nan() || b.is_nan() {
            Self::empty()
        } else {
            Self { intervals: vec![(a, b)] }
        }
    }

    pub fn from_intervals(raw: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut items: Vec<(f64, f64)> = raw.into_iter().filter(|&(a, b)| a <= b).collect();
        items.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(items.len());
        for (a, b) in items {
            match intervals.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => intervals.push((a, b)),
            }
        }
        Self { intervals }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    pub fn shift(&self, d: f64) -> Self {
        Self { intervals: self.intervals.iter().map(|&(a, b)| (a + d, b + d)).collect() }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_intervals(self.intervals.iter().chain(&other.intervals).copied())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a1, b1) = self.intervals[i];
            let (a2, b2) = other.intervals[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo <= hi {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals(out)
    }

    /// Closure of the complement in the real line.
    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut start = f64::NEG_INFINITY;
        for &(a, b) in &self.intervals {
            if a > start {
                out.push((start, a));
            }
            start = b;
        }
        if start < f64::INFINITY {
            out.push((start, f64::INFINITY));
        }
        Self::from_intervals(out)
    }

    pub fn complement_within(&self, window: &Self) -> Self {
        self.complement().intersection(window)
    }

    /// Closure of `self \ other`.
    pub fn difference(&self, other: &Self) -> Self {
        self.intersection(&other.complement())
    }

    /// Closure of the symmetric difference.
    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.difference(other).union(&other.difference(self))
    }

    /// Finite endpoints of all intervals.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals.iter().flat_map(|&(a, b)| [a, b]).filter(|x| x.is_finite()).collect()
    }
}
