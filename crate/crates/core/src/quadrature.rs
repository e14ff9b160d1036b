//! Adaptive Gauss–Legendre quadrature for piecewise-smooth integrands.
//!
//! The interval is first cut at caller-supplied kink locations; each smooth
//! panel is then bisected until the two-half estimate agrees with the
//! whole-panel estimate to the panel's share of the global tolerance.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub nodes_per_panel: usize,
    pub rel_tol: f64,
    pub kink_splitting: bool,
    /// Maximum bisection depth below an initial panel.
    pub max_depth: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { nodes_per_panel: 20, rel_tol: 1e-10, kink_splitting: true, max_depth: 40 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidInput("quadrature tolerance must be positive".into()));
        }
        if self.nodes_per_panel < 8 {
            return Err(Error::InvalidInput("quadrature needs at least 8 nodes per panel".into()));
        }
        Ok(())
    }
}

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }
}

thread_local! {
    static RULES: RefCell<HashMap<usize, Rc<[(f64, f64)]>>> = RefCell::new(HashMap::new());
}

fn rule(nodes: usize) -> Rc<[(f64, f64)]> {
    RULES.with(|cache| {
        cache
            .borrow_mut()
            .entry(nodes)
            .or_insert_with(|| {
                GaussLegendre::new(nodes)
                    .expect("node count validated to be at least 8")
                    .into_iter()
                    .collect::<Vec<_>>()
                    .into()
            })
            .clone()
    })
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, nodes: &[(f64, f64)]) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let (mut s, mut s_abs) = (0.0, 0.0);
    for &(x, w) in nodes {
        let y = f(mid + half * x);
        s += w * y;
        s_abs += w * y.abs();
    }
    (half * s, half * s_abs)
}

struct Adaptive<'a, F> {
    f: &'a F,
    nodes: Rc<[(f64, f64)]>,
    tol_density: f64,
    max_depth: usize,
    budget: usize,
    failed: bool,
}

impl<F: Fn(f64) -> f64> Adaptive<'_, F> {
    fn refine(&mut self, a: f64, b: f64, whole: f64, depth: usize) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let (left, left_abs) = panel(self.f, a, m, &self.nodes);
        let (right, right_abs) = panel(self.f, m, b, &self.nodes);
        let halves = left + right;
        let err = (halves - whole).abs();
        // Roundoff floor, widened on panels too narrow for their position to resolve.
        let floor = 8.0 * f64::EPSILON * (left_abs + right_abs) * (m.abs() / (b - a)).max(1.0);
        if err <= self.tol_density * (b - a) || err <= floor {
            return (halves, err);
        }
        if depth >= self.max_depth || m <= a || m >= b || self.budget == 0 {
            self.failed = true;
            return (halves, err);
        }
        self.budget -= 1;
        let (l, el) = self.refine(a, m, left, depth + 1);
        let (r, er) = self.refine(m, b, right, depth + 1);
        (l + r, el + er)
    }
}

/// Bisections allowed in one call before giving up.
pub const MAX_BISECTIONS: usize = 100_000;

/// `∫_a^b f(x) dx`, splitting first at the `breaks` that fall inside `(a, b)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], cfg: &QuadratureConfig) -> Result<Estimate> {
    integrate_scaled(f, a, b, breaks, cfg, 0.0)
}

/// As [`integrate`], with the tolerance taken relative to at least `scale`.
///
/// Useful when the integral is one component of a larger quantity and may
/// itself vanish.
pub fn integrate_scaled<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
    scale: f64,
) -> Result<Estimate> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(Estimate::exact(0.0));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts = vec![lo];
    if cfg.kink_splitting {
        let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (hi - lo));
        cuts.extend(inner);
    }
    cuts.push(hi);

    let nodes = rule(cfg.nodes_per_panel);
    let coarse: Vec<(f64, f64)> = cuts.windows(2).map(|w| panel(&f, w[0], w[1], &nodes)).collect();
    let l1: f64 = coarse.iter().map(|c| c.1).sum::<f64>().max(scale.abs());
    let mut adaptive = Adaptive {
        f: &f,
        nodes,
        tol_density: cfg.rel_tol * l1 / (hi - lo),
        max_depth: cfg.max_depth,
        budget: MAX_BISECTIONS,
        failed: false,
    };
    let (mut value, mut error) = (0.0, 0.0);
    for (w, c) in cuts.windows(2).zip(&coarse) {
        let (v, e) = adaptive.refine(w[0], w[1], c.0, 0);
        value += v;
        error += e;
    }
    if adaptive.failed && error > cfg.rel_tol * l1 {
        return Err(Error::Quadrature { achieved: error / l1.max(f64::MIN_POSITIVE), requested: cfg.rel_tol });
    }
    Ok(Estimate { value: sign * value, error })
}

/// Brillouin-zone average `∫_{-π}^{π} dk/2π f(k)`.
pub fn integrate_bz<F: Fn(f64) -> f64>(f: F, breaks: &[f64], cfg: &QuadratureConfig) -> Result<Estimate> {
    let mut cuts = vec![-PI / 2.0, 0.0, PI / 2.0];
    cuts.extend_from_slice(breaks);
    let e = integrate(f, -PI, PI, &cuts, cfg)?;
    Ok(Estimate { value: e.value / (2.0 * PI), error: e.error / (2.0 * PI) })
}

/// As [`integrate_bz`], with the tolerance relative to at least `scale`.
pub fn integrate_bz_scaled<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    cfg: &QuadratureConfig,
    scale: f64,
) -> Result<Estimate> {
    let mut cuts = vec![-PI / 2.0, 0.0, PI / 2.0];
    cuts.extend_from_slice(breaks);
    let e = integrate_scaled(f, -PI, PI, &cuts, cfg, 2.0 * PI * scale)?;
    Ok(Estimate { value: e.value / (2.0 * PI), error: e.error / (2.0 * PI) })
}

/// Momenta in `[-π, π]` where `|sin k| = w`, for each speed `w ∈ (0, 1]`.
pub fn speed_kinks(speeds: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 * speeds.len());
    for &w in speeds {
        if w > 0.0 && w <= 1.0 {
            let a = w.asin();
            out.extend_from_slice(&[a, PI - a, -a, a - PI]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, &[], &QuadratureConfig::default()).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((e.value - exact).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_with_and_without_breaks() {
        let cfg = QuadratureConfig::default();
        let f = |x: f64| (x - 0.3).abs();
        let exact = 0.5 * (1.3f64.powi(2) + 0.7f64.powi(2));
        let with = integrate(f, -1.0, 1.0, &[0.3], &cfg).unwrap();
        assert!((with.value - exact).abs() < 1e-14);
        let without = integrate(f, -1.0, 1.0, &[], &cfg).unwrap();
        assert!((without.value - exact).abs() < 1e-9);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let cfg = QuadratureConfig::default();
        let a = integrate(f64::exp, 0.0, 1.0, &[], &cfg).unwrap().value;
        let b = integrate(f64::exp, 1.0, 0.0, &[], &cfg).unwrap().value;
        assert!((a + b).abs() < 1e-15);
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn zone_average_of_abs_sine() {
        let e = integrate_bz(|k| k.sin().abs(), &[], &QuadratureConfig::default()).unwrap();
        assert!((e.value - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn depth_cap_reports_failure() {
        let cfg = QuadratureConfig { max_depth: 2, rel_tol: 1e-14, kink_splitting: false, nodes_per_panel: 8 };
        let r = integrate(|x: f64| (x - 0.37).abs().sqrt(), 0.0, 1.0, &[], &cfg);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn roundoff_noise_terminates() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x: f64| (x.sin() + 0.5) - (0.5 + x.sin()) * (1.0 + 1e-16 * x.cos()), 0.0, 3.0, &[], &cfg);
        assert!(r.map(|e| e.value.abs() < 1e-14).unwrap_or(true));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = QuadratureConfig { nodes_per_panel: 4, ..Default::default() };
        assert!(integrate(|x| x, 0.0, 1.0, &[], &cfg).is_err());
    }

    #[test]
    fn kinks_of_speed() {
        let ks = speed_kinks(&[0.5, 0.0, 2.0]);
        assert_eq!(ks.len(), 4);
        for k in ks {
            assert!((k.sin().abs() - 0.5).abs() < 1e-15);
        }
    }
}
