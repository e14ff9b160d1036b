//! Property tests for invariants that hold across the parameter space.

use std::f64::consts::PI;

use chargequench::counting::{
    chi_ballistic_single, chi_closed_forms, chi_lone_steps, closed_forms_exact, counting_measure, ConfigurationClass,
    CountingResult, FinalTag, Member, Schedule,
};
use chargequench::entropy::{entropy_symmetric_single, EntropyOptions};
use chargequench::extensions::{fcs_generating_function, geometry_entropy, GeometrySpec, MeasuredRegion};
use chargequench::fluctuations::{drude_weight, variance_squeezed, variance_squeezed_infinite, variance_symmetric};
use chargequench::neel::neel_log_charged_moment;
use chargequench::quadrature::QuadratureConfig;
use chargequench::saddle::{
    feasibility, modified_occupation, modified_split, solve_saddle_symmetric_single, SaddleMode,
};
use chargequench::states::{
    occupation_dimer, occupation_tilted, pair_entropy, velocity, OccupationFunction, Pairing, QuenchState,
};
use proptest::prelude::*;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// `χ`-normalised sum over classes, counting shared pairs once.
fn chi_sum(result: &CountingResult, pred: impl Fn(&ConfigurationClass) -> bool) -> f64 {
    result
        .classes
        .iter()
        .filter(|(c, _)| c.lone != Some(Member::Partner) && pred(c))
        .map(|(c, m)| if c.lone.is_some() { *m } else { 0.5 * m })
        .sum()
}

fn schedule_strategy() -> impl Strategy<Value = (Schedule, f64)> {
    (1usize..=3, 5.0f64..200.0, 0.0f64..1.0, 0.0f64..3.0, -PI..PI).prop_map(|(m, ell, tau_frac, extra, k)| {
        let tau = tau_frac * ell / (2.0 * m as f64);
        let t = m as f64 * tau + extra * ell;
        (Schedule::new(ell, tau, m, t).unwrap(), k)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pair_entropy_is_symmetric(n in 0.0f64..=1.0, alpha in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0, 7.5])) {
        let (a, b) = (pair_entropy(n, alpha), pair_entropy(1.0 - n, alpha));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(a <= pair_entropy(0.5, alpha) + 1e-15);
    }

    #[test]
    fn tilted_quarter_turn_is_dimer(k in -PI..PI) {
        prop_assert!((occupation_tilted(k, PI / 2.0).unwrap() - occupation_dimer(k)).abs() < 1e-12);
    }

    #[test]
    fn counting_sum_rules((s, k) in schedule_strategy()) {
        let r = CountingResult::compute(k, &s);
        let w = velocity(k).abs();
        prop_assert!((r.shared_total() - (2.0 * w * s.t).min(s.ell)).abs() < 1e-9);
        for (j, time) in s.measurement_times().into_iter().enumerate() {
            prop_assert!((r.lone_at(j) - (2.0 * w * time).min(s.ell)).abs() < 1e-9);
        }
        let lone = chi_lone_steps(&s, velocity(k));
        for l in 0..s.m {
            prop_assert!((r.lone_step(l + 1) - lone[l]).abs() < 1e-9);
        }
        if s.m == 1 {
            let c = chi_ballistic_single(&s, velocity(k));
            for (n, expected) in c.shared.iter().enumerate() {
                let got = chi_sum(&r, |cl| cl.final_tag == FinalTag::Shared && cl.counts[0] as usize == n);
                prop_assert!((got - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn counting_matches_closed_forms((s, k) in schedule_strategy()) {
        if closed_forms_exact(&s, velocity(k).abs()) {
            let r = CountingResult::compute(k, &s);
            let c = chi_closed_forms(&s, k).unwrap();
            for l in 0..s.m {
                prop_assert!((r.lone_step(l + 1) - c.lone_steps[l]).abs() < 1e-12 * s.ell.max(1.0));
            }
            if let Some(v) = c.neither_lone {
                let got = chi_sum(&r, |cl| cl.final_tag == FinalTag::Neither && cl.counts[0] == 1);
                prop_assert!((got - v).abs() < 1e-12 * s.ell.max(1.0));
            }
            if let Some(v) = c.shared_unmeasured_or_full {
                let got = chi_sum(&r, |cl| cl.final_tag == FinalTag::Shared && cl.counts[0] != 1);
                prop_assert!((got - v).abs() < 1e-12 * s.ell.max(1.0));
            }
            if let Some(v) = c.full_at_measurement {
                prop_assert!((r.full_at(0) - v).abs() < 1e-12 * s.ell.max(1.0));
            }
        }
    }

    #[test]
    fn counting_is_continuous((s, k) in schedule_strategy()) {
        let r = CountingResult::compute(k, &s);
        let nudged = Schedule::new(s.ell, s.tau * (1.0 + 1e-12), s.m, s.t + 1e-9).unwrap();
        for (class, m) in r.classes.iter().filter(|(_, m)| m.is_finite()) {
            let moved = counting_measure(class, k, &nudged);
            prop_assert!((moved - m).abs() < 1e-6, "{} jumped from {m} to {moved}", class.label());
        }
    }

    #[test]
    fn modified_occupation_group(n in 0.0f64..=1.0, lambda in -30.0f64..30.0) {
        let (a, b) = modified_split(modified_split((n, 1.0 - n), lambda, 1.0), -lambda, 1.0);
        prop_assert!((a - n).abs() < 1e-14 && (a + b - 1.0).abs() < 1e-15);
        if lambda.abs() <= 5.0 {
            let back = modified_occupation(modified_occupation(n, lambda, 1.0), -lambda, 1.0);
            prop_assert!((back - n).abs() < 1e-14);
        }
    }

    #[test]
    fn neel_domain_matches_feasibility(tau in 0.5f64..300.0, dq in -200i64..=200) {
        let h = 2.0 * tau / PI;
        let dq = dq as f64;
        let feasible = feasibility(&[dq], tau, 1e6, Pairing::SymmetricParticleHole).feasible();
        let in_domain = neel_log_charged_moment(dq, tau).is_ok();
        prop_assert_eq!(feasible, dq.abs() <= h);
        prop_assert_eq!(in_domain, dq.abs() < h + 1.0);
        prop_assert!(!feasible || in_domain);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_variance_is_monotone(tau in 1.0f64..300.0, ell in 50.0f64..400.0, state in prop::sample::select(vec!["neel", "dimer", "dimer-flipped"])) {
        let occ = QuenchState::from_name(state, &cfg()).unwrap().occupation;
        let a = variance_symmetric(tau, ell, &occ, &cfg()).unwrap().value;
        let b = variance_symmetric(tau * 1.1, ell, &occ, &cfg()).unwrap().value;
        prop_assert!(b >= a - 1e-9 * a);
        let fl = variance_squeezed_infinite(ell, &occ, &cfg()).unwrap().value;
        prop_assert!(b <= fl * (1.0 + 1e-12));
        let sat = variance_symmetric(1e7 * ell, ell, &occ, &cfg()).unwrap().value;
        prop_assert!((sat - fl).abs() < 1e-6 * fl);
        if tau < ell / 2.0 {
            let d = drude_weight(&occ, &cfg()).unwrap().value;
            prop_assert!((a - 2.0 * tau * d).abs() < 1e-8 * a.max(1.0));
        }
    }

    #[test]
    fn squeezed_variance_halves(tau in 0.5f64..300.0, ell in 50.0f64..400.0, theta in 0.2f64..1.5) {
        let occ = OccupationFunction::tilted(theta).unwrap();
        let a = variance_squeezed(tau, ell, &occ, &cfg()).unwrap().value;
        let b = variance_squeezed(tau * 1.1, ell, &occ, &cfg()).unwrap().value;
        prop_assert!(b <= a + 1e-9 * a);
        let zero = variance_squeezed(0.0, ell, &occ, &cfg()).unwrap().value;
        let inf = variance_squeezed_infinite(ell, &occ, &cfg()).unwrap().value;
        prop_assert!((inf - 0.5 * zero).abs() < 1e-9 * zero);
        prop_assert!(b >= inf * (1.0 - 1e-12));
    }

    #[test]
    fn saddle_map_is_odd_and_increasing(frac in 0.01f64..0.9, tau in 5.0f64..200.0, state in prop::sample::select(vec!["neel", "dimer"])) {
        let occ = QuenchState::from_name(state, &cfg()).unwrap().occupation;
        let ell = 4.0 * tau;
        let dq = frac * 2.0 * tau / PI;
        let solve = |x: f64| solve_saddle_symmetric_single(x, tau, ell, &occ, SaddleMode::Exact, &cfg()).unwrap().lambdas[0];
        let (up, down, more) = (solve(dq), solve(-dq), solve(dq * 1.05));
        prop_assert!(up > 0.0 && more > up);
        prop_assert!((up + down).abs() < 1e-9 * up.abs().max(1.0));
    }

    #[test]
    fn single_correction_is_negative_even_and_itemized(frac in 0.02f64..0.9, tau in 5.0f64..150.0, state in prop::sample::select(vec!["neel", "dimer"])) {
        let st = QuenchState::from_name(state, &cfg()).unwrap();
        let ell = 4.0 * tau;
        let dq = frac * 2.0 * tau / PI;
        let opts = EntropyOptions::default();
        let plus = entropy_symmetric_single(tau, tau, ell, ell / 2.0 + dq, &st, &opts).unwrap();
        let minus = entropy_symmetric_single(tau, tau, ell, ell / 2.0 - dq, &st, &opts).unwrap();
        prop_assert!(plus.quantum_total() <= 1e-12);
        prop_assert!((plus.quantum_total() - minus.quantum_total()).abs() < 1e-9 * plus.quantum_total().abs().max(1e-3));
        let mut total = plus.baseline;
        for q in &plus.quantum_corrections {
            total += q.value;
        }
        if let Some(c) = plus.classical_correction.value {
            total += c;
        }
        prop_assert_eq!(total, plus.total);
    }

    #[test]
    fn fcs_is_conjugate_symmetric(beta in 0.0f64..PI, tau in 1.0f64..100.0, state in prop::sample::select(vec!["neel", "dimer"])) {
        let occ = QuenchState::from_name(state, &cfg()).unwrap().occupation;
        let ell = 4.0 * tau;
        let a = fcs_generating_function(beta, tau, ell, &occ, &cfg()).unwrap();
        let b = fcs_generating_function(-beta, tau, ell, &occ, &cfg()).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn disjoint_region_is_causal(d in 10.0f64..80.0, frac in 0.0f64..0.99, dq in -5.0f64..5.0) {
        let st = QuenchState::from_name("tilted:1.2", &cfg()).unwrap();
        let geom = GeometrySpec { ell: 60.0, region: MeasuredRegion::DisjointB { distance: d, length: 40.0 } };
        let q = st.mean_density * 40.0 + dq;
        let r = geometry_entropy(&geom, frac * d, q, 1.0, &st, SaddleMode::Exact, &cfg()).unwrap();
        prop_assert!(r.correction().abs() < 1e-6);
    }
}
