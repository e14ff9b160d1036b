use chargequench_ed::{build_state, entropy_decomposition, run_protocol, Outcomes, ProtocolSpec, Simulator};

fn spec(state: &str, seed: u64) -> ProtocolSpec {
    ProtocolSpec {
        state: state.into(),
        sites: 10,
        ell: 5,
        tau: 0.8,
        m: 3,
        observe: vec![0.4, 1.2, 2.4, 3.5],
        outcomes: Outcomes::Sampled { seed },
    }
}

#[test]
fn symmetric_protocols_conserve_total_charge() {
    let mut sim = Simulator::new(10).unwrap();
    for state in ["neel", "dimer"] {
        for seed in 0..3 {
            let traj = run_protocol(&spec(state, seed), &mut sim).unwrap();
            assert_eq!(traj.final_state.total_charges(), vec![5]);
            assert!((traj.final_state.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn outcomes_lie_in_the_support() {
    let mut sim = Simulator::new(10).unwrap();
    for seed in 0..4 {
        let s = spec("dimer", seed);
        let traj = run_protocol(&s, &mut sim).unwrap();
        // Replaying with forced outcomes reaches each measurement with the same law.
        let mut psi = build_state("dimer", 10).unwrap();
        let mut now = 0.0;
        for e in &traj.record.entries {
            psi = sim.evolve(&psi, e.time - now).unwrap();
            now = e.time;
            let d = entropy_decomposition(&psi, 5).unwrap();
            let p = d.charge_distribution[e.q as usize];
            assert!(p > 1e-14);
            assert!((p - e.probability).abs() < 1e-12);
            psi = psi.project_charge(1, 5, e.q).unwrap().0;
        }
    }
}

#[test]
fn projection_removes_number_entropy() {
    let mut sim = Simulator::new(10).unwrap();
    for state in ["dimer", "tilted:1.3"] {
        let psi = sim.evolve(&build_state(state, 10).unwrap(), 1.7).unwrap();
        let d = entropy_decomposition(&psi, 5).unwrap();
        assert!(d.number_entropy > 1e-3);
        let q = d.charge_distribution.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let (after, p) = psi.project_charge(1, 5, q as i64).unwrap();
        assert!((p - d.charge_distribution[q]).abs() < 1e-12);
        let d2 = entropy_decomposition(&after, 5).unwrap();
        assert!(d2.number_entropy.abs() < 1e-12);
        assert!(d2.asymmetry.abs() < 1e-10);
    }
}

#[test]
fn forced_sequence_probability_is_a_product() {
    let mut sim = Simulator::new(8).unwrap();
    let s = ProtocolSpec {
        state: "neel".into(),
        sites: 8,
        ell: 4,
        tau: 1.0,
        m: 2,
        observe: vec![],
        outcomes: Outcomes::Forced(vec![2, 2]),
    };
    let traj = run_protocol(&s, &mut sim).unwrap();
    let p = traj.record.sequence_probability();
    assert!(p > 0.0 && p < 1.0);
    let product: f64 = traj.record.entries.iter().map(|e| e.probability).product();
    assert_eq!(p, product);
}
