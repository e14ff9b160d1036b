//! One runner per subcommand. Each returns the tables or documents it wrote.

use std::path::{Path, PathBuf};

use chargequench::entropy::{averaged_correction, charge_steps, entropy_after, EntropyOptions, EntropyReport};
use chargequench::extensions::{fcs_sweep, geometry_entropy, GeometrySpec, MeasuredRegion};
use chargequench::neel::{neel_average_correction_exact, neel_entropy_exact, NeelMethod};
use chargequench::probability::{monte_carlo_average_with, sample_outcomes, OutcomeDistribution, Protocol};
use chargequench::quadrature::QuadratureConfig;
use chargequench::saddle::{feasibility, solve_saddle_squeezed, solve_saddle_symmetric_multi, SaddleMode};
use chargequench::states::{Pairing, QuenchState};
use chargequench_ed::{run_protocol, Outcomes, ProtocolSpec, Simulator};
use rayon::prelude::*;
use serde_json::json;

use crate::error::CliError;
use crate::output::{flags_cell, write_document, write_table, Cell, Metadata, Table};
use crate::spec::*;

type Run = Result<Vec<PathBuf>, CliError>;

pub fn run_job(job: &JobSpec, dir: &Path, stem: &str) -> Run {
    let meta = Metadata::for_job(job);
    match job {
        JobSpec::Curve(j) => write_table(dir, stem, &meta, &curve(j)?),
        JobSpec::Saddle(j) => write_table(dir, stem, &meta, &saddle(j)?),
        JobSpec::Average(j) => write_document(dir, stem, &meta, average(j)?),
        JobSpec::Sample(j) => write_table(dir, stem, &meta, &sample(j)?),
        JobSpec::Neel(j) => write_table(dir, stem, &meta, &neel(j)?),
        JobSpec::Fcs(j) => write_table(dir, stem, &meta, &fcs(j)?),
        JobSpec::Geometry(j) => write_table(dir, stem, &meta, &geometry(j)?),
        JobSpec::Oracle(j) => {
            let (record, series) = oracle(j)?;
            let mut paths = write_table(dir, &format!("{stem}_record"), &meta, &record)?;
            paths.extend(write_table(dir, &format!("{stem}_entropy"), &meta, &series)?);
            Ok(paths)
        }
        JobSpec::Sweep(j) => write_table(dir, stem, &meta, &sweep(j)?),
    }
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(format!("--{name} must be positive, got {x}")))
    }
}

fn options(alpha: f64, n: &Numerics) -> Result<EntropyOptions, CliError> {
    let quadrature = n.quadrature();
    quadrature.validate()?;
    Ok(EntropyOptions { alpha, mode: n.mode.into(), quadrature })
}

fn load_state(name: &str, cfg: &QuadratureConfig) -> Result<QuenchState, CliError> {
    Ok(QuenchState::from_name(name, cfg)?)
}

/// Absolute outcome sequences from `--q` or `--dq`, or drawn from the outcome law.
fn outcome_sequences(
    q: &Option<ChargeSpec>,
    dq: &Option<ChargeSpec>,
    m: usize,
    state: &QuenchState,
    ell: f64,
    tau: f64,
    opts: &EntropyOptions,
) -> Result<(Vec<Vec<f64>>, bool), CliError> {
    match (q, dq) {
        (Some(ChargeSpec::Values(v)), None) => Ok((vec![v.clone()], false)),
        (None, Some(ChargeSpec::Values(d))) => {
            let mut acc = state.mean_density * ell;
            Ok((
                vec![d
                    .iter()
                    .map(|x| {
                        acc += x;
                        acc
                    })
                    .collect()],
                false,
            ))
        }
        (Some(ChargeSpec::Sample { count, seed }), None) => {
            let protocol = Protocol { state: state.clone(), ell, tau, m, t: m as f64 * tau, options: *opts };
            let dist = OutcomeDistribution::for_protocol(&protocol)?;
            let batch = sample_outcomes(*seed, &dist, *count, &opts.quadrature)?;
            Ok((batch.sequences.into_iter().map(|s| s.into_iter().map(|x| x as f64).collect()).collect(), true))
        }
        (None, Some(ChargeSpec::Sample { .. })) => {
            Err(CliError::invalid("sampling is requested through --q sample:N:seed"))
        }
        (None, None) => Err(CliError::invalid("give the outcomes with --q or --dq")),
        (Some(_), Some(_)) => Err(CliError::invalid("--q and --dq are exclusive")),
    }
}

fn report_cells(r: &EntropyReport) -> Vec<Cell> {
    vec![
        r.baseline.into(),
        r.quantum_total().into(),
        r.classical_correction.value.into(),
        r.total.into(),
        flags_cell(&r.diagnostics.flags),
    ]
}

fn curve(j: &CurveJob) -> Result<Table, CliError> {
    positive("ell", j.ell)?;
    positive("tau", j.tau)?;
    let opts = options(j.alpha, &j.numerics)?;
    let state = load_state(&j.state, &opts.quadrature)?;
    let (sequences, sampled) = outcome_sequences(&j.q, &j.dq, j.m, &state, j.ell, j.tau, &opts)?;
    let m = sequences[0].len();
    if m == 0 {
        return Err(CliError::invalid("no outcomes given"));
    }
    let times = match &j.t_grid {
        Some(g) => g.points(),
        None => vec![m as f64 * j.tau],
    };
    let mut columns: Vec<String> = Vec::new();
    if sampled {
        columns.push("sample".into());
    }
    columns.extend(["t".into(), "tau".into()]);
    columns.extend((1..=m).map(|l| format!("q_{l}")));
    columns.extend(["baseline", "quantum", "classical", "total", "flags"].map(String::from));
    let mut table = Table::new(columns);

    let jobs: Vec<(usize, f64)> = (0..sequences.len()).flat_map(|s| times.iter().map(move |&t| (s, t))).collect();
    let reports: Vec<EntropyReport> = jobs
        .par_iter()
        .map(|&(s, t)| entropy_after(t, j.tau, j.ell, &sequences[s], &state, &opts))
        .collect::<Result<_, _>>()?;
    for (&(s, t), r) in jobs.iter().zip(&reports) {
        let mut row = Vec::new();
        if sampled {
            row.push(s.into());
        }
        row.extend([t.into(), j.tau.into()]);
        row.extend(sequences[s].iter().map(|&q| Cell::from(q)));
        row.extend(report_cells(r));
        table.push(row);
    }
    Ok(table)
}

fn saddle(j: &SaddleJob) -> Result<Table, CliError> {
    positive("ell", j.ell)?;
    positive("tau", j.tau)?;
    let opts = options(1.0, &j.numerics)?;
    let state = load_state(&j.state, &opts.quadrature)?;
    let (sequences, sampled) = outcome_sequences(&j.q, &j.dq, 1, &state, j.ell, j.tau, &opts)?;
    if sampled {
        return Err(CliError::invalid("the saddle command takes explicit outcomes"));
    }
    let q = &sequences[0];
    let dq = charge_steps(q, &state, j.ell);
    let feas = feasibility(&dq, j.tau, j.ell, state.pairing());
    let lambdas = if feas.feasible() {
        let sol = match state.pairing() {
            Pairing::SymmetricParticleHole => {
                solve_saddle_symmetric_multi(&dq, j.tau, j.ell, &state.occupation, opts.mode, &opts.quadrature)?
            }
            Pairing::SqueezedPair => solve_saddle_squeezed(q, j.tau, j.ell, &state, opts.mode, &opts.quadrature)?,
        };
        sol.lambdas.into_iter().map(Some).collect()
    } else {
        vec![None; q.len()]
    };
    let mut table = Table::new(["index", "q", "dq", "bound", "feasible", "near_boundary", "lambda"]);
    for (i, step) in feas.steps.iter().enumerate() {
        table.push(vec![
            step.index.into(),
            q[i].into(),
            step.dq.into(),
            step.bound.into(),
            step.feasible.into(),
            step.near_boundary.into(),
            lambdas[i].into(),
        ]);
    }
    Ok(table)
}

fn distribution(kind: DistributionArg, protocol: &Protocol) -> Result<OutcomeDistribution, CliError> {
    match kind {
        DistributionArg::Gaussian => Ok(OutcomeDistribution::for_protocol(protocol)?),
        DistributionArg::NeelExact => {
            if !protocol.state.occupation.is_neel() {
                return Err(CliError::invalid("the neel-exact law needs --state neel"));
            }
            let center = protocol.state.mean_density * protocol.ell;
            Ok(OutcomeDistribution::neel_exact(
                protocol.tau,
                protocol.ell,
                center,
                protocol.m,
                &protocol.options.quadrature,
            )?)
        }
    }
}

fn average(j: &AverageJob) -> Result<serde_json::Value, CliError> {
    positive("ell", j.ell)?;
    positive("tau", j.tau)?;
    let opts = options(j.alpha, &j.numerics)?;
    let state = load_state(&j.state, &opts.quadrature)?;
    let t = j.t.unwrap_or(j.m as f64 * j.tau);
    let protocol = Protocol { state, ell: j.ell, tau: j.tau, m: j.m, t, options: opts };
    let dist = distribution(j.distribution, &protocol)?;
    let est = monte_carlo_average_with(&protocol, &dist, j.samples, j.seed)?;
    let analytic = match protocol.state.pairing() {
        Pairing::SymmetricParticleHole => averaged_correction(t, j.tau, j.ell, j.m, &protocol.state, &opts.quadrature)
            .ok()
            .map(|a| json!({ "configuration": a.configuration, "classical": a.classical.value, "total": a.total })),
        Pairing::SqueezedPair => None,
    };
    let neel_exact = if protocol.state.occupation.is_neel() {
        neel_average_correction_exact(j.tau).ok().map(|v| v * j.m as f64)
    } else {
        None
    };
    Ok(json!({
        "mean": est.mean,
        "stderr": est.stderr,
        "n_samples": est.samples,
        "baseline": est.baseline,
        "correction": est.correction(),
        "quantum_mean": est.quantum_mean,
        "quantum_stderr": est.quantum_stderr,
        "unique_outcomes": est.unique_outcomes,
        "rejections": est.rejections,
        "analytic_correction": analytic,
        "neel_exact_correction": neel_exact,
    }))
}

fn sample(j: &SampleJob) -> Result<Table, CliError> {
    positive("ell", j.ell)?;
    positive("tau", j.tau)?;
    let opts = options(1.0, &j.numerics)?;
    let state = load_state(&j.state, &opts.quadrature)?;
    let protocol = Protocol { state, ell: j.ell, tau: j.tau, m: j.m, t: j.m as f64 * j.tau, options: opts };
    let dist = distribution(j.distribution, &protocol)?;
    let batch = sample_outcomes(j.seed, &dist, j.samples, &opts.quadrature)?;
    let mut columns = vec!["sample".to_string()];
    columns.extend((1..=j.m).map(|l| format!("q_{l}")));
    let mut table = Table::new(columns);
    table.extra.push(("rejections".into(), batch.rejections.to_string()));
    for (i, seq) in batch.sequences.iter().enumerate() {
        let mut row = vec![Cell::from(i)];
        row.extend(seq.iter().map(|&q| Cell::Int(q)));
        table.push(row);
    }
    Ok(table)
}

fn neel(j: &NeelJob) -> Result<Table, CliError> {
    positive("ell", j.ell)?;
    positive("tau", j.tau)?;
    let opts = options(j.alpha, &j.numerics)?;
    let state = load_state("neel", &opts.quadrature)?;
    let t = j.t.unwrap_or(j.tau);
    let rows: Vec<Vec<Cell>> = j
        .dq
        .values()
        .par_iter()
        .map(|&dq| -> Result<Vec<Cell>, CliError> {
            let dq = dq as f64;
            let exact =
                neel_entropy_exact(t, j.tau, j.ell, &[dq], j.alpha, NeelMethod::BetaClosedForm, &opts.quadrature)?;
            let stirling = neel_entropy_exact(t, j.tau, j.ell, &[dq], j.alpha, NeelMethod::Stirling, &opts.quadrature)?;
            let saddle = entropy_after(t, j.tau, j.ell, &[j.ell / 2.0 + dq], &state, &opts)?;
            let mut flags = exact.flags.clone();
            flags.extend(stirling.flags.iter().filter(|f| !exact.flags.contains(f)).cloned());
            Ok(vec![dq.into(), exact.entropy.into(), saddle.total.into(), stirling.entropy.into(), flags_cell(&flags)])
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(["dq", "exact", "saddle", "stirling", "flags"]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn fcs(j: &FcsJob) -> Result<Table, CliError> {
    positive("ell", j.ell)?;
    positive("tau", j.tau)?;
    let opts = options(1.0, &j.numerics)?;
    let state = load_state(&j.state, &opts.quadrature)?;
    let mut table = Table::new(["beta", "re", "im"]);
    for (beta, f) in fcs_sweep(j.points, j.tau, j.ell, &state.occupation, &opts.quadrature)? {
        table.push(vec![beta.into(), f.re.into(), f.im.into()]);
    }
    Ok(table)
}

fn geometry(j: &GeometryJob) -> Result<Table, CliError> {
    positive("ell", j.ell)?;
    let region = match j.region {
        RegionArg::Complement => MeasuredRegion::ComplementOfA {
            total_length: j
                .total_length
                .ok_or_else(|| CliError::invalid("complement measurements need --total-length"))?,
        },
        RegionArg::Disjoint => MeasuredRegion::DisjointB {
            distance: j.distance.ok_or_else(|| CliError::invalid("disjoint measurements need --distance"))?,
            length: j.length_b.ok_or_else(|| CliError::invalid("disjoint measurements need --length-b"))?,
        },
    };
    let geom = GeometrySpec { ell: j.ell, region };
    geom.validate()?;
    let opts = options(1.0, &j.numerics)?;
    let state = load_state(&j.state, &opts.quadrature)?;
    let q = state.mean_density * geom.measured_length() + j.dq;
    let mode: SaddleMode = j.numerics.mode.into();
    let times = j.t_grid.points();
    let reports: Vec<EntropyReport> = times
        .par_iter()
        .map(|&t| geometry_entropy(&geom, t, q, 1.0, &state, mode, &opts.quadrature))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(["t", "q", "baseline", "correction", "total", "flags"]);
    for (t, r) in times.iter().zip(&reports) {
        table.push(vec![
            (*t).into(),
            q.into(),
            r.baseline.into(),
            r.correction().into(),
            r.total.into(),
            flags_cell(&r.diagnostics.flags),
        ]);
    }
    Ok(table)
}

fn oracle(j: &OracleJob) -> Result<(Table, Table), CliError> {
    if !(j.tau >= 0.0 && j.tau.is_finite()) {
        return Err(CliError::invalid(format!("--tau must be non-negative, got {}", j.tau)));
    }
    let outcomes: Vec<Outcomes> = match &j.q {
        ChargeSpec::Values(v) => {
            let ints = v
                .iter()
                .map(|&x| {
                    if x.fract() == 0.0 {
                        Ok(x as i64)
                    } else {
                        Err(CliError::invalid(format!("outcome {x} is not an integer")))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            vec![Outcomes::Forced(ints)]
        }
        ChargeSpec::Sample { count, seed } => {
            (0..*count as u64).map(|i| Outcomes::Sampled { seed: seed + i }).collect()
        }
    };
    let mut sim = Simulator::new(j.sites)?;
    let mut record = Table::new(["trajectory", "measurement", "time", "q", "probability"]);
    let mut series = Table::new([
        "trajectory",
        "t",
        "entropy",
        "number_entropy",
        "configurational_entropy",
        "asymmetry",
        "commutator_norm",
    ]);
    for (i, outcomes) in outcomes.into_iter().enumerate() {
        let spec = ProtocolSpec {
            state: j.state.clone(),
            sites: j.sites,
            ell: j.ell,
            tau: j.tau,
            m: j.m,
            observe: j.t_grid.points(),
            outcomes,
        };
        let traj = run_protocol(&spec, &mut sim)?;
        for (l, e) in traj.record.entries.iter().enumerate() {
            record.push(vec![i.into(), (l + 1).into(), e.time.into(), e.q.into(), e.probability.into()]);
        }
        for p in &traj.points {
            let d = &p.decomposition;
            series.push(vec![
                i.into(),
                p.time.into(),
                d.entropy.into(),
                d.number_entropy.into(),
                d.configurational_entropy.into(),
                d.asymmetry.into(),
                d.commutator_norm.into(),
            ]);
        }
    }
    Ok((record, series))
}

fn sweep(j: &SweepJob) -> Result<Table, CliError> {
    positive("ell", j.ell)?;
    if j.m == 0 {
        return Err(CliError::invalid("--m must be at least 1"));
    }
    let opts = options(1.0, &j.numerics)?;
    let state = load_state(&j.state, &opts.quadrature)?;
    let neel = state.occupation.is_neel();
    let taus = j.tau_grid.points();
    let rows: Vec<Vec<Cell>> = taus
        .par_iter()
        .map(|&tau| -> Result<Vec<Cell>, CliError> {
            positive("tau-grid", tau)?;
            let t = j.t.unwrap_or(j.m as f64 * tau);
            let a = averaged_correction(t, tau, j.ell, j.m, &state, &opts.quadrature)?;
            let m = j.m as f64;
            let (exact, asymptotic) = if neel {
                (Some(m * neel_average_correction_exact(tau)?), Some(m * (-0.5 - 0.5 * (2.0 * tau).ln())))
            } else {
                (None, None)
            };
            Ok(vec![
                tau.into(),
                a.configuration.into(),
                a.classical.value.into(),
                a.total.into(),
                exact.into(),
                asymptotic.into(),
            ])
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(["tau", "configuration", "classical", "total", "neel_exact", "neel_asymptotic"]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}
