//! Job specifications: one clap subcommand per job, serialisable for hashing
//! and round-tripping.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chargequench::quadrature::QuadratureConfig;
use chargequench::saddle::SaddleMode;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// `start:stop:count`, inclusive of both ends; a bare number is a one-point grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 }).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number '{x}' in grid '{s}'"));
        match parts.as_slice() {
            [x] => Ok(Self { start: num(x)?, stop: num(x)?, count: 1 }),
            [a, b, n] => {
                let count: usize = n.trim().parse().map_err(|_| format!("bad point count '{n}' in grid '{s}'"))?;
                if count == 0 {
                    return Err(format!("grid '{s}' has no points"));
                }
                Ok(Self { start: num(a)?, stop: num(b)?, count })
            }
            _ => Err(format!("grid '{s}' is not of the form start:stop:count")),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl TryFrom<String> for Grid {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// Integer range `a:b` (inclusive) or a single integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct IntRange {
    pub first: i64,
    pub last: i64,
}

impl IntRange {
    pub fn values(&self) -> Vec<i64> {
        (self.first..=self.last).collect()
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let int = |x: &str| x.trim().parse::<i64>().map_err(|_| format!("bad integer '{x}' in range '{s}'"));
        match s.split(':').collect::<Vec<_>>().as_slice() {
            [x] => Ok(Self { first: int(x)?, last: int(x)? }),
            [a, b] => {
                let (first, last) = (int(a)?, int(b)?);
                if first > last {
                    return Err(format!("range '{s}' is empty"));
                }
                Ok(Self { first, last })
            }
            _ => Err(format!("range '{s}' is not of the form first:last")),
        }
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.last)
    }
}

impl From<IntRange> for String {
    fn from(r: IntRange) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for IntRange {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// Comma-separated charges, or `sample:N:seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ChargeSpec {
    Values(Vec<f64>),
    Sample { count: usize, seed: u64 },
}

impl FromStr for ChargeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(rest) = s.strip_prefix("sample:") {
            let (n, seed) = rest.split_once(':').ok_or_else(|| format!("'{s}' is not of the form sample:N:seed"))?;
            let count = n.parse().map_err(|_| format!("bad sample count '{n}'"))?;
            let seed = seed.parse().map_err(|_| format!("bad seed '{seed}'"))?;
            if count == 0 {
                return Err("sample count must be positive".into());
            }
            return Ok(Self::Sample { count, seed });
        }
        let values = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad charge '{x}'")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::Values(values))
    }
}

impl fmt::Display for ChargeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Values(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
            Self::Sample { count, seed } => write!(f, "sample:{count}:{seed}"),
        }
    }
}

impl From<ChargeSpec> for String {
    fn from(c: ChargeSpec) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for ChargeSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Exact,
    Linearized,
}

impl From<ModeArg> for SaddleMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => SaddleMode::Exact,
            ModeArg::Linearized => SaddleMode::Linearized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct Numerics {
    /// Saddle-point treatment.
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Gauss–Legendre nodes per panel.
    #[arg(long, default_value_t = 20)]
    pub nodes: usize,
}

impl Numerics {
    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig { nodes_per_panel: self.nodes, rel_tol: self.rel_tol, ..QuadratureConfig::default() }
    }
}

/// Where artifacts go. Not part of the job identity.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Output {
    /// Output directory.
    #[arg(long, global = true, env = "CHARGEQUENCH_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// File stem of the artifacts; defaults to the subcommand name.
    #[arg(long, global = true)]
    pub name: Option<String>,
    /// `key = value` file whose entries act as flags placed before the command line ones.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct CurveJob {
    /// `neel`, `dimer`, `dimer-flipped`, `tilted:<theta>` or `custom:<file>`.
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 400.0)]
    pub ell: f64,
    #[arg(long)]
    pub tau: f64,
    /// Final times; defaults to the last measurement time.
    #[arg(long)]
    pub t_grid: Option<Grid>,
    /// Absolute outcomes `q_1,…,q_m`, or `sample:N:seed`.
    #[arg(long, conflicts_with = "dq")]
    pub q: Option<ChargeSpec>,
    /// Outcome steps `Δq_1,…,Δq_m` relative to the running mean.
    #[arg(long, allow_hyphen_values = true)]
    pub dq: Option<ChargeSpec>,
    /// Number of measurements when sampling.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SaddleJob {
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 400.0)]
    pub ell: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, conflicts_with = "dq")]
    pub q: Option<ChargeSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub dq: Option<ChargeSpec>,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct AverageJob {
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 400.0)]
    pub ell: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Final time; defaults to the last measurement time.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = DistributionArg::Gaussian)]
    pub distribution: DistributionArg,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionArg {
    /// Saddle-point Gaussian law of the protocol.
    Gaussian,
    /// Entropic Néel step law.
    NeelExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SampleJob {
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 400.0)]
    pub ell: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = DistributionArg::Gaussian)]
    pub distribution: DistributionArg,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct NeelJob {
    #[arg(long)]
    pub tau: f64,
    /// Outcome offsets `first:last`.
    #[arg(long, allow_hyphen_values = true)]
    pub dq: IntRange,
    #[arg(long, default_value_t = 10_000.0)]
    pub ell: f64,
    /// Final time; defaults to `τ`.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct FcsJob {
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 400.0)]
    pub ell: f64,
    #[arg(long)]
    pub tau: f64,
    /// Counting fields, evenly spaced over `[-π, π]`.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RegionArg {
    Complement,
    Disjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct GeometryJob {
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 100.0)]
    pub ell: f64,
    #[arg(long, value_enum)]
    pub region: RegionArg,
    /// System length, for complement measurements.
    #[arg(long)]
    pub total_length: Option<f64>,
    /// Gap between `A` and `B`, for disjoint measurements.
    #[arg(long)]
    pub distance: Option<f64>,
    /// Length of `B`, for disjoint measurements.
    #[arg(long)]
    pub length_b: Option<f64>,
    /// Charge offset of the measured region from its mean.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub dq: f64,
    #[arg(long)]
    pub t_grid: Grid,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct OracleJob {
    /// `neel`, `dimer`, `dimer-flipped` or `tilted:<theta>`.
    #[arg(long)]
    pub state: String,
    /// Chain length `L`.
    #[arg(long, default_value_t = 10)]
    pub sites: usize,
    /// Sites `1..=ℓ` form the measured block.
    #[arg(long, default_value_t = 5)]
    pub ell: usize,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Observation times of the entropy series.
    #[arg(long)]
    pub t_grid: Grid,
    /// Forced integer outcomes, or `sample:N:seed` for `N` Born-rule trajectories
    /// seeded `seed, seed + 1, …`.
    #[arg(long)]
    pub q: ChargeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SweepJob {
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 10_000.0)]
    pub ell: f64,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Measurement periods.
    #[arg(long)]
    pub tau_grid: Grid,
    /// Final time; defaults to the last measurement time at each period.
    #[arg(long)]
    pub t: Option<f64>,
    #[command(flatten)]
    pub numerics: Numerics,
}

/// Everything that determines the numbers a run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum JobSpec {
    /// Entropy after measurements, over a grid of final times.
    Curve(CurveJob),
    /// Saddle-point multipliers and feasibility of an outcome sequence.
    Saddle(SaddleJob),
    /// Monte-Carlo average of the entropy over outcomes.
    Average(AverageJob),
    /// Outcome sequences drawn from the outcome law.
    Sample(SampleJob),
    /// Néel exact, saddle-point and Stirling entropies side by side.
    Neel(NeelJob),
    /// Charge generating function over the counting field.
    Fcs(FcsJob),
    /// Measurement on the complement of `A` or on a disjoint interval.
    Geometry(GeometryJob),
    /// Exact small-chain trajectories.
    Oracle(OracleJob),
    /// Outcome-averaged correction over a grid of measurement periods.
    Sweep(SweepJob),
}

impl JobSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Curve(_) => "curve",
            Self::Saddle(_) => "saddle",
            Self::Average(_) => "average",
            Self::Sample(_) => "sample",
            Self::Neel(_) => "neel",
            Self::Fcs(_) => "fcs",
            Self::Geometry(_) => "geometry",
            Self::Oracle(_) => "oracle",
            Self::Sweep(_) => "sweep",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::Average(j) => Some(j.seed),
            Self::Sample(j) => Some(j.seed),
            Self::Curve(CurveJob { q: Some(ChargeSpec::Sample { seed, .. }), .. }) => Some(*seed),
            Self::Oracle(OracleJob { q: ChargeSpec::Sample { seed, .. }, .. }) => Some(*seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "chargequench", version, about = "Entanglement after charge measurements in free-fermion quenches")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub job: JobSpec,
    #[command(flatten)]
    pub output: Output,
}

/// Turns `key = value` lines into `--key=value` arguments. Blank lines and
/// `#` comments are skipped; a bare key becomes a flag.
pub fn config_arguments(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let (k, v) = (k.trim(), v.trim());
                if k.is_empty() {
                    return Err(format!("line {}: missing key", i + 1));
                }
                out.push(format!("--{k}={v}"));
            }
            None => out.push(format!("--{line}")),
        }
    }
    Ok(out)
}

/// Inserts config-file arguments right after the subcommand so that command
/// line flags, which come later, take precedence.
pub fn merge_config(args: Vec<String>, config: &[String]) -> Vec<String> {
    if config.is_empty() {
        return args;
    }
    let names = ["curve", "saddle", "average", "sample", "neel", "fcs", "geometry", "oracle", "sweep"];
    match args.iter().skip(1).position(|a| names.contains(&a.as_str())) {
        Some(p) => {
            let at = p + 2;
            let mut merged = args[..at].to_vec();
            merged.extend_from_slice(config);
            merged.extend_from_slice(&args[at..]);
            merged
        }
        None => args,
    }
}

/// Path given to `--config`, scanned before clap parses the arguments.
pub fn config_path(args: &[String]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}
