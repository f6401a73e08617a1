//! Batch experiments: run specifications, sweep files, CSV output,
//! aggregation, slope fits and replay.
//!
//! Stop policy: pseudo-Boolean runs stop when the target is covered or the
//! evaluation budget is spent; path runs always use their full generation
//! budget. Every field a run depends on appears in its summary row, so a row
//! alone is enough to replay it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path as FsPath;
use std::str::FromStr;
use std::time::Instant;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::instances::InstanceRef;
use crate::oracles;
use crate::pseudoboolean::{run_algorithm, BitString, PbAlgorithm, ProblemKind, PseudoBooleanProblem, Start, StopRule};
use crate::shortestpath::{run_sp, ApproxParams, MetricSample, SpAlgorithm, SpRunConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("{0}")]
    Spec(String),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("csv: {0}")]
    Csv(String),
    #[error("run {0} not found")]
    UnknownRun(String),
}

fn io_err(path: &FsPath, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// Any optimizer the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmId {
    Pb(PbAlgorithm),
    Sp(SpAlgorithm),
}

impl AlgorithmId {
    pub fn id(self) -> &'static str {
        match self {
            AlgorithmId::Pb(a) => a.id(),
            AlgorithmId::Sp(a) => a.id(),
        }
    }

    pub fn all() -> Vec<AlgorithmId> {
        PbAlgorithm::ALL
            .into_iter()
            .map(AlgorithmId::Pb)
            .chain(SpAlgorithm::ALL.into_iter().map(AlgorithmId::Sp))
            .collect()
    }
}

impl FromStr for AlgorithmId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmId::all()
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| HarnessError::Spec(format!("unknown algorithm {s:?}")))
    }
}

/// Initial solution of a pseudo-Boolean run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartMode {
    Random,
    Zeros,
}

impl StartMode {
    pub fn name(self) -> &'static str {
        match self {
            StartMode::Random => "random",
            StartMode::Zeros => "zeros",
        }
    }

    fn start(self, n: usize) -> Start {
        match self {
            StartMode::Random => Start::Uniform,
            StartMode::Zeros => Start::Fixed(BitString::zeros(n)),
        }
    }
}

impl FromStr for StartMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(StartMode::Random),
            "zeros" => Ok(StartMode::Zeros),
            _ => Err(HarnessError::Spec(format!("unknown start mode {s:?}"))),
        }
    }
}

/// What a run operates on.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    PseudoBoolean {
        kind: ProblemKind,
        n: usize,
        start: StartMode,
    },
    Graph(InstanceRef),
}

/// One fully specified run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub algorithm: AlgorithmId,
    pub target: Target,
    pub phi: Option<f64>,
    /// `(eps1, eps2, eps2_max)` for path runs.
    pub eps: Option<(f64, f64, f64)>,
    pub seed: u64,
    /// Evaluations for pseudo-Boolean runs, generations for path runs.
    pub budget: u64,
    /// Generations between metric samples (path runs only).
    pub cadence: u64,
}

impl RunSpec {
    fn problem_name(&self) -> String {
        match &self.target {
            Target::PseudoBoolean { kind, .. } => kind.name().to_string(),
            Target::Graph(_) => "bpmosp".to_string(),
        }
    }

    fn instance_name(&self) -> String {
        match &self.target {
            Target::PseudoBoolean { start, .. } => start.name().to_string(),
            Target::Graph(r) => r.to_string(),
        }
    }

    fn declared_n(&self) -> Option<usize> {
        match &self.target {
            Target::PseudoBoolean { n, .. } => Some(*n),
            Target::Graph(InstanceRef::Fixture) => Some(5),
            Target::Graph(InstanceRef::Planted(p)) => Some(p.n),
            Target::Graph(InstanceRef::File(_)) => None,
        }
    }

    /// Stable identifier: 12 hex digits of a SHA-256 over the canonical
    /// description of the run.
    pub fn run_id(&self) -> String {
        let (e1, e2, e3) = eps_fields(self.eps);
        let canonical = format!(
            "algorithm={};problem={};instance={};n={};phi={};eps1={};eps2={};eps2max={};seed={};budget={}",
            self.algorithm.id(),
            self.problem_name(),
            self.instance_name(),
            opt(self.declared_n()),
            opt(self.phi),
            e1,
            e2,
            e3,
            self.seed,
            self.budget
        );
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(6).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// The run's settings without its seed, used to group rows.
    pub fn config_key(&self) -> ConfigKey {
        let (eps1, eps2, eps2max) = eps_fields(self.eps);
        ConfigKey {
            algorithm: self.algorithm.id().to_string(),
            problem: self.problem_name(),
            instance: self.instance_name(),
            n: self.declared_n().map(|n| n.to_string()).unwrap_or_default(),
            phi: opt(self.phi),
            eps1,
            eps2,
            eps2max,
            budget: self.budget.to_string(),
        }
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn eps_fields(eps: Option<(f64, f64, f64)>) -> (String, String, String) {
    match eps {
        Some((a, b, c)) => (a.to_string(), b.to_string(), c.to_string()),
        None => Default::default(),
    }
}

/// Settings shared by every seed of one configuration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigKey {
    pub algorithm: String,
    pub problem: String,
    pub instance: String,
    pub n: String,
    pub phi: String,
    pub eps1: String,
    pub eps2: String,
    pub eps2max: String,
    pub budget: String,
}

/// One summary CSV row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRow {
    pub run_id: String,
    pub algorithm: String,
    pub problem: String,
    pub instance: String,
    pub n: String,
    pub phi: String,
    pub eps1: String,
    pub eps2: String,
    pub eps2max: String,
    pub seed: String,
    pub budget: String,
    pub evaluations: String,
    pub generations: String,
    pub hit_time: String,
    pub error: String,
    pub wall_ms: String,
}

impl SummaryRow {
    pub const HEADER: [&'static str; 16] = [
        "run_id",
        "algorithm",
        "problem",
        "instance",
        "n",
        "phi",
        "eps1",
        "eps2",
        "eps2max",
        "seed",
        "budget",
        "evaluations",
        "generations",
        "hit_time",
        "error",
        "wall_ms",
    ];

    pub fn fields(&self) -> [&str; 16] {
        [
            &self.run_id,
            &self.algorithm,
            &self.problem,
            &self.instance,
            &self.n,
            &self.phi,
            &self.eps1,
            &self.eps2,
            &self.eps2max,
            &self.seed,
            &self.budget,
            &self.evaluations,
            &self.generations,
            &self.hit_time,
            &self.error,
            &self.wall_ms,
        ]
    }

    fn from_fields(f: &[String]) -> Result<Self, HarnessError> {
        if f.len() != Self::HEADER.len() {
            return Err(HarnessError::Csv(format!(
                "expected {} columns, found {}",
                Self::HEADER.len(),
                f.len()
            )));
        }
        let g = |i: usize| f[i].clone();
        Ok(SummaryRow {
            run_id: g(0),
            algorithm: g(1),
            problem: g(2),
            instance: g(3),
            n: g(4),
            phi: g(5),
            eps1: g(6),
            eps2: g(7),
            eps2max: g(8),
            seed: g(9),
            budget: g(10),
            evaluations: g(11),
            generations: g(12),
            hit_time: g(13),
            error: g(14),
            wall_ms: g(15),
        })
    }

    /// The row as CSV text without the wall-clock column, for comparisons.
    pub fn canonical(&self) -> String {
        self.fields()[..15].join(",")
    }

    pub fn config_key(&self) -> ConfigKey {
        ConfigKey {
            algorithm: self.algorithm.clone(),
            problem: self.problem.clone(),
            instance: self.instance.clone(),
            n: self.n.clone(),
            phi: self.phi.clone(),
            eps1: self.eps1.clone(),
            eps2: self.eps2.clone(),
            eps2max: self.eps2max.clone(),
            budget: self.budget.clone(),
        }
    }

    /// Rebuilds the specification that produced this row.
    pub fn to_spec(&self) -> Result<RunSpec, HarnessError> {
        let bad = |what: &str, v: &str| HarnessError::Spec(format!("row {}: bad {what} {v:?}", self.run_id));
        let algorithm: AlgorithmId = self.algorithm.parse()?;
        let num = |what: &str, v: &str| v.parse::<u64>().map_err(|_| bad(what, v));
        let float = |what: &str, v: &str| -> Result<Option<f64>, HarnessError> {
            if v.is_empty() {
                Ok(None)
            } else {
                v.parse::<f64>().map(Some).map_err(|_| bad(what, v))
            }
        };
        let target = match algorithm {
            AlgorithmId::Pb(_) => Target::PseudoBoolean {
                kind: self.problem.parse().map_err(|_| bad("problem", &self.problem))?,
                n: num("n", &self.n)? as usize,
                start: self.instance.parse()?,
            },
            AlgorithmId::Sp(_) => Target::Graph(self.instance.parse().map_err(|_| bad("instance", &self.instance))?),
        };
        let eps = match (
            float("eps1", &self.eps1)?,
            float("eps2", &self.eps2)?,
            float("eps2max", &self.eps2max)?,
        ) {
            (Some(a), Some(b), Some(c)) => Some((a, b, c)),
            (None, None, None) => None,
            _ => return Err(bad("eps", &self.eps1)),
        };
        Ok(RunSpec {
            algorithm,
            target,
            phi: float("phi", &self.phi)?,
            eps,
            seed: num("seed", &self.seed)?,
            budget: num("budget", &self.budget)?,
            cadence: SpRunConfig::DEFAULT_CADENCE,
        })
    }
}

/// Result of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub row: SummaryRow,
    pub metrics: Vec<MetricSample>,
}

struct Measured {
    n: usize,
    evaluations: u64,
    generations: u64,
    hit_time: Option<u64>,
    metrics: Vec<MetricSample>,
}

fn measure(spec: &RunSpec) -> Result<Measured, String> {
    match (&spec.algorithm, &spec.target) {
        (AlgorithmId::Pb(alg), Target::PseudoBoolean { kind, n, start }) => {
            let problem = PseudoBooleanProblem::new(*kind, *n).map_err(|e| e.to_string())?;
            let stop = StopRule::at_target().with_budget(spec.budget);
            let t = run_algorithm(*alg, problem, spec.phi, &start.start(*n), spec.seed, &stop)
                .map_err(|e| e.to_string())?;
            Ok(Measured {
                n: *n,
                evaluations: t.evaluations,
                generations: t.iterations,
                hit_time: t.hit_time,
                metrics: Vec::new(),
            })
        }
        (AlgorithmId::Sp(alg), Target::Graph(instance)) => {
            let g = instance.load().map_err(|e| e.to_string())?;
            let (e1, e2, e3) = spec.eps.ok_or("path runs need eps1, eps2 and eps2max")?;
            let params = ApproxParams::new(e1, e2, e3).map_err(|e| e.to_string())?;
            let mut config = SpRunConfig::new(params, spec.budget);
            config.metric_cadence = spec.cadence;
            let reference = oracles::common_reference(&g).ok();
            let t = run_sp(*alg, &g, &config, reference.as_ref(), spec.seed).map_err(|e| e.to_string())?;
            Ok(Measured {
                n: g.n(),
                evaluations: t.evaluations,
                generations: t.generations,
                hit_time: t.hit_time,
                metrics: t.metrics,
            })
        }
        _ => Err(format!(
            "algorithm {} does not apply to this target",
            spec.algorithm.id()
        )),
    }
}

/// Runs one specification. Failures are reported in the row's error column.
pub fn execute(spec: &RunSpec) -> RunOutcome {
    let clock = Instant::now();
    let result = measure(spec);
    let wall_ms = clock.elapsed().as_millis();
    let key = spec.config_key();
    let mut row = SummaryRow {
        run_id: spec.run_id(),
        algorithm: key.algorithm,
        problem: key.problem,
        instance: key.instance,
        n: key.n,
        phi: key.phi,
        eps1: key.eps1,
        eps2: key.eps2,
        eps2max: key.eps2max,
        seed: spec.seed.to_string(),
        budget: key.budget,
        evaluations: String::new(),
        generations: String::new(),
        hit_time: String::new(),
        error: String::new(),
        wall_ms: wall_ms.to_string(),
    };
    match result {
        Ok(m) => {
            row.n = m.n.to_string();
            row.evaluations = m.evaluations.to_string();
            row.generations = m.generations.to_string();
            row.hit_time = opt(m.hit_time);
            RunOutcome {
                row,
                metrics: m.metrics,
            }
        }
        Err(e) => {
            row.error = e;
            RunOutcome {
                row,
                metrics: Vec::new(),
            }
        }
    }
}

/// How a batch is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel over runs with at most `jobs` threads (0 = all cores).
    /// Without the `parallel` feature this runs sequentially.
    Parallel {
        jobs: usize,
    },
}

/// Runs every specification; output order follows `specs` regardless of
/// scheduling.
pub fn run_batch(specs: &[RunSpec], execution: Execution) -> Vec<RunOutcome> {
    match execution {
        Execution::Sequential => specs.iter().map(execute).collect(),
        Execution::Parallel { jobs } => parallel_batch(specs, jobs),
    }
}

#[cfg(feature = "parallel")]
fn parallel_batch(specs: &[RunSpec], jobs: usize) -> Vec<RunOutcome> {
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| specs.par_iter().map(execute).collect()),
        Err(_) => specs.iter().map(execute).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_batch(specs: &[RunSpec], _jobs: usize) -> Vec<RunOutcome> {
    specs.iter().map(execute).collect()
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &FsPath, bytes: &[u8]) -> Result<(), HarnessError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => FsPath::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

fn csv_bytes<I, R>(header: &[&str], records: I) -> Result<Vec<u8>, HarnessError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| HarnessError::Csv(e.to_string()))?;
    for r in records {
        w.write_record(r).map_err(|e| HarnessError::Csv(e.to_string()))?;
    }
    w.into_inner().map_err(|e| HarnessError::Csv(e.to_string()))
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>, HarnessError> {
    csv_bytes(&SummaryRow::HEADER, rows.iter().map(SummaryRow::fields))
}

pub const METRIC_HEADER: [&str; 6] = [
    "run_id",
    "generation",
    "evaluations",
    "max_eps",
    "mean_eps_members",
    "mean_eps_endpoints",
];

pub fn metrics_csv(outcomes: &[RunOutcome]) -> Result<Vec<u8>, HarnessError> {
    let records = outcomes.iter().flat_map(|o| {
        o.metrics.iter().map(move |s| {
            [
                o.row.run_id.clone(),
                s.generation.to_string(),
                s.evaluations.to_string(),
                s.max_eps.to_string(),
                s.mean_eps_members.to_string(),
                s.mean_eps_endpoints.to_string(),
            ]
        })
    });
    csv_bytes(&METRIC_HEADER, records)
}

pub fn parse_summary_csv(bytes: &[u8]) -> Result<Vec<SummaryRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(bytes);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| HarnessError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != SummaryRow::HEADER {
        return Err(HarnessError::Csv(format!("unexpected header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| HarnessError::Csv(e.to_string()))?;
            SummaryRow::from_fields(&rec.iter().map(str::to_string).collect::<Vec<_>>())
        })
        .collect()
}

pub fn read_summary_csv(path: &FsPath) -> Result<Vec<SummaryRow>, HarnessError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    parse_summary_csv(&bytes)
}

/// Mean, sample standard deviation, minimum and maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let var = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        Some(Stats {
            count,
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    fn cells(s: Option<Stats>) -> [String; 4] {
        match s {
            Some(s) => [
                s.mean.to_string(),
                s.std.to_string(),
                s.min.to_string(),
                s.max.to_string(),
            ],
            None => Default::default(),
        }
    }
}

/// Statistics of every seed of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub key: ConfigKey,
    pub runs: usize,
    pub errors: usize,
    pub hits: usize,
    pub evaluations: Option<Stats>,
    pub generations: Option<Stats>,
    pub hit_time: Option<Stats>,
}

pub const AGGREGATE_HEADER: [&str; 25] = [
    "algorithm",
    "problem",
    "instance",
    "n",
    "phi",
    "eps1",
    "eps2",
    "eps2max",
    "budget",
    "runs",
    "errors",
    "hits",
    "evaluations_mean",
    "evaluations_std",
    "evaluations_min",
    "evaluations_max",
    "generations_mean",
    "generations_std",
    "generations_min",
    "generations_max",
    "hit_time_mean",
    "hit_time_std",
    "hit_time_min",
    "hit_time_max",
    "seeds",
];

/// Groups rows by configuration, in first-appearance order.
pub fn aggregate(rows: &[SummaryRow]) -> Vec<AggregateRow> {
    let mut order: Vec<ConfigKey> = Vec::new();
    let mut groups: BTreeMap<ConfigKey, Vec<&SummaryRow>> = BTreeMap::new();
    for r in rows {
        let key = r.config_key();
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let members = &groups[&key];
            let ok: Vec<&&SummaryRow> = members.iter().filter(|r| r.error.is_empty()).collect();
            let col = |f: fn(&SummaryRow) -> &str| -> Vec<f64> {
                ok.iter().filter_map(|r| f(r).parse::<f64>().ok()).collect()
            };
            let hits = col(|r| &r.hit_time);
            AggregateRow {
                runs: members.len(),
                errors: members.len() - ok.len(),
                hits: hits.len(),
                evaluations: Stats::of(&col(|r| &r.evaluations)),
                generations: Stats::of(&col(|r| &r.generations)),
                hit_time: Stats::of(&hits),
                key,
            }
        })
        .collect()
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> Result<Vec<u8>, HarnessError> {
    let records = rows.iter().map(|a| {
        let k = &a.key;
        let mut rec = vec![
            k.algorithm.clone(),
            k.problem.clone(),
            k.instance.clone(),
            k.n.clone(),
            k.phi.clone(),
            k.eps1.clone(),
            k.eps2.clone(),
            k.eps2max.clone(),
            k.budget.clone(),
            a.runs.to_string(),
            a.errors.to_string(),
            a.hits.to_string(),
        ];
        rec.extend(Stats::cells(a.evaluations));
        rec.extend(Stats::cells(a.generations));
        rec.extend(Stats::cells(a.hit_time));
        rec.push(a.runs.to_string());
        rec
    });
    csv_bytes(&AGGREGATE_HEADER, records)
}

/// Least-squares line through `(log n, log mean evaluations)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    /// The configuration with `n` blanked.
    pub key: ConfigKey,
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Residuals in log space, one per point.
    pub residuals: Vec<f64>,
}

/// Fits `log(mean) = slope·log(n) + c` for each configuration measured at
/// two or more sizes. Configurations with a single size, or whose log sizes
/// have no variance, get no fit.
pub fn fit_slopes(aggregates: &[AggregateRow]) -> Vec<SlopeFit> {
    let mut groups: Vec<(ConfigKey, Vec<(f64, f64)>)> = Vec::new();
    for a in aggregates {
        let (Ok(n), Some(ev)) = (a.key.n.parse::<f64>(), a.evaluations) else {
            continue;
        };
        let key = ConfigKey {
            n: String::new(),
            ..a.key.clone()
        };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((n, ev.mean)),
            None => groups.push((key, vec![(n, ev.mean)])),
        }
    }
    groups
        .into_iter()
        .filter_map(|(key, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let logs: Vec<(f64, f64)> = points.iter().map(|&(n, m)| (n.ln(), m.ln())).collect();
            let k = logs.len() as f64;
            let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
            let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
            let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
            if logs.len() < 2 || sxx <= 1e-12 {
                return None;
            }
            let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let slope = sxy / sxx;
            let intercept = my - slope * mx;
            let residuals = logs.iter().map(|p| p.1 - (intercept + slope * p.0)).collect();
            Some(SlopeFit {
                key,
                points,
                slope,
                intercept,
                residuals,
            })
        })
        .collect()
}

pub fn slopes_csv(fits: &[SlopeFit]) -> Result<Vec<u8>, HarnessError> {
    let header = [
        "algorithm",
        "problem",
        "instance",
        "phi",
        "eps1",
        "eps2",
        "eps2max",
        "budget",
        "sizes",
        "slope",
        "intercept",
        "max_abs_residual",
    ];
    let records = fits.iter().map(|f| {
        let k = &f.key;
        let sizes: Vec<String> = f.points.iter().map(|p| p.0.to_string()).collect();
        let worst = f.residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
        vec![
            k.algorithm.clone(),
            k.problem.clone(),
            k.instance.clone(),
            k.phi.clone(),
            k.eps1.clone(),
            k.eps2.clone(),
            k.eps2max.clone(),
            k.budget.clone(),
            sizes.join(" "),
            f.slope.to_string(),
            f.intercept.to_string(),
            worst.to_string(),
        ]
    });
    csv_bytes(&header, records)
}

/// Files written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFiles {
    pub summary: std::path::PathBuf,
    pub metrics: std::path::PathBuf,
    pub aggregate: std::path::PathBuf,
    pub slopes: std::path::PathBuf,
}

/// Writes summary, metric, aggregate and slope CSVs named `<stem>_*.csv`
/// into `dir`.
pub fn write_outputs(dir: &FsPath, stem: &str, outcomes: &[RunOutcome]) -> Result<OutputFiles, HarnessError> {
    let rows: Vec<SummaryRow> = outcomes.iter().map(|o| o.row.clone()).collect();
    let aggregates = aggregate(&rows);
    let files = OutputFiles {
        summary: dir.join(format!("{stem}_summary.csv")),
        metrics: dir.join(format!("{stem}_metrics.csv")),
        aggregate: dir.join(format!("{stem}_aggregate.csv")),
        slopes: dir.join(format!("{stem}_slopes.csv")),
    };
    write_atomic(&files.summary, &summary_csv(&rows)?)?;
    write_atomic(&files.metrics, &metrics_csv(outcomes)?)?;
    write_atomic(&files.aggregate, &aggregate_csv(&aggregates)?)?;
    write_atomic(&files.slopes, &slopes_csv(&fit_slopes(&aggregates))?)?;
    Ok(files)
}

/// Outcome of replaying one row.
#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub original: SummaryRow,
    pub replayed: SummaryRow,
}

impl Replay {
    /// Rows agree in every column but wall-clock time.
    pub fn identical(&self) -> bool {
        self.original.canonical() == self.replayed.canonical()
    }
}

/// Re-executes the row with `run_id`.
pub fn replay(rows: &[SummaryRow], run_id: &str) -> Result<Replay, HarnessError> {
    let original = rows
        .iter()
        .find(|r| r.run_id == run_id)
        .ok_or_else(|| HarnessError::UnknownRun(run_id.to_string()))?;
    let spec = original.to_spec()?;
    Ok(Replay {
        original: original.clone(),
        replayed: execute(&spec).row,
    })
}

// ---------------------------------------------------------------- sweeps

/// Parses a sweep file into run specifications.
///
/// Lines are `key = value` with whitespace-separated lists. Keys before the
/// first `[section]` are defaults; each section is one block that overrides
/// them. Without sections the defaults form the only block. Keys:
/// `algorithm`, `problem`, `n`, `start`, `phi`, `instance`, `eps` (sets
/// `eps1` and `eps2` together), `eps1`, `eps2`, `eps2max`, `seeds` (list or
/// `a..b`), `budget`, `cadence`. Lists expand to their cartesian product;
/// `phi` only applies to `empmo-random`.
pub fn parse_sweep(text: &str) -> Result<Vec<RunSpec>, HarnessError> {
    let mut defaults: Vec<Setting> = Vec::new();
    let mut sections: Vec<(usize, Vec<Setting>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            if !content.ends_with(']') || content.len() < 3 {
                return Err(HarnessError::Config {
                    line,
                    reason: format!("bad section header {content:?}"),
                });
            }
            sections.push((line, Vec::new()));
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| HarnessError::Config {
            line,
            reason: format!("expected key = value, found {content:?}"),
        })?;
        let key = k.trim().to_string();
        if !SWEEP_KEYS.contains(&key.as_str()) {
            return Err(HarnessError::Config {
                line,
                reason: format!("unknown key {key:?}"),
            });
        }
        let values: Vec<String> = v.split_whitespace().map(str::to_string).collect();
        if values.is_empty() {
            return Err(HarnessError::Config {
                line,
                reason: format!("key {key:?} has no value"),
            });
        }
        let target = match sections.last_mut() {
            Some((_, s)) => s,
            None => &mut defaults,
        };
        if target.iter().any(|(_, k, _)| *k == key) {
            return Err(HarnessError::Config {
                line,
                reason: format!("key {key:?} repeated"),
            });
        }
        target.push((line, key, values));
    }
    if sections.is_empty() {
        sections.push((1, Vec::new()));
    }
    let mut specs = Vec::new();
    for (line, overrides) in sections {
        let mut block: BTreeMap<String, (usize, Vec<String>)> =
            defaults.iter().map(|(l, k, v)| (k.clone(), (*l, v.clone()))).collect();
        for (l, k, v) in overrides {
            block.insert(k, (l, v));
        }
        expand_block(&block, line, &mut specs)?;
    }
    Ok(specs)
}

const SWEEP_KEYS: [&str; 13] = [
    "algorithm",
    "problem",
    "n",
    "start",
    "phi",
    "instance",
    "eps",
    "eps1",
    "eps2",
    "eps2max",
    "seeds",
    "budget",
    "cadence",
];

/// `(line, key, values)` as written in a sweep file.
type Setting = (usize, String, Vec<String>);
type Block = BTreeMap<String, (usize, Vec<String>)>;
type Variant = (Target, Option<f64>, Option<(f64, f64, f64)>);

fn parse_list<T: FromStr>(block: &Block, key: &str, section: usize) -> Result<Option<Vec<T>>, HarnessError> {
    let Some((line, values)) = block.get(key) else {
        return Ok(None);
    };
    values
        .iter()
        .map(|v| {
            v.parse::<T>().map_err(|_| HarnessError::Config {
                line: *line,
                reason: format!("bad value {v:?} for {key}"),
            })
        })
        .collect::<Result<Vec<T>, _>>()
        .map(Some)
        .map_err(|e| match e {
            HarnessError::Config { .. } => e,
            _ => HarnessError::Config {
                line: section,
                reason: e.to_string(),
            },
        })
}

fn single<T: FromStr + Copy>(block: &Block, key: &str, section: usize, default: T) -> Result<T, HarnessError> {
    match parse_list::<T>(block, key, section)? {
        None => Ok(default),
        Some(v) if v.len() == 1 => Ok(v[0]),
        Some(_) => Err(HarnessError::Config {
            line: block[key].0,
            reason: format!("{key} takes a single value"),
        }),
    }
}

fn seeds(block: &Block, section: usize) -> Result<Vec<u64>, HarnessError> {
    let Some((line, values)) = block.get("seeds") else {
        return Err(HarnessError::Config {
            line: section,
            reason: "missing key \"seeds\"".to_string(),
        });
    };
    let bad = |v: &str| HarnessError::Config {
        line: *line,
        reason: format!("bad seed {v:?}"),
    };
    let mut out = Vec::new();
    for v in values {
        if let Some((a, b)) = v.split_once("..") {
            let a: u64 = a.parse().map_err(|_| bad(v))?;
            let b: u64 = b.parse().map_err(|_| bad(v))?;
            out.extend(a..b);
        } else {
            out.push(v.parse().map_err(|_| bad(v))?);
        }
    }
    Ok(out)
}

fn expand_block(block: &Block, section: usize, out: &mut Vec<RunSpec>) -> Result<(), HarnessError> {
    let missing = |key: &str| HarnessError::Config {
        line: section,
        reason: format!("missing key {key:?}"),
    };
    let algorithms: Vec<AlgorithmId> = parse_list(block, "algorithm", section)?.ok_or_else(|| missing("algorithm"))?;
    let seeds = seeds(block, section)?;
    let budget = single(block, "budget", section, StopRule::DEFAULT_BUDGET)?;
    let cadence = single(block, "cadence", section, SpRunConfig::DEFAULT_CADENCE)?;
    for alg in algorithms {
        let mut targets: Vec<Variant> = Vec::new();
        match alg {
            AlgorithmId::Pb(pb) => {
                let kinds: Vec<ProblemKind> =
                    parse_list(block, "problem", section)?.ok_or_else(|| missing("problem"))?;
                let sizes: Vec<usize> = parse_list(block, "n", section)?.ok_or_else(|| missing("n"))?;
                let starts: Vec<StartMode> = parse_list(block, "start", section)?.unwrap_or(vec![StartMode::Random]);
                let phis: Vec<Option<f64>> = if pb == PbAlgorithm::EmpmoRandom {
                    parse_list::<f64>(block, "phi", section)?
                        .ok_or_else(|| missing("phi"))?
                        .into_iter()
                        .map(Some)
                        .collect()
                } else {
                    vec![None]
                };
                for &kind in &kinds {
                    for &n in &sizes {
                        for &start in &starts {
                            for &phi in &phis {
                                targets.push((Target::PseudoBoolean { kind, n, start }, phi, None));
                            }
                        }
                    }
                }
            }
            AlgorithmId::Sp(_) => {
                let instances: Vec<String> =
                    parse_list(block, "instance", section)?.ok_or_else(|| missing("instance"))?;
                let pairs: Vec<(f64, f64)> = match (
                    parse_list::<f64>(block, "eps", section)?,
                    parse_list::<f64>(block, "eps1", section)?,
                    parse_list::<f64>(block, "eps2", section)?,
                ) {
                    (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                        return Err(HarnessError::Config {
                            line: block["eps"].0,
                            reason: "use either eps or eps1/eps2".to_string(),
                        })
                    }
                    (Some(e), None, None) => e.into_iter().map(|x| (x, x)).collect(),
                    (None, a, b) => {
                        let a = a.unwrap_or(vec![1.0]);
                        let b = b.unwrap_or(vec![1.0]);
                        a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
                    }
                };
                let maxes: Vec<Option<f64>> = parse_list::<f64>(block, "eps2max", section)?
                    .map(|v| v.into_iter().map(Some).collect())
                    .unwrap_or(vec![None]);
                for inst in &instances {
                    let r: InstanceRef =
                        inst.parse()
                            .map_err(|e: crate::instances::InstanceError| HarnessError::Config {
                                line: block["instance"].0,
                                reason: e.to_string(),
                            })?;
                    for &(e1, e2) in &pairs {
                        for &m in &maxes {
                            // Default ceiling: twice party 2's slack.
                            let e3 = m.unwrap_or(2.0 * e2);
                            targets.push((Target::Graph(r.clone()), None, Some((e1, e2, e3))));
                        }
                    }
                }
            }
        }
        for (target, phi, eps) in targets {
            for &seed in &seeds {
                out.push(RunSpec {
                    algorithm: alg,
                    target: target.clone(),
                    phi,
                    eps,
                    seed,
                    budget,
                    cadence,
                });
            }
        }
    }
    Ok(())
}
