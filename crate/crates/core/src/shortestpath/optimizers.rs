//! Path optimizers: the two-stage simple optimizer with ultimatum-game
//! consensus, the consensus-archive optimizer, and a joint-objective
//! baseline.
//!
//! Time is counted in generations. One generation is one selection plus one
//! mutation; a mutation that returns no path still uses its generation but
//! costs no evaluation.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::archive::{BoxArchive, SpEntry, View};
use super::boxes::ApproxParams;
use super::consensus::{ultimatum_consensus, ConsensusOutcome};
use super::graph::WeightedDigraph;
use super::metrics::{snapshot, CommonReference, MetricSample};
use super::mutation::{mutate_path, DEFAULT_WALK_FACTOR};
use super::SpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpAlgorithm {
    EmpmoSimpleSp,
    EmpmoConsSp,
    DemoSp,
}

impl SpAlgorithm {
    pub const ALL: [SpAlgorithm; 3] = [
        SpAlgorithm::EmpmoSimpleSp,
        SpAlgorithm::EmpmoConsSp,
        SpAlgorithm::DemoSp,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SpAlgorithm::EmpmoSimpleSp => "empmo-simple-sp",
            SpAlgorithm::EmpmoConsSp => "empmo-cons-sp",
            SpAlgorithm::DemoSp => "demo-sp",
        }
    }
}

impl fmt::Display for SpAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SpAlgorithm {
    type Err = SpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SpAlgorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| SpError::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpRunConfig {
    pub params: ApproxParams,
    /// Generations to run. The simple optimizer splits them evenly between
    /// the two parties.
    pub budget: u64,
    /// Generations between metric samples; 0 disables sampling.
    pub metric_cadence: u64,
    /// Longest walk, in vertices; defaults to `2n`.
    pub max_vertices: Option<usize>,
    /// End the run once every endpoint holds an exact common solution.
    pub stop_at_target: bool,
}

impl SpRunConfig {
    pub const DEFAULT_CADENCE: u64 = 100;

    pub fn new(params: ApproxParams, budget: u64) -> Self {
        SpRunConfig {
            params,
            budget,
            metric_cadence: Self::DEFAULT_CADENCE,
            max_vertices: None,
            stop_at_target: false,
        }
    }

    fn walk_cap(&self, g: &WeightedDigraph) -> usize {
        self.max_vertices.unwrap_or(DEFAULT_WALK_FACTOR * g.n())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpRunTrace {
    pub algorithm: SpAlgorithm,
    pub seed: u64,
    /// Box base used by the search.
    pub r: f64,
    pub generations: u64,
    pub evaluations: u64,
    /// Generations whose mutation produced no path.
    pub no_change: u64,
    /// Evaluations spent when every endpoint first held an exact common
    /// solution; needs a reference.
    pub hit_time: Option<u64>,
    /// Largest population (root included) seen after any generation.
    pub max_population: usize,
    /// Final archive without the root. For the simple optimizer these are
    /// the agreed consensus members.
    pub archive: Vec<SpEntry>,
    /// Per-party archives of the simple optimizer.
    pub party_archives: Vec<Vec<SpEntry>>,
    pub consensus: Option<ConsensusOutcome>,
    pub metrics: Vec<MetricSample>,
}

/// Runs `algorithm` with a generator seeded from `seed`. `reference` enables
/// metric samples and hit detection.
pub fn run_sp(
    algorithm: SpAlgorithm,
    g: &WeightedDigraph,
    config: &SpRunConfig,
    reference: Option<&CommonReference>,
    seed: u64,
) -> Result<SpRunTrace, SpError> {
    config.params.validate()?;
    if g.party_count() != 2 {
        return Err(SpError::PartyCount(g.party_count()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = match algorithm {
        SpAlgorithm::EmpmoSimpleSp => simple(g, config, reference, &mut rng),
        SpAlgorithm::EmpmoConsSp => {
            single_archive(g, config, reference, vec![View::Party(0), View::Party(1)], &mut rng)
        }
        SpAlgorithm::DemoSp => single_archive(g, config, reference, vec![View::Joint], &mut rng),
    };
    trace.algorithm = algorithm;
    trace.seed = seed;
    Ok(trace)
}

pub fn run_empmo_simple_sp(
    g: &WeightedDigraph,
    config: &SpRunConfig,
    reference: Option<&CommonReference>,
    seed: u64,
) -> Result<SpRunTrace, SpError> {
    run_sp(SpAlgorithm::EmpmoSimpleSp, g, config, reference, seed)
}

pub fn run_empmo_cons_sp(
    g: &WeightedDigraph,
    config: &SpRunConfig,
    reference: Option<&CommonReference>,
    seed: u64,
) -> Result<SpRunTrace, SpError> {
    run_sp(SpAlgorithm::EmpmoConsSp, g, config, reference, seed)
}

pub fn run_demo_sp(
    g: &WeightedDigraph,
    config: &SpRunConfig,
    reference: Option<&CommonReference>,
    seed: u64,
) -> Result<SpRunTrace, SpError> {
    run_sp(SpAlgorithm::DemoSp, g, config, reference, seed)
}

/// Upper bound on the consensus archive size (root included):
/// `min_m (n-1)(⌊log_r((n-1) w_m^max)⌋ + 1)^(k_m - 1) + 1`.
pub fn population_bound(g: &WeightedDigraph, r: f64) -> u128 {
    let n1 = (g.n() - 1) as u128;
    (0..g.party_count())
        .map(|m| {
            let reach = (g.n() as u64 - 1) * g.max_weight(m);
            let side = u128::from(super::boxes::floor_log(reach, r)) + 1;
            n1 * side.pow(g.party_dims()[m] as u32 - 1) + 1
        })
        .min()
        .expect("graphs have at least one party")
}

#[derive(Default)]
struct Counters {
    generations: u64,
    evaluations: u64,
    no_change: u64,
}

/// One generation on `archive`; returns whether an offspring entered.
fn generation<R: Rng>(
    g: &WeightedDigraph,
    archive: &mut BoxArchive,
    cap: usize,
    c: &mut Counters,
    rng: &mut R,
) -> bool {
    c.generations += 1;
    let parent = archive.select(rng).path.clone();
    match mutate_path(g, &parent, cap, rng) {
        None => {
            c.no_change += 1;
            false
        }
        Some(child) => {
            c.evaluations += 1;
            let entry = SpEntry::evaluate(g, child, c.generations).expect("mutation only follows edges");
            archive.offer(entry)
        }
    }
}

fn sample<'a>(
    c: &Counters,
    members: impl IntoIterator<Item = &'a SpEntry>,
    reference: &CommonReference,
) -> MetricSample {
    let s = snapshot(members, reference);
    MetricSample {
        generation: c.generations,
        evaluations: c.evaluations,
        max_eps: s.max_eps,
        mean_eps_members: s.mean_eps_members,
        mean_eps_endpoints: s.mean_eps_endpoints,
        covered_endpoints: s.covered_endpoints,
    }
}

fn due(c: &Counters, config: &SpRunConfig) -> bool {
    config.metric_cadence > 0 && c.generations.is_multiple_of(config.metric_cadence)
}

fn single_archive<R: Rng>(
    g: &WeightedDigraph,
    config: &SpRunConfig,
    reference: Option<&CommonReference>,
    views: Vec<View>,
    rng: &mut R,
) -> SpRunTrace {
    let r = config.params.box_base(g.n());
    let cap = config.walk_cap(g);
    let mut archive = BoxArchive::new(g, views, r);
    let mut c = Counters::default();
    let mut hit_time = None;
    let mut metrics = Vec::new();
    let mut max_population = archive.size();
    while c.generations < config.budget {
        let accepted = generation(g, &mut archive, cap, &mut c, rng);
        max_population = max_population.max(archive.size());
        if let Some(reference) = reference {
            if accepted && hit_time.is_none() && snapshot(archive.members(), reference).all_exact {
                hit_time = Some(c.evaluations);
            }
            if due(&c, config) {
                metrics.push(sample(&c, archive.members(), reference));
            }
        }
        if config.stop_at_target && hit_time.is_some() {
            break;
        }
    }
    close_series(&mut metrics, &c, config, reference, archive.members());
    SpRunTrace {
        algorithm: SpAlgorithm::EmpmoConsSp,
        seed: 0,
        r,
        generations: c.generations,
        evaluations: c.evaluations,
        no_change: c.no_change,
        hit_time,
        max_population,
        archive: archive.member_vec(),
        party_archives: Vec::new(),
        consensus: None,
        metrics,
    }
}

/// Adds a last sample when the run ended between cadence points.
fn close_series<'a>(
    metrics: &mut Vec<MetricSample>,
    c: &Counters,
    config: &SpRunConfig,
    reference: Option<&CommonReference>,
    members: impl IntoIterator<Item = &'a SpEntry>,
) {
    let Some(reference) = reference else { return };
    if config.metric_cadence == 0 || c.generations == 0 {
        return;
    }
    if metrics.last().map(|s| s.generation) != Some(c.generations) {
        metrics.push(sample(c, members, reference));
    }
}

fn simple<R: Rng>(
    g: &WeightedDigraph,
    config: &SpRunConfig,
    reference: Option<&CommonReference>,
    rng: &mut R,
) -> SpRunTrace {
    let r = config.params.box_base(g.n());
    let cap = config.walk_cap(g);
    let mut archives = [
        BoxArchive::new(g, vec![View::Party(0)], r),
        BoxArchive::new(g, vec![View::Party(1)], r),
    ];
    let agree = |a: &[BoxArchive; 2]| ultimatum_consensus(&a[0].member_vec(), &a[1].member_vec(), &config.params);
    let mut c = Counters::default();
    let mut hit_time = None;
    let mut metrics = Vec::new();
    let mut max_population = 1;
    'outer: while c.generations < config.budget {
        for m in 0..2 {
            if c.generations >= config.budget {
                break;
            }
            let accepted = generation(g, &mut archives[m], cap, &mut c, rng);
            max_population = max_population.max(archives[m].size());
            if let Some(reference) = reference {
                let needs_hit = accepted && hit_time.is_none();
                if needs_hit || due(&c, config) {
                    let outcome = agree(&archives);
                    if needs_hit && snapshot(outcome.members(), reference).all_exact {
                        hit_time = Some(c.evaluations);
                    }
                    if due(&c, config) {
                        metrics.push(sample(&c, outcome.members(), reference));
                    }
                }
            }
            if config.stop_at_target && hit_time.is_some() {
                break 'outer;
            }
        }
    }
    let outcome = agree(&archives);
    close_series(&mut metrics, &c, config, reference, outcome.members());
    SpRunTrace {
        algorithm: SpAlgorithm::EmpmoSimpleSp,
        seed: 0,
        r,
        generations: c.generations,
        evaluations: c.evaluations,
        no_change: c.no_change,
        hit_time,
        max_population,
        archive: outcome.members().cloned().collect(),
        party_archives: archives.iter().map(BoxArchive::member_vec).collect(),
        consensus: Some(outcome),
        metrics,
    }
}
