//! SEMO and the three bi-party optimizers on the all-ones/all-zeros family.
//!
//! Every optimizer owns its random generator and draws from it in a fixed
//! order per iteration: individual index, then (EMPMO_random only) party,
//! then the bit to flip. Identical seeds therefore give identical runs.
//!
//! Evaluation counting: the initial solution costs one evaluation per
//! archive that holds it (one for SEMO, EMPMO_random and EMPMO_payoff, one
//! per party for EMPMO_simple); every offspring costs one more.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::problem::{one_bit_mutation, BitString, PseudoBooleanProblem};
use super::PseudoBooleanError;
use crate::pareto::{compare_slices, multiparty_payoff, Dominance, MultiPartyObjectives, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PbAlgorithm {
    Semo,
    EmpmoSimple,
    EmpmoRandom,
    EmpmoPayoff,
}

impl PbAlgorithm {
    pub const ALL: [PbAlgorithm; 4] = [
        PbAlgorithm::Semo,
        PbAlgorithm::EmpmoSimple,
        PbAlgorithm::EmpmoRandom,
        PbAlgorithm::EmpmoPayoff,
    ];

    pub fn id(self) -> &'static str {
        match self {
            PbAlgorithm::Semo => "semo",
            PbAlgorithm::EmpmoSimple => "empmo-simple",
            PbAlgorithm::EmpmoRandom => "empmo-random",
            PbAlgorithm::EmpmoPayoff => "empmo-payoff",
        }
    }
}

impl fmt::Display for PbAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PbAlgorithm {
    type Err = PseudoBooleanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PbAlgorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| PseudoBooleanError::UnknownAlgorithm(s.to_string()))
    }
}

/// A solution together with its cached objectives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationEntry {
    pub solution: BitString,
    pub objectives: MultiPartyObjectives,
    pub birth_iteration: u64,
}

/// When a run ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    /// Stop as soon as the target set is covered.
    pub stop_at_target: bool,
    /// Never start an iteration once this many evaluations were spent.
    pub max_evaluations: u64,
}

impl StopRule {
    pub const DEFAULT_BUDGET: u64 = 100_000_000;

    pub fn at_target() -> Self {
        StopRule {
            stop_at_target: true,
            max_evaluations: Self::DEFAULT_BUDGET,
        }
    }

    pub fn budget(max_evaluations: u64) -> Self {
        StopRule {
            stop_at_target: false,
            max_evaluations,
        }
    }

    pub fn with_budget(mut self, max_evaluations: u64) -> Self {
        self.max_evaluations = max_evaluations;
        self
    }
}

impl Default for StopRule {
    fn default() -> Self {
        Self::at_target()
    }
}

/// Initial solution of a run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Start {
    /// Uniform over `{0,1}^n`, drawn from the run's generator.
    #[default]
    Uniform,
    Fixed(BitString),
}

impl Start {
    fn draw<R: Rng>(&self, n: usize, rng: &mut R) -> Result<BitString, PseudoBooleanError> {
        match self {
            Start::Uniform => Ok(BitString::random(n, rng)),
            Start::Fixed(x) if x.len() == n => Ok(x.clone()),
            Start::Fixed(x) => Err(PseudoBooleanError::LengthMismatch {
                expected: n,
                got: x.len(),
            }),
        }
    }
}

/// One optimizer, advanced one iteration at a time.
pub trait Optimizer {
    fn step(&mut self);
    fn evaluations(&self) -> u64;
    fn iterations(&self) -> u64;
    /// Evaluation count at which the target set was first covered.
    fn hit_time(&self) -> Option<u64>;
    /// The archive the optimizer reports as its answer.
    fn population(&self) -> &[PopulationEntry];
    /// Per-party archives; empty for single-archive optimizers.
    fn party_archives(&self) -> &[Vec<PopulationEntry>] {
        &[]
    }
}

/// Result of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: PbAlgorithm,
    pub problem: PseudoBooleanProblem,
    pub phi: Option<f64>,
    pub seed: u64,
    pub evaluations: u64,
    pub iterations: u64,
    pub hit_time: Option<u64>,
    pub final_population: Vec<PopulationEntry>,
    pub party_archives: Vec<Vec<PopulationEntry>>,
}

impl RunTrace {
    pub const CSV_HEADER: [&'static str; 10] = [
        "run_id",
        "algorithm",
        "problem",
        "n",
        "phi",
        "seed",
        "evaluations",
        "iterations",
        "hit_time",
        "wall_ms",
    ];

    /// One CSV record in `CSV_HEADER` order.
    pub fn csv_record(&self, run_id: &str, wall_ms: u128) -> Vec<String> {
        vec![
            run_id.to_string(),
            self.algorithm.id().to_string(),
            self.problem.kind().name().to_string(),
            self.problem.n().to_string(),
            self.phi.map(|p| p.to_string()).unwrap_or_default(),
            self.seed.to_string(),
            self.evaluations.to_string(),
            self.iterations.to_string(),
            self.hit_time.map(|h| h.to_string()).unwrap_or_default(),
            wall_ms.to_string(),
        ]
    }
}

/// Drives `opt` until `stop` fires.
pub fn drive<O: Optimizer>(opt: &mut O, stop: &StopRule) {
    loop {
        if stop.stop_at_target && opt.hit_time().is_some() {
            break;
        }
        if opt.evaluations() >= stop.max_evaluations {
            break;
        }
        opt.step();
    }
}

fn finish<O: Optimizer>(
    opt: O,
    algorithm: PbAlgorithm,
    problem: PseudoBooleanProblem,
    phi: Option<f64>,
    seed: u64,
) -> RunTrace {
    RunTrace {
        algorithm,
        problem,
        phi,
        seed,
        evaluations: opt.evaluations(),
        iterations: opt.iterations(),
        hit_time: opt.hit_time(),
        final_population: opt.population().to_vec(),
        party_archives: opt.party_archives().to_vec(),
    }
}

pub fn run_semo(
    problem: PseudoBooleanProblem,
    start: &Start,
    seed: u64,
    stop: &StopRule,
) -> Result<RunTrace, PseudoBooleanError> {
    let mut opt = Semo::new(problem, start, ChaCha8Rng::seed_from_u64(seed))?;
    drive(&mut opt, stop);
    Ok(finish(opt, PbAlgorithm::Semo, problem, None, seed))
}

pub fn run_empmo_simple(
    problem: PseudoBooleanProblem,
    start: &Start,
    seed: u64,
    stop: &StopRule,
) -> Result<RunTrace, PseudoBooleanError> {
    let mut opt = EmpmoSimple::new(problem, start, ChaCha8Rng::seed_from_u64(seed))?;
    drive(&mut opt, stop);
    Ok(finish(opt, PbAlgorithm::EmpmoSimple, problem, None, seed))
}

pub fn run_empmo_random(
    problem: PseudoBooleanProblem,
    phi: f64,
    start: &Start,
    seed: u64,
    stop: &StopRule,
) -> Result<RunTrace, PseudoBooleanError> {
    let mut opt = EmpmoRandom::new(problem, phi, start, ChaCha8Rng::seed_from_u64(seed))?;
    drive(&mut opt, stop);
    Ok(finish(opt, PbAlgorithm::EmpmoRandom, problem, Some(phi), seed))
}

pub fn run_empmo_payoff(
    problem: PseudoBooleanProblem,
    start: &Start,
    seed: u64,
    stop: &StopRule,
) -> Result<RunTrace, PseudoBooleanError> {
    let mut opt = EmpmoPayoff::new(problem, start, ChaCha8Rng::seed_from_u64(seed))?;
    drive(&mut opt, stop);
    Ok(finish(opt, PbAlgorithm::EmpmoPayoff, problem, None, seed))
}

/// Dispatches on `algorithm`. `phi` is required for EMPMO_random and
/// ignored otherwise.
pub fn run_algorithm(
    algorithm: PbAlgorithm,
    problem: PseudoBooleanProblem,
    phi: Option<f64>,
    start: &Start,
    seed: u64,
    stop: &StopRule,
) -> Result<RunTrace, PseudoBooleanError> {
    match algorithm {
        PbAlgorithm::Semo => run_semo(problem, start, seed, stop),
        PbAlgorithm::EmpmoSimple => run_empmo_simple(problem, start, seed, stop),
        PbAlgorithm::EmpmoRandom => {
            let phi = phi.ok_or(PseudoBooleanError::MissingPhi)?;
            run_empmo_random(problem, phi, start, seed, stop)
        }
        PbAlgorithm::EmpmoPayoff => run_empmo_payoff(problem, start, seed, stop),
    }
}

#[inline]
fn party_relation(a: &MultiPartyObjectives, b: &MultiPartyObjectives, m: usize, sense: Sense) -> Dominance {
    compare_slices(a.party(m).values(), b.party(m).values(), sense)
}

/// Offers `candidate` to an archive that keeps mutually non-dominated,
/// objective-distinct entries under party `m`. Returns whether it entered.
fn offer_to_party_archive(
    archive: &mut Vec<PopulationEntry>,
    candidate: PopulationEntry,
    m: usize,
    sense: Sense,
) -> bool {
    let blocked = archive.iter().any(|z| {
        matches!(
            party_relation(&z.objectives, &candidate.objectives, m, sense),
            Dominance::Dominates | Dominance::Equal
        )
    });
    if blocked {
        return false;
    }
    archive.retain(|z| party_relation(&candidate.objectives, &z.objectives, m, sense) != Dominance::Dominates);
    archive.push(candidate);
    true
}

fn require_parties(problem: &PseudoBooleanProblem, expected: usize) -> Result<(), PseudoBooleanError> {
    if problem.party_count() != expected {
        return Err(PseudoBooleanError::PartyCount {
            expected,
            got: problem.party_count(),
        });
    }
    Ok(())
}

/// Simple evolutionary multi-objective optimizer on a single-party problem.
/// The target is the whole Pareto front.
pub struct Semo<R> {
    problem: PseudoBooleanProblem,
    rng: R,
    archive: Vec<PopulationEntry>,
    front: HashSet<MultiPartyObjectives>,
    evaluations: u64,
    iterations: u64,
    hit_time: Option<u64>,
}

impl<R: Rng> Semo<R> {
    pub fn new(problem: PseudoBooleanProblem, start: &Start, mut rng: R) -> Result<Self, PseudoBooleanError> {
        require_parties(&problem, 1)?;
        let x = start.draw(problem.n(), &mut rng)?;
        let objectives = problem.eval_unchecked(&x);
        let mut opt = Semo {
            problem,
            rng,
            archive: vec![PopulationEntry {
                solution: x,
                objectives,
                birth_iteration: 0,
            }],
            front: problem.target_objectives().into_iter().collect(),
            evaluations: 1,
            iterations: 0,
            hit_time: None,
        };
        opt.check_target();
        Ok(opt)
    }

    fn check_target(&mut self) {
        if self.hit_time.is_none() {
            let covered = self
                .archive
                .iter()
                .filter(|e| self.front.contains(&e.objectives))
                .count();
            if covered == self.front.len() {
                self.hit_time = Some(self.evaluations);
            }
        }
    }
}

impl<R: Rng> Optimizer for Semo<R> {
    fn step(&mut self) {
        self.iterations += 1;
        let parent = &self.archive[self.rng.random_range(0..self.archive.len())];
        let child = one_bit_mutation(&parent.solution, &mut self.rng);
        let objectives = self.problem.eval_unchecked(&child);
        self.evaluations += 1;
        let entry = PopulationEntry {
            solution: child,
            objectives,
            birth_iteration: self.iterations,
        };
        if offer_to_party_archive(&mut self.archive, entry, 0, self.problem.sense()) {
            self.check_target();
        }
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn iterations(&self) -> u64 {
        self.iterations
    }

    fn hit_time(&self) -> Option<u64> {
        self.hit_time
    }

    fn population(&self) -> &[PopulationEntry] {
        &self.archive
    }
}

/// Searches every party's Pareto set independently and keeps the common set
/// `Φ` alongside.
///
/// `Φ` is kept equal to the objective-level intersection of the party
/// archives: a solution belongs to it when, for every party `m`, some member
/// of `P_m` has the same party-`m` objectives. Since each `P_m` is an
/// antichain for party `m`, no member of `Φ` dominates another for any
/// party, and `Φ` collapses to the common Pareto set once every archive
/// holds its party's front.
pub struct EmpmoSimple<R> {
    problem: PseudoBooleanProblem,
    rng: R,
    archives: Vec<Vec<PopulationEntry>>,
    common: Vec<PopulationEntry>,
    target: MultiPartyObjectives,
    evaluations: u64,
    iterations: u64,
    hit_time: Option<u64>,
}

impl<R: Rng> EmpmoSimple<R> {
    pub fn new(problem: PseudoBooleanProblem, start: &Start, mut rng: R) -> Result<Self, PseudoBooleanError> {
        if problem.party_count() < 2 {
            return Err(PseudoBooleanError::PartyCount {
                expected: 2,
                got: problem.party_count(),
            });
        }
        let x = start.draw(problem.n(), &mut rng)?;
        let objectives = problem.eval_unchecked(&x);
        let entry = PopulationEntry {
            solution: x,
            objectives,
            birth_iteration: 0,
        };
        let parties = problem.party_count();
        let mut opt = EmpmoSimple {
            problem,
            rng,
            archives: vec![vec![entry.clone()]; parties],
            common: vec![entry],
            target: problem.target_objectives().swap_remove(0),
            evaluations: parties as u64,
            iterations: 0,
            hit_time: None,
        };
        opt.check_target();
        Ok(opt)
    }

    pub fn common_set(&self) -> &[PopulationEntry] {
        &self.common
    }

    fn check_target(&mut self) {
        if self.hit_time.is_none() && self.common.iter().any(|e| e.objectives == self.target) {
            self.hit_time = Some(self.evaluations);
        }
    }

    fn in_every_archive(&self, objectives: &MultiPartyObjectives) -> bool {
        self.archives
            .iter()
            .enumerate()
            .all(|(m, archive)| archive.iter().any(|z| z.objectives.party(m) == objectives.party(m)))
    }

    fn refresh_common(&mut self) {
        let mut common: Vec<PopulationEntry> = Vec::with_capacity(self.common.len() + 1);
        let retained = self.common.iter().filter(|e| self.in_every_archive(&e.objectives));
        let fresh = self.archives.iter().flatten();
        for candidate in retained.chain(fresh) {
            if !common.iter().any(|e| e.objectives == candidate.objectives)
                && self.in_every_archive(&candidate.objectives)
            {
                common.push(candidate.clone());
            }
        }
        self.common = common;
    }
}

impl<R: Rng> Optimizer for EmpmoSimple<R> {
    fn step(&mut self) {
        self.iterations += 1;
        let sense = self.problem.sense();
        for m in 0..self.archives.len() {
            let archive = &self.archives[m];
            let parent = &archive[self.rng.random_range(0..archive.len())];
            let child = one_bit_mutation(&parent.solution, &mut self.rng);
            let objectives = self.problem.eval_unchecked(&child);
            self.evaluations += 1;
            let entry = PopulationEntry {
                solution: child,
                objectives,
                birth_iteration: self.iterations,
            };
            if offer_to_party_archive(&mut self.archives[m], entry, m, sense) {
                self.refresh_common();
                self.check_target();
            }
        }
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn iterations(&self) -> u64 {
        self.iterations
    }

    fn hit_time(&self) -> Option<u64> {
        self.hit_time
    }

    fn population(&self) -> &[PopulationEntry] {
        &self.common
    }

    fn party_archives(&self) -> &[Vec<PopulationEntry>] {
        &self.archives
    }
}

/// Single archive; each iteration a randomly chosen party (party 1 with
/// probability `phi`) decides acceptance and then prunes the archive to its
/// own non-dominated entries.
pub struct EmpmoRandom<R> {
    problem: PseudoBooleanProblem,
    phi: f64,
    rng: R,
    archive: Vec<PopulationEntry>,
    target: MultiPartyObjectives,
    last_party: Option<usize>,
    evaluations: u64,
    iterations: u64,
    hit_time: Option<u64>,
}

impl<R: Rng> EmpmoRandom<R> {
    pub fn new(problem: PseudoBooleanProblem, phi: f64, start: &Start, mut rng: R) -> Result<Self, PseudoBooleanError> {
        require_parties(&problem, 2)?;
        if !(phi > 0.0 && phi < 1.0) {
            return Err(PseudoBooleanError::InvalidPhi(phi));
        }
        let x = start.draw(problem.n(), &mut rng)?;
        let objectives = problem.eval_unchecked(&x);
        let mut opt = EmpmoRandom {
            problem,
            phi,
            rng,
            archive: vec![PopulationEntry {
                solution: x,
                objectives,
                birth_iteration: 0,
            }],
            target: problem.target_objectives().swap_remove(0),
            last_party: None,
            evaluations: 1,
            iterations: 0,
            hit_time: None,
        };
        opt.check_target();
        Ok(opt)
    }

    /// Party that decided the most recent iteration.
    pub fn last_party(&self) -> Option<usize> {
        self.last_party
    }

    fn check_target(&mut self) {
        if self.hit_time.is_none() && self.archive.iter().any(|e| e.objectives == self.target) {
            self.hit_time = Some(self.evaluations);
        }
    }

    /// Drops every entry weakly dominated by another entry under party `m`.
    /// Among entries with equal party-`m` objectives the earliest one stays,
    /// so an equivalence class is never emptied.
    fn prune(&mut self, m: usize) {
        let sense = self.problem.sense();
        let archive = &self.archive;
        let keep: Vec<bool> = (0..archive.len())
            .map(|i| {
                !archive.iter().enumerate().any(|(j, z)| {
                    j != i
                        && match party_relation(&z.objectives, &archive[i].objectives, m, sense) {
                            Dominance::Dominates => true,
                            Dominance::Equal => j < i,
                            _ => false,
                        }
                })
            })
            .collect();
        let mut flags = keep.into_iter();
        self.archive.retain(|_| flags.next().unwrap_or(true));
    }
}

impl<R: Rng> Optimizer for EmpmoRandom<R> {
    fn step(&mut self) {
        self.iterations += 1;
        let parent_index = self.rng.random_range(0..self.archive.len());
        let m = if self.rng.random_bool(self.phi) { 0 } else { 1 };
        let child = one_bit_mutation(&self.archive[parent_index].solution, &mut self.rng);
        let objectives = self.problem.eval_unchecked(&child);
        self.evaluations += 1;
        let entry = PopulationEntry {
            solution: child,
            objectives,
            birth_iteration: self.iterations,
        };
        offer_to_party_archive(&mut self.archive, entry, m, self.problem.sense());
        self.prune(m);
        self.last_party = Some(m);
        self.check_target();
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn iterations(&self) -> u64 {
        self.iterations
    }

    fn hit_time(&self) -> Option<u64> {
        self.hit_time
    }

    fn population(&self) -> &[PopulationEntry] {
        &self.archive
    }
}

/// Keeps one solution and moves to an offspring only when the multi-party
/// payoff of the move is positive.
pub struct EmpmoPayoff<R> {
    problem: PseudoBooleanProblem,
    rng: R,
    current: [PopulationEntry; 1],
    target: MultiPartyObjectives,
    evaluations: u64,
    iterations: u64,
    hit_time: Option<u64>,
}

impl<R: Rng> EmpmoPayoff<R> {
    pub fn new(problem: PseudoBooleanProblem, start: &Start, mut rng: R) -> Result<Self, PseudoBooleanError> {
        if problem.party_count() < 2 {
            return Err(PseudoBooleanError::PartyCount {
                expected: 2,
                got: problem.party_count(),
            });
        }
        let x = start.draw(problem.n(), &mut rng)?;
        let objectives = problem.eval_unchecked(&x);
        let mut opt = EmpmoPayoff {
            problem,
            rng,
            current: [PopulationEntry {
                solution: x,
                objectives,
                birth_iteration: 0,
            }],
            target: problem.target_objectives().swap_remove(0),
            evaluations: 1,
            iterations: 0,
            hit_time: None,
        };
        opt.check_target();
        Ok(opt)
    }

    fn check_target(&mut self) {
        if self.hit_time.is_none() && self.current[0].objectives == self.target {
            self.hit_time = Some(self.evaluations);
        }
    }
}

impl<R: Rng> Optimizer for EmpmoPayoff<R> {
    fn step(&mut self) {
        self.iterations += 1;
        // The population always has one member, so selection needs no draw.
        let child = one_bit_mutation(&self.current[0].solution, &mut self.rng);
        let objectives = self.problem.eval_unchecked(&child);
        self.evaluations += 1;
        let payoff = multiparty_payoff(&self.current[0].objectives, &objectives, self.problem.sense())
            .expect("objectives of one problem share their structure");
        if payoff.total > 0 {
            self.current[0] = PopulationEntry {
                solution: child,
                objectives,
                birth_iteration: self.iterations,
            };
            self.check_target();
        }
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn iterations(&self) -> u64 {
        self.iterations
    }

    fn hit_time(&self) -> Option<u64> {
        self.hit_time
    }

    fn population(&self) -> &[PopulationEntry] {
        &self.current
    }
}
