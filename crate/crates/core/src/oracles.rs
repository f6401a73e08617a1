//! Exact ground truth for small instances.
//!
//! Everything here is computed by exhaustive enumeration or closed forms and
//! shares no code with the optimizers beyond evaluation and dominance.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::Zero;
use thiserror::Error;

use crate::pareto::{compare_slices, Dominance, MultiPartyObjectives, ObjectiveVector, Sense};
use crate::pseudoboolean::{BitString, PseudoBooleanProblem};
use crate::shortestpath::{CommonReference, Path, SpEntry, WeightedDigraph, SOURCE};

/// Largest bit-string length enumerated exhaustively.
pub const MAX_PB_BITS: usize = 16;
/// Largest graph whose simple paths are enumerated.
pub const MAX_GRAPH_VERTICES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} of size {n} exceeds the exhaustive limit {max}")]
    TooLarge { what: &'static str, n: usize, max: usize },
    #[error("no common solutions for endpoint {0}")]
    EmptyCommonSet(usize),
    #[error("no reference common set is available for this instance")]
    NoReference,
}

/// Exact Pareto sets of one problem (or one endpoint of a graph).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoCatalog<S> {
    /// For each party, every solution whose party objectives are
    /// non-dominated.
    pub per_party: Vec<Vec<(S, MultiPartyObjectives)>>,
    /// Solutions in every party's set.
    pub common: Vec<(S, MultiPartyObjectives)>,
    /// Non-dominated solutions of the concatenated objective vector.
    pub joint: Vec<(S, MultiPartyObjectives)>,
}

impl<S: Clone + Ord> ParetoCatalog<S> {
    fn from_candidates(candidates: Vec<(S, MultiPartyObjectives)>, parties: usize, sense: Sense) -> Self {
        let per_party: Vec<_> = (0..parties)
            .map(|m| non_dominated(&candidates, |o| o.party(m).clone(), sense))
            .collect();
        let joint = non_dominated(&candidates, MultiPartyObjectives::joint, sense);
        let common = objective_intersection(&per_party);
        ParetoCatalog {
            per_party,
            common,
            joint,
        }
    }

    pub fn common_solutions(&self) -> BTreeSet<S> {
        self.common.iter().map(|(s, _)| s.clone()).collect()
    }

    pub fn party_solutions(&self, m: usize) -> BTreeSet<S> {
        self.per_party[m].iter().map(|(s, _)| s.clone()).collect()
    }

    pub fn joint_solutions(&self) -> BTreeSet<S> {
        self.joint.iter().map(|(s, _)| s.clone()).collect()
    }

    /// Distinct party-`m` objective vectors of party `m`'s set.
    pub fn party_front(&self, m: usize) -> BTreeSet<ObjectiveVector> {
        self.per_party[m].iter().map(|(_, o)| o.party(m).clone()).collect()
    }
}

/// Members of the first party's set whose objectives, party by party, occur
/// in every party's set.
fn objective_intersection<S: Clone>(per_party: &[Vec<(S, MultiPartyObjectives)>]) -> Vec<(S, MultiPartyObjectives)> {
    let fronts: Vec<HashSet<&ObjectiveVector>> = per_party
        .iter()
        .enumerate()
        .map(|(m, set)| set.iter().map(|(_, o)| o.party(m)).collect())
        .collect();
    per_party[0]
        .iter()
        .filter(|(_, o)| fronts.iter().enumerate().all(|(m, f)| f.contains(o.party(m))))
        .cloned()
        .collect()
}

/// Candidates whose projected vector no other candidate's projection
/// dominates.
fn non_dominated<S: Clone>(
    candidates: &[(S, MultiPartyObjectives)],
    project: impl Fn(&MultiPartyObjectives) -> ObjectiveVector,
    sense: Sense,
) -> Vec<(S, MultiPartyObjectives)> {
    // Work on distinct vectors: there are far fewer of them than solutions.
    let projected: Vec<ObjectiveVector> = candidates.iter().map(|(_, o)| project(o)).collect();
    let distinct: BTreeSet<&ObjectiveVector> = projected.iter().collect();
    let distinct: Vec<&ObjectiveVector> = distinct.into_iter().collect();
    let front: HashSet<&ObjectiveVector> = distinct
        .iter()
        .filter(|v| {
            !distinct
                .iter()
                .any(|w| compare_slices(w.values(), v.values(), sense) == Dominance::Dominates)
        })
        .copied()
        .collect();
    candidates
        .iter()
        .zip(&projected)
        .filter(|(_, p)| front.contains(p))
        .map(|(c, _)| c.clone())
        .collect()
}

/// Exact Pareto sets of a pseudo-Boolean problem by enumerating `{0,1}^n`.
pub fn brute_force_pseudoboolean(problem: &PseudoBooleanProblem) -> Result<ParetoCatalog<BitString>, OracleError> {
    let n = problem.n();
    if n > MAX_PB_BITS {
        return Err(OracleError::TooLarge {
            what: "bit string",
            n,
            max: MAX_PB_BITS,
        });
    }
    let candidates: Vec<(BitString, MultiPartyObjectives)> = (0..1u64 << n)
        .map(|i| {
            let x = BitString::from_index(n, i);
            let f = problem.eval(&x).expect("length matches");
            (x, f)
        })
        .collect();
    Ok(ParetoCatalog::from_candidates(
        candidates,
        problem.party_count(),
        problem.sense(),
    ))
}

/// Exact per-endpoint catalogs of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCatalog {
    pub endpoints: BTreeMap<usize, ParetoCatalog<Path>>,
}

impl PathCatalog {
    pub fn get(&self, endpoint: usize) -> Option<&ParetoCatalog<Path>> {
        self.endpoints.get(&endpoint)
    }

    /// Common objective vectors per endpoint.
    pub fn common_reference(&self) -> CommonReference {
        CommonReference::new(
            self.endpoints
                .iter()
                .map(|(&v, c)| {
                    let set: BTreeSet<MultiPartyObjectives> = c.common.iter().map(|(_, o)| o.clone()).collect();
                    (v, set.into_iter().collect())
                })
                .collect(),
        )
    }

    /// Plain-text listing of every endpoint's sets.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for (v, c) in &self.endpoints {
            let _ = writeln!(out, "endpoint {v}");
            for (m, set) in c.per_party.iter().enumerate() {
                let _ = writeln!(out, "  party {} pareto: {}", m + 1, list(set));
            }
            let _ = writeln!(out, "  joint pareto: {}", list(&c.joint));
            let _ = writeln!(out, "  common: {}", list(&c.common));
        }
        out
    }
}

fn list<S: std::fmt::Display>(set: &[(S, MultiPartyObjectives)]) -> String {
    set.iter()
        .map(|(s, o)| format!("{s} {o}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Plain-text report of a pseudo-Boolean catalog.
pub fn pseudoboolean_report(problem: &PseudoBooleanProblem, c: &ParetoCatalog<BitString>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "problem {problem}");
    for m in 0..c.per_party.len() {
        let front: Vec<String> = c.party_front(m).iter().map(ToString::to_string).collect();
        let _ = writeln!(
            out,
            "party {} pareto set: {} solutions, front {}",
            m + 1,
            c.per_party[m].len(),
            front.join(" ")
        );
    }
    let common: Vec<String> = c.common.iter().map(|(x, _)| x.to_string()).collect();
    let _ = writeln!(out, "common set ({}): {{{}}}", common.len(), common.join(", "));
    out
}

struct Label {
    path: Vec<usize>,
    cost: Vec<u64>,
    alive: bool,
}

/// Every simple path from the source whose projected cost is non-dominated
/// at its endpoint, ties included.
///
/// Pruning a label that another label at the same vertex strictly dominates
/// is safe although the dominating label may share vertices with later
/// extensions: joining it to an extension gives a walk no worse in every
/// objective, and removing the walk's cycles (all weights are at least 1)
/// leaves a simple path that is strictly better still.
fn pareto_simple_paths(
    g: &WeightedDigraph,
    project: &dyn Fn(&MultiPartyObjectives) -> Vec<u64>,
    dims: usize,
) -> Vec<Vec<Vec<usize>>> {
    let n = g.n();
    let mut labels: Vec<Label> = vec![Label {
        path: vec![SOURCE],
        cost: vec![0; dims],
        alive: true,
    }];
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    at[SOURCE].push(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        if !labels[id].alive {
            continue;
        }
        let u = *labels[id].path.last().expect("non-empty");
        for w in g.successors(u).collect::<Vec<_>>() {
            if labels[id].path.contains(&w) {
                continue;
            }
            let edge = g.edge(u, w).expect("successor edge");
            let step = project(&edge.weights);
            let cost: Vec<u64> = labels[id].cost.iter().zip(&step).map(|(a, b)| a + b).collect();
            let blocked = at[w].iter().any(|&j| {
                labels[j].alive && compare_slices(&labels[j].cost, &cost, Sense::Minimize) == Dominance::Dominates
            });
            if blocked {
                continue;
            }
            for &j in &at[w] {
                if labels[j].alive && compare_slices(&cost, &labels[j].cost, Sense::Minimize) == Dominance::Dominates {
                    labels[j].alive = false;
                }
            }
            let mut path = labels[id].path.clone();
            path.push(w);
            let new_id = labels.len();
            labels.push(Label {
                path,
                cost,
                alive: true,
            });
            at[w].push(new_id);
            queue.push_back(new_id);
        }
    }
    (0..=n)
        .map(|v| {
            at[v]
                .iter()
                .filter(|&&j| labels[j].alive)
                .map(|&j| labels[j].path.clone())
                .collect()
        })
        .collect()
}

/// Exact Pareto, joint and common sets of simple paths for every endpoint.
///
/// Walks with repeated vertices are never needed: removing a cycle lowers
/// every objective because all weights are at least 1.
pub fn exact_path_catalog(g: &WeightedDigraph) -> Result<PathCatalog, OracleError> {
    if g.n() > MAX_GRAPH_VERTICES {
        return Err(OracleError::TooLarge {
            what: "graph",
            n: g.n(),
            max: MAX_GRAPH_VERTICES,
        });
    }
    let dims = g.party_dims();
    let per_party: Vec<Vec<Vec<Vec<usize>>>> = (0..g.party_count())
        .map(|m| pareto_simple_paths(g, &|w| w.party(m).values().to_vec(), dims[m]))
        .collect();
    let joint = pareto_simple_paths(g, &|w| w.joint().values().to_vec(), dims.iter().sum());
    let entries = |paths: &[Vec<usize>]| -> Vec<(Path, MultiPartyObjectives)> {
        let mut out: Vec<(Path, MultiPartyObjectives)> = paths
            .iter()
            .map(|p| {
                let path = Path::new(p.clone()).expect("starts at source");
                let f = g.eval_path(&path).expect("built from edges");
                (path, f)
            })
            .collect();
        out.sort();
        out
    };
    let mut endpoints = BTreeMap::new();
    for v in g.endpoints() {
        let sets: Vec<_> = per_party.iter().map(|pp| entries(&pp[v])).collect();
        let common = objective_intersection(&sets);
        endpoints.insert(
            v,
            ParetoCatalog {
                per_party: sets,
                common,
                joint: entries(&joint[v]),
            },
        );
    }
    Ok(PathCatalog { endpoints })
}

/// Exact `ε` of `x` against a common set: the largest ratio
/// `f_mk(x) / f_mk(c)` over members `c`, parties and objectives, minus one,
/// and never below zero.
pub fn epsilon_of_solution(
    x: &MultiPartyObjectives,
    common: &[MultiPartyObjectives],
) -> Result<Ratio<u64>, OracleError> {
    let mut worst = Ratio::from_integer(1u64);
    if common.is_empty() {
        return Err(OracleError::EmptyCommonSet(0));
    }
    for c in common {
        for (fx, fc) in x.parties().iter().zip(c.parties()) {
            for (&a, &b) in fx.values().iter().zip(fc.values()) {
                let ratio = Ratio::new(a, b);
                if ratio > worst {
                    worst = ratio;
                }
            }
        }
    }
    Ok(worst - 1u64)
}

/// The same `ε` found by bisection on `x ⪰_{1+ε} c` for all members.
pub fn epsilon_by_bisection(x: &MultiPartyObjectives, common: &[MultiPartyObjectives], tolerance: f64) -> f64 {
    let holds = |eps: f64| {
        common.iter().all(|c| {
            x.parties().iter().zip(c.parties()).all(|(fx, fc)| {
                fx.values()
                    .iter()
                    .zip(fc.values())
                    .all(|(&a, &b)| a as f64 <= (1.0 + eps) * b as f64)
            })
        })
    };
    if holds(0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    while !holds(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Expected evaluations for the payoff optimizer to fix `zeros` zero bits in
/// a string of length `n`: `Σ_{i=1}^{zeros} n/i`.
pub fn payoff_runtime_predictor(n: u64, zeros: u64) -> BigRational {
    assert!(zeros <= n, "cannot have {zeros} zeros in {n} bits");
    let mut total = BigRational::zero();
    for i in 1..=zeros {
        total += BigRational::new(BigInt::from(n), BigInt::from(i));
    }
    total
}

/// Recovers a planted breadth-first tree: the all-ones edges must form an
/// arborescence from the source whose depths equal hop distances, and every
/// other edge must weigh at least 2 everywhere. Then each tree path strictly
/// dominates every other path to its endpoint for every party. Returns
/// `parent` indexed by vertex, with entries 0 and 1 set to 0.
pub fn planted_tree(g: &WeightedDigraph) -> Option<Vec<usize>> {
    let n = g.n();
    let mut parent = vec![0usize; n + 1];
    for e in g.edges() {
        let values = || e.weights.parties().iter().flat_map(|w| w.values().iter().copied());
        if values().all(|w| w == 1) {
            if e.to == SOURCE || parent[e.to] != 0 {
                return None;
            }
            parent[e.to] = e.from;
        } else if values().any(|w| w < 2) {
            return None;
        }
    }
    // Hop distances in the whole graph.
    let mut dist = vec![usize::MAX; n + 1];
    dist[SOURCE] = 0;
    let mut queue = VecDeque::from([SOURCE]);
    while let Some(u) = queue.pop_front() {
        for v in g.successors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    for v in g.endpoints() {
        let mut depth = 0;
        let mut x = v;
        while x != SOURCE {
            x = parent[x];
            depth += 1;
            if x == 0 || depth > n {
                return None;
            }
        }
        if depth != dist[v] {
            return None;
        }
    }
    Some(parent)
}

/// Reference common sets for metrics: the planted tree when one is
/// detected, else the exact catalog when the graph is small enough.
pub fn common_reference(g: &WeightedDigraph) -> Result<CommonReference, OracleError> {
    if let Some(parent) = planted_tree(g) {
        let per_endpoint = g
            .endpoints()
            .map(|v| {
                let mut path = vec![v];
                while *path.last().expect("non-empty") != SOURCE {
                    path.push(parent[*path.last().expect("non-empty")]);
                }
                path.reverse();
                let f = g
                    .eval_path(&Path::new(path).expect("source first"))
                    .expect("tree edges");
                (v, vec![f])
            })
            .collect();
        return Ok(CommonReference::new(per_endpoint));
    }
    if g.n() <= MAX_GRAPH_VERTICES {
        let reference = exact_path_catalog(g)?.common_reference();
        if let Some((v, _)) = reference.iter().find(|(_, s)| s.is_empty()) {
            return Err(OracleError::EmptyCommonSet(v));
        }
        return Ok(reference);
    }
    Err(OracleError::NoReference)
}

/// Catalog members as archive entries, e.g. to seed an archive.
pub fn as_entries(set: &[(Path, MultiPartyObjectives)]) -> Vec<SpEntry> {
    set.iter()
        .map(|(p, o)| SpEntry {
            path: p.clone(),
            objectives: o.clone(),
            birth: 0,
        })
        .collect()
}
