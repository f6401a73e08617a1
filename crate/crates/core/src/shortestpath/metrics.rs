//! Approximation-degree metrics against known common Pareto sets.

use std::collections::BTreeMap;

use super::archive::SpEntry;
use crate::pareto::MultiPartyObjectives;

/// Common Pareto objective vectors per endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommonReference {
    per_endpoint: BTreeMap<usize, Vec<MultiPartyObjectives>>,
}

impl CommonReference {
    pub fn new(per_endpoint: BTreeMap<usize, Vec<MultiPartyObjectives>>) -> Self {
        CommonReference { per_endpoint }
    }

    pub fn get(&self, endpoint: usize) -> Option<&[MultiPartyObjectives]> {
        self.per_endpoint.get(&endpoint).map(Vec::as_slice)
    }

    pub fn endpoints(&self) -> impl Iterator<Item = usize> + '_ {
        self.per_endpoint.keys().copied()
    }

    pub fn endpoint_count(&self) -> usize {
        self.per_endpoint.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[MultiPartyObjectives])> {
        self.per_endpoint.iter().map(|(&v, s)| (v, s.as_slice()))
    }
}

/// Smallest `ε ≥ 0` such that `x` weakly `(1+ε)`-dominates every member of
/// `common` for every party: the largest ratio `f(x)/f(c)` minus one.
pub fn epsilon_against(x: &MultiPartyObjectives, common: &[MultiPartyObjectives]) -> f64 {
    let mut worst = 1.0f64;
    for c in common {
        for (fx, fc) in x.parties().iter().zip(c.parties()) {
            for (&a, &b) in fx.values().iter().zip(fc.values()) {
                worst = worst.max(a as f64 / b as f64);
            }
        }
    }
    worst - 1.0
}

/// One row of a metric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub generation: u64,
    pub evaluations: u64,
    /// Largest ε over members; infinite when no member has a reference.
    pub max_eps: f64,
    pub mean_eps_members: f64,
    /// Mean over covered endpoints of the smallest member ε.
    pub mean_eps_endpoints: f64,
    pub covered_endpoints: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Snapshot {
    pub max_eps: f64,
    pub mean_eps_members: f64,
    pub mean_eps_endpoints: f64,
    pub covered_endpoints: usize,
    /// Every reference endpoint has a member with ε = 0.
    pub all_exact: bool,
}

pub(crate) fn snapshot<'a>(members: impl IntoIterator<Item = &'a SpEntry>, reference: &CommonReference) -> Snapshot {
    let mut best: BTreeMap<usize, f64> = BTreeMap::new();
    let mut max_eps = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut count = 0usize;
    for e in members {
        let Some(common) = reference.get(e.endpoint()) else {
            continue;
        };
        let eps = epsilon_against(&e.objectives, common);
        max_eps = max_eps.max(eps);
        sum += eps;
        count += 1;
        let slot = best.entry(e.endpoint()).or_insert(f64::INFINITY);
        *slot = slot.min(eps);
    }
    if count == 0 {
        return Snapshot {
            max_eps: f64::INFINITY,
            mean_eps_members: f64::INFINITY,
            mean_eps_endpoints: f64::INFINITY,
            covered_endpoints: 0,
            all_exact: reference.endpoint_count() == 0,
        };
    }
    let covered = best.len();
    Snapshot {
        max_eps,
        mean_eps_members: sum / count as f64,
        mean_eps_endpoints: best.values().sum::<f64>() / covered as f64,
        covered_endpoints: covered,
        all_exact: covered == reference.endpoint_count() && best.values().all(|&e| e == 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shortestpath::Path;

    fn objectives(p1: [u64; 2], p2: [u64; 2]) -> MultiPartyObjectives {
        MultiPartyObjectives::new(vec![p1.into(), p2.into()])
    }

    #[test]
    fn epsilon_of_worked_rows() {
        let common = [objectives([7, 4], [5, 7])];
        assert_eq!(epsilon_against(&objectives([7, 4], [5, 7]), &common), 0.0);
        assert!((epsilon_against(&objectives([10, 4], [8, 5]), &common) - 0.6).abs() < 1e-12);
        assert!((epsilon_against(&objectives([4, 5], [7, 8]), &common) - 0.4).abs() < 1e-12);
        // Better than the reference in every objective.
        assert_eq!(epsilon_against(&objectives([1, 1], [1, 1]), &common), 0.0);
    }

    #[test]
    fn snapshot_averages() {
        let reference = CommonReference::new(BTreeMap::from([
            (2, vec![objectives([1, 2], [2, 4])]),
            (5, vec![objectives([7, 4], [5, 7])]),
        ]));
        let at = |v: Vec<usize>, o| SpEntry {
            path: Path::new(v).unwrap(),
            objectives: o,
            birth: 0,
        };
        let members = [
            at(vec![1, 2], objectives([1, 2], [2, 4])),
            at(vec![1, 3, 5], objectives([4, 5], [7, 8])),
            at(vec![1, 2, 5], objectives([10, 4], [8, 5])),
        ];
        let s = snapshot(&members, &reference);
        assert!((s.max_eps - 0.6).abs() < 1e-12);
        assert!((s.mean_eps_members - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.mean_eps_endpoints - 0.2).abs() < 1e-12);
        assert_eq!(s.covered_endpoints, 2);
        assert!(!s.all_exact);
        let empty = snapshot(&[], &reference);
        assert_eq!(empty.max_eps, f64::INFINITY);
    }
}
