use rand::Rng;

use super::boxes::{box_of, compare_box};
use super::graph::{Path, WeightedDigraph};
use crate::pareto::{compare_slices, Dominance, MultiPartyObjectives, Sense};

/// A path with its cached objectives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpEntry {
    pub path: Path,
    pub objectives: MultiPartyObjectives,
    /// Generation in which the entry was created.
    pub birth: u64,
}

impl SpEntry {
    /// Evaluates `path` on `g`.
    pub fn evaluate(g: &WeightedDigraph, path: Path, birth: u64) -> Result<Self, super::SpError> {
        let objectives = g.eval_path(&path)?;
        Ok(SpEntry {
            path,
            objectives,
            birth,
        })
    }

    pub fn endpoint(&self) -> usize {
        self.path.endpoint()
    }
}

/// Which objectives an archive compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    /// One party's vector.
    Party(usize),
    /// All parties concatenated.
    Joint,
}

impl View {
    fn extract(self, objectives: &MultiPartyObjectives) -> Vec<u64> {
        match self {
            View::Party(m) => objectives.party(m).values().to_vec(),
            View::Joint => objectives.joint().values().to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
struct Slot {
    entry: SpEntry,
    values: Vec<Vec<u64>>,
    boxes: Vec<Vec<u32>>,
}

/// Box-index archive rooted at the bare source path.
///
/// An offspring enters when, for at least one view, no incumbent with the
/// same endpoint strictly dominates it in objectives or in box index. On
/// entry it evicts every incumbent with the same endpoint whose box it weakly
/// dominates in every view. With a single view this is the per-party rule of
/// the simple optimizer; with one view per party it is the consensus rule.
///
/// The root `(1)` is a mutation parent only: it is never compared and never
/// evicted. Offspring that end back at the source are refused.
#[derive(Debug, Clone)]
pub struct BoxArchive {
    r: f64,
    views: Vec<View>,
    root: SpEntry,
    slots: Vec<Slot>,
}

impl BoxArchive {
    pub fn new(g: &WeightedDigraph, views: Vec<View>, r: f64) -> Self {
        assert!(!views.is_empty() && r > 1.0);
        BoxArchive {
            r,
            views,
            root: SpEntry {
                path: Path::source(),
                objectives: g.zero_objectives(),
                birth: 0,
            },
            slots: Vec::new(),
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn views(&self) -> &[View] {
        &self.views
    }

    /// Population size including the root.
    pub fn size(&self) -> usize {
        self.slots.len() + 1
    }

    /// Members other than the root, oldest first.
    pub fn members(&self) -> impl Iterator<Item = &SpEntry> {
        self.slots.iter().map(|s| &s.entry)
    }

    pub fn member_vec(&self) -> Vec<SpEntry> {
        self.members().cloned().collect()
    }

    /// Uniformly chosen population member (root included).
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> &SpEntry {
        match rng.random_range(0..self.size()) {
            0 => &self.root,
            i => &self.slots[i - 1].entry,
        }
    }

    /// Inserts members without the acceptance test, e.g. to replay a fixed
    /// archive state.
    pub fn seed_members(&mut self, entries: impl IntoIterator<Item = SpEntry>) {
        for entry in entries {
            let slot = self.slot(entry);
            self.slots.push(slot);
        }
    }

    fn slot(&self, entry: SpEntry) -> Slot {
        let values: Vec<Vec<u64>> = self.views.iter().map(|v| v.extract(&entry.objectives)).collect();
        let boxes = values.iter().map(|v| box_of(v, self.r)).collect();
        Slot { entry, values, boxes }
    }

    /// Offers an evaluated offspring; returns whether it entered.
    pub fn offer(&mut self, entry: SpEntry) -> bool {
        if entry.path.is_empty() || entry.endpoint() == self.root.endpoint() {
            return false;
        }
        let endpoint = entry.endpoint();
        let cand = self.slot(entry);
        let peers = || self.slots.iter().filter(|s| s.entry.endpoint() == endpoint);
        let accepted = (0..self.views.len()).any(|c| {
            !peers().any(|z| {
                compare_slices(&z.values[c], &cand.values[c], Sense::Minimize) == Dominance::Dominates
                    || compare_box(&z.boxes[c], &cand.boxes[c]) == Dominance::Dominates
            })
        });
        if !accepted {
            return false;
        }
        self.slots.retain(|z| {
            z.entry.endpoint() != endpoint
                || !(0..z.boxes.len()).all(|c| compare_box(&cand.boxes[c], &z.boxes[c]).is_weak())
        });
        self.slots.push(cand);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::fixture_graph;

    fn entry(g: &WeightedDigraph, v: &[usize]) -> SpEntry {
        SpEntry::evaluate(g, Path::new(v.to_vec()).unwrap(), 1).unwrap()
    }

    #[test]
    fn root_is_never_displaced() {
        let g = fixture_graph();
        let mut a = BoxArchive::new(&g, vec![View::Party(0)], 2.0);
        assert!(!a.offer(entry(&g, &[1])));
        assert!(a.offer(entry(&g, &[1, 2])));
        assert_eq!(a.size(), 2);
    }

    #[test]
    fn same_box_replaces_and_dominated_is_refused() {
        let g = fixture_graph();
        // Party 1: (1,3,5) = (4,5) and (1,3,4,5) = (7,4) share box (2,2) at r = 2.
        let mut a = BoxArchive::new(&g, vec![View::Party(0)], 2.0);
        assert!(a.offer(entry(&g, &[1, 3, 5])));
        assert!(a.offer(entry(&g, &[1, 3, 4, 5])));
        let kept: Vec<_> = a.members().map(|e| e.path.to_string()).collect();
        assert_eq!(kept, vec!["(1,3,4,5)"]);
        // (1,2,5) = (10,4) is dominated by (7,4).
        assert!(!a.offer(entry(&g, &[1, 2, 5])));
    }

    #[test]
    fn different_endpoints_never_interact() {
        let g = fixture_graph();
        let mut a = BoxArchive::new(&g, vec![View::Party(0), View::Party(1)], 1.1);
        for v in [&[1, 2][..], &[1, 3], &[1, 3, 4], &[1, 3, 4, 5]] {
            assert!(a.offer(entry(&g, v)));
        }
        assert_eq!(a.size(), 5);
    }

    #[test]
    fn consensus_rule_keeps_a_party_optimum() {
        let g = fixture_graph();
        let mut a = BoxArchive::new(&g, vec![View::Party(0), View::Party(1)], 1.05);
        assert!(a.offer(entry(&g, &[1, 3, 4, 5])));
        // (4,5)/(7,8): party 1 is not dominated by (7,4), so it enters.
        assert!(a.offer(entry(&g, &[1, 3, 5])));
        // (10,4)/(8,5): dominated for party 1, not for party 2.
        assert!(a.offer(entry(&g, &[1, 2, 5])));
        // (5,8)/(8,8): dominated for both.
        assert!(!a.offer(entry(&g, &[1, 2, 3, 5])));
        assert_eq!(a.size(), 4);
    }
}
