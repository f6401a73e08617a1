//! Objective vectors, dominance relations and the multi-party payoff.
//!
//! Every in-scope problem produces exact integer objectives, so all
//! comparisons here are exact.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("objective vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("objective sets have different party counts ({left} vs {right})")]
    PartyMismatch { left: usize, right: usize },
}

/// Whether larger or smaller objective values are better. Declared once per
/// problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// True if `a` is strictly better than `b` in a single coordinate.
    #[inline]
    pub fn better(self, a: u64, b: u64) -> bool {
        match self {
            Sense::Minimize => a < b,
            Sense::Maximize => a > b,
        }
    }
}

/// Outcome of comparing `a` against `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dominance {
    Dominates,
    DominatedBy,
    Equal,
    Incomparable,
}

impl Dominance {
    pub fn mirror(self) -> Self {
        match self {
            Dominance::Dominates => Dominance::DominatedBy,
            Dominance::DominatedBy => Dominance::Dominates,
            other => other,
        }
    }

    /// `a` weakly dominates `b`.
    pub fn is_weak(self) -> bool {
        matches!(self, Dominance::Dominates | Dominance::Equal)
    }
}

/// One party's objective scores.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectiveVector(Vec<u64>);

impl ObjectiveVector {
    pub fn new(values: Vec<u64>) -> Self {
        assert!(!values.is_empty(), "objective vector must hold at least one value");
        ObjectiveVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![0; len])
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [u64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<u64>> for ObjectiveVector {
    fn from(values: Vec<u64>) -> Self {
        ObjectiveVector::new(values)
    }
}

impl<const N: usize> From<[u64; N]> for ObjectiveVector {
    fn from(values: [u64; N]) -> Self {
        ObjectiveVector::new(values.to_vec())
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Objective vectors of all parties for one solution, party 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiPartyObjectives(Vec<ObjectiveVector>);

impl MultiPartyObjectives {
    pub fn new(per_party: Vec<ObjectiveVector>) -> Self {
        assert!(!per_party.is_empty(), "at least one party is required");
        MultiPartyObjectives(per_party)
    }

    pub fn party(&self, m: usize) -> &ObjectiveVector {
        &self.0[m]
    }

    pub fn party_mut(&mut self, m: usize) -> &mut ObjectiveVector {
        &mut self.0[m]
    }

    pub fn parties(&self) -> &[ObjectiveVector] {
        &self.0
    }

    pub fn party_count(&self) -> usize {
        self.0.len()
    }

    /// All parties' objectives concatenated into one vector, as a
    /// conventional multi-objective optimizer would see them.
    pub fn joint(&self) -> ObjectiveVector {
        ObjectiveVector::new(self.0.iter().flat_map(|v| v.values().iter().copied()).collect())
    }
}

impl fmt::Display for MultiPartyObjectives {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "/")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Compares two raw slices of equal length. Callers guarantee the lengths.
#[inline]
pub(crate) fn compare_slices(a: &[u64], b: &[u64], sense: Sense) -> Dominance {
    debug_assert_eq!(a.len(), b.len());
    let mut a_better = false;
    let mut b_better = false;
    for (&x, &y) in a.iter().zip(b) {
        if sense.better(x, y) {
            a_better = true;
        } else if sense.better(y, x) {
            b_better = true;
        }
        if a_better && b_better {
            return Dominance::Incomparable;
        }
    }
    match (a_better, b_better) {
        (false, false) => Dominance::Equal,
        (true, false) => Dominance::Dominates,
        (false, true) => Dominance::DominatedBy,
        (true, true) => Dominance::Incomparable,
    }
}

pub fn dominance_compare(a: &ObjectiveVector, b: &ObjectiveVector, sense: Sense) -> Result<Dominance, StructureError> {
    check_lengths(a, b)?;
    Ok(compare_slices(a.values(), b.values(), sense))
}

/// Sign-valued improvement of one party when moving from `from` to `to`:
/// +1 if nothing gets worse and something gets better, -1 for the mirror
/// case, 0 for mixed changes and for no change at all.
pub fn payoff_component(from: &ObjectiveVector, to: &ObjectiveVector, sense: Sense) -> Result<i8, StructureError> {
    check_lengths(from, to)?;
    Ok(component_of(compare_slices(to.values(), from.values(), sense)))
}

#[inline]
fn component_of(relation: Dominance) -> i8 {
    match relation {
        Dominance::Dominates => 1,
        Dominance::DominatedBy => -1,
        Dominance::Equal | Dominance::Incomparable => 0,
    }
}

/// Per-party payoff components and their sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffValue {
    pub per_party: Vec<i8>,
    pub total: i32,
}

impl PayoffValue {
    fn from_components(per_party: Vec<i8>) -> Self {
        let total = per_party.iter().map(|&c| i32::from(c)).sum();
        PayoffValue { per_party, total }
    }
}

pub fn multiparty_payoff(
    from: &MultiPartyObjectives,
    to: &MultiPartyObjectives,
    sense: Sense,
) -> Result<PayoffValue, StructureError> {
    if from.party_count() != to.party_count() {
        return Err(StructureError::PartyMismatch {
            left: from.party_count(),
            right: to.party_count(),
        });
    }
    let per_party = from
        .parties()
        .iter()
        .zip(to.parties())
        .map(|(a, b)| payoff_component(a, b, sense))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PayoffValue::from_components(per_party))
}

fn check_lengths(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<(), StructureError> {
    if a.len() != b.len() {
        return Err(StructureError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ov(v: &[u64]) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec())
    }

    #[test]
    fn worked_example_relations() {
        // Party-wise comparison of two BPAOAZ points at n = 100.
        let party1 = dominance_compare(&ov(&[36, 44]), &ov(&[35, 40]), Sense::Maximize).unwrap();
        let party2 = dominance_compare(&ov(&[56, 30]), &ov(&[60, 25]), Sense::Maximize).unwrap();
        assert_eq!(party1, Dominance::Dominates);
        assert_eq!(party2, Dominance::Incomparable);

        // Concatenated, the same pair is mutually non-dominating.
        let joint = dominance_compare(&ov(&[36, 44, 56, 30]), &ov(&[35, 40, 60, 25]), Sense::Maximize).unwrap();
        assert_eq!(joint, Dominance::Incomparable);
    }

    #[test]
    fn identical_vectors_are_equal_in_either_sense() {
        for sense in [Sense::Minimize, Sense::Maximize] {
            assert_eq!(
                dominance_compare(&ov(&[4, 4]), &ov(&[4, 4]), sense).unwrap(),
                Dominance::Equal
            );
        }
    }

    #[test]
    fn minimize_flips_direction() {
        let r = dominance_compare(&ov(&[1, 2]), &ov(&[2, 2]), Sense::Minimize).unwrap();
        assert_eq!(r, Dominance::Dominates);
        let r = dominance_compare(&ov(&[1, 2]), &ov(&[2, 2]), Sense::Maximize).unwrap();
        assert_eq!(r, Dominance::DominatedBy);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let err = dominance_compare(&ov(&[1]), &ov(&[1, 2]), Sense::Minimize).unwrap_err();
        assert_eq!(err, StructureError::LengthMismatch { left: 1, right: 2 });
        assert!(payoff_component(&ov(&[1]), &ov(&[1, 2]), Sense::Minimize).is_err());
    }

    #[test]
    fn payoff_components() {
        assert_eq!(
            payoff_component(&ov(&[0, 4]), &ov(&[0, 5]), Sense::Maximize).unwrap(),
            1
        );
        assert_eq!(
            payoff_component(&ov(&[4, 0]), &ov(&[3, 1]), Sense::Maximize).unwrap(),
            0
        );
        assert_eq!(
            payoff_component(&ov(&[2, 2]), &ov(&[2, 2]), Sense::Maximize).unwrap(),
            0
        );
        assert_eq!(
            payoff_component(&ov(&[2, 2]), &ov(&[1, 2]), Sense::Maximize).unwrap(),
            -1
        );
    }

    #[test]
    fn multiparty_payoff_sums_components() {
        let a = MultiPartyObjectives::new(vec![ov(&[0, 4]), ov(&[4, 0])]);
        let b = MultiPartyObjectives::new(vec![ov(&[0, 5]), ov(&[3, 1])]);
        let p = multiparty_payoff(&a, &b, Sense::Maximize).unwrap();
        assert_eq!(p.per_party, vec![1, 0]);
        assert_eq!(p.total, 1);
        assert_eq!(multiparty_payoff(&a, &a, Sense::Maximize).unwrap().total, 0);

        let single = MultiPartyObjectives::new(vec![ov(&[0, 4])]);
        assert_eq!(
            multiparty_payoff(&a, &single, Sense::Maximize).unwrap_err(),
            StructureError::PartyMismatch { left: 2, right: 1 }
        );
    }

    fn vec_pair() -> impl Strategy<Value = (Vec<u64>, Vec<u64>, Vec<u64>)> {
        (1usize..=6).prop_flat_map(|len| {
            (
                prop::collection::vec(0u64..5, len),
                prop::collection::vec(0u64..5, len),
                prop::collection::vec(0u64..5, len),
            )
        })
    }

    fn sense() -> impl Strategy<Value = Sense> {
        prop_oneof![Just(Sense::Minimize), Just(Sense::Maximize)]
    }

    proptest! {
        #[test]
        fn dominance_is_a_strict_partial_order((a, b, c) in vec_pair(), s in sense()) {
            let (a, b, c) = (ov(&a), ov(&b), ov(&c));
            prop_assert_ne!(dominance_compare(&a, &a, s).unwrap(), Dominance::Dominates);
            let ab = dominance_compare(&a, &b, s).unwrap();
            let ba = dominance_compare(&b, &a, s).unwrap();
            prop_assert_eq!(ab, ba.mirror());
            if ab == Dominance::Dominates && dominance_compare(&b, &c, s).unwrap() == Dominance::Dominates {
                prop_assert_eq!(dominance_compare(&a, &c, s).unwrap(), Dominance::Dominates);
            }
        }

        #[test]
        fn payoff_component_is_antisymmetric((a, b, _) in vec_pair(), s in sense()) {
            let (a, b) = (ov(&a), ov(&b));
            prop_assert_eq!(
                payoff_component(&a, &b, s).unwrap(),
                -payoff_component(&b, &a, s).unwrap()
            );
        }
    }
}
