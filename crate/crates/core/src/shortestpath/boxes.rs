//! ε-dominance between paths and the logarithmic box grid.

use super::archive::SpEntry;
use super::SpError;
use crate::pareto::{compare_slices, Dominance, MultiPartyObjectives, ObjectiveVector, Sense};

/// Approximation parameters shared by the path optimizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxParams {
    pub eps1: f64,
    pub eps2: f64,
    /// Largest slack party 2 will relax to during consensus.
    pub eps2_max: f64,
    /// Spacing of the relaxation levels tried between `eps2` and `eps2_max`.
    pub relax_step: f64,
    /// Box base; derived from the slacks and the graph size when absent.
    pub r: Option<f64>,
}

impl ApproxParams {
    pub const DEFAULT_RELAX_STEP: f64 = 0.5;

    pub fn new(eps1: f64, eps2: f64, eps2_max: f64) -> Result<Self, SpError> {
        let p = ApproxParams {
            eps1,
            eps2,
            eps2_max,
            relax_step: Self::DEFAULT_RELAX_STEP,
            r: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Both parties use `eps`; party 2 may relax up to `eps2_max`.
    pub fn uniform(eps: f64, eps2_max: f64) -> Result<Self, SpError> {
        Self::new(eps, eps, eps2_max)
    }

    pub fn with_r(mut self, r: f64) -> Result<Self, SpError> {
        self.r = Some(r);
        self.validate()?;
        Ok(self)
    }

    pub fn with_relax_step(mut self, step: f64) -> Result<Self, SpError> {
        self.relax_step = step;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SpError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.eps1) || !positive(self.eps2) {
            return Err(SpError::InvalidParams(format!(
                "slacks must be positive, got eps1={} eps2={}",
                self.eps1, self.eps2
            )));
        }
        if !(self.eps2_max.is_finite() && self.eps2_max >= self.eps2) {
            return Err(SpError::InvalidParams(format!(
                "eps2_max={} must be at least eps2={}",
                self.eps2_max, self.eps2
            )));
        }
        if !positive(self.relax_step) {
            return Err(SpError::InvalidParams(format!(
                "relax step must be positive, got {}",
                self.relax_step
            )));
        }
        if let Some(r) = self.r {
            if !(r.is_finite() && r > 1.0) {
                return Err(SpError::InvalidParams(format!("box base must exceed 1, got {r}")));
            }
        }
        Ok(())
    }

    /// The smaller of the two slacks.
    pub fn eps(&self) -> f64 {
        self.eps1.min(self.eps2)
    }

    /// `(1+ε)^(1/(n-1))` with `ε = min(ε_1, ε_2)`, unless `r` was set.
    pub fn box_base(&self, n: usize) -> f64 {
        self.r
            .unwrap_or_else(|| (1.0 + self.eps()).powf(1.0 / (n.max(2) - 1) as f64))
    }

    /// Relaxation levels `eps2, eps2 + step, ...`, always ending at
    /// `eps2_max`.
    pub fn relaxation_levels(&self) -> Vec<f64> {
        let mut levels = Vec::new();
        let mut i = 0u32;
        loop {
            let level = self.eps2 + f64::from(i) * self.relax_step;
            if level >= self.eps2_max - 1e-12 {
                break;
            }
            levels.push(level);
            i += 1;
        }
        levels.push(self.eps2_max);
        levels
    }
}

/// `⌊log_r f⌋` for `f ≥ 1`, corrected so that `r^k ≤ f < r^(k+1)` holds in
/// floating point.
pub fn floor_log(f: u64, r: f64) -> u32 {
    debug_assert!(f >= 1 && r > 1.0);
    let x = f as f64;
    let mut k = (x.ln() / r.ln()).floor().max(0.0) as i32;
    while k > 0 && r.powi(k) > x {
        k -= 1;
    }
    while r.powi(k + 1) <= x {
        k += 1;
    }
    k as u32
}

/// Box index of one objective vector.
pub fn box_of(values: &[u64], r: f64) -> Vec<u32> {
    values.iter().map(|&f| floor_log(f, r)).collect()
}

/// Per-party box indices of a path's objectives at its endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxIndex {
    pub endpoint: usize,
    pub per_party: Vec<Vec<u32>>,
}

impl BoxIndex {
    /// Weak/strict box dominance for party `m`; different endpoints are
    /// incomparable.
    pub fn compare(&self, other: &BoxIndex, m: usize) -> Dominance {
        if self.endpoint != other.endpoint {
            return Dominance::Incomparable;
        }
        compare_box(&self.per_party[m], &other.per_party[m])
    }
}

/// Box index of `objectives` at base `r`.
pub fn box_index(objectives: &MultiPartyObjectives, r: f64, endpoint: usize) -> Result<BoxIndex, SpError> {
    if !(r.is_finite() && r > 1.0) {
        return Err(SpError::InvalidParams(format!("box base must exceed 1, got {r}")));
    }
    if objectives.parties().iter().flat_map(|v| v.values()).any(|&f| f < 1) {
        return Err(SpError::BoxDomain);
    }
    Ok(BoxIndex {
        endpoint,
        per_party: objectives.parties().iter().map(|v| box_of(v.values(), r)).collect(),
    })
}

/// Smaller box indices are better.
#[inline]
pub(crate) fn compare_box(a: &[u32], b: &[u32]) -> Dominance {
    let mut a_better = false;
    let mut b_better = false;
    for (&x, &y) in a.iter().zip(b) {
        a_better |= x < y;
        b_better |= y < x;
    }
    match (a_better, b_better) {
        (false, false) => Dominance::Equal,
        (true, false) => Dominance::Dominates,
        (false, true) => Dominance::DominatedBy,
        (true, true) => Dominance::Incomparable,
    }
}

fn within_slack(a: &ObjectiveVector, b: &ObjectiveVector, eps: f64) -> bool {
    a.values()
        .iter()
        .zip(b.values())
        .all(|(&x, &y)| x as f64 <= (1.0 + eps) * y as f64)
}

/// Whether `a` weakly `(1+eps)`-dominates `b` for party `m`: same endpoint
/// and every objective of `a` at most `(1+eps)` times that of `b`.
pub fn epsilon_dominates(a: &SpEntry, b: &SpEntry, eps: f64, m: usize) -> bool {
    a.path.endpoint() == b.path.endpoint() && within_slack(a.objectives.party(m), b.objectives.party(m), eps)
}

/// Strict form: weak `(1+eps)`-dominance with differing objectives.
pub fn epsilon_dominates_strictly(a: &SpEntry, b: &SpEntry, eps: f64, m: usize) -> bool {
    epsilon_dominates(a, b, eps, m) && a.objectives.party(m) != b.objectives.party(m)
}

/// Plain dominance of party `m`'s objectives at equal endpoints.
pub fn path_dominance(a: &SpEntry, b: &SpEntry, m: usize) -> Dominance {
    if a.path.endpoint() != b.path.endpoint() {
        return Dominance::Incomparable;
    }
    compare_slices(
        a.objectives.party(m).values(),
        b.objectives.party(m).values(),
        Sense::Minimize,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shortestpath::Path;
    use proptest::prelude::*;

    fn entry(vertices: Vec<usize>, p1: [u64; 2], p2: [u64; 2]) -> SpEntry {
        SpEntry {
            path: Path::new(vertices).unwrap(),
            objectives: MultiPartyObjectives::new(vec![p1.into(), p2.into()]),
            birth: 0,
        }
    }

    #[test]
    fn box_index_worked_values() {
        assert_eq!(box_of(&[8, 5], 2.0), vec![3, 2]);
        assert_eq!(box_of(&[7, 8], 3.0), vec![1, 1]);
        assert_eq!(box_of(&[1, 1], 1.0001), vec![0, 0]);
        assert_eq!(box_of(&[9, 27, 26], 3.0), vec![2, 3, 2]);
    }

    #[test]
    fn box_index_rejects_zero_objectives() {
        let zero = MultiPartyObjectives::new(vec![[0u64, 1].into()]);
        assert_eq!(box_index(&zero, 2.0, 2), Err(SpError::BoxDomain));
        let one = MultiPartyObjectives::new(vec![[1u64, 1].into()]);
        assert!(box_index(&one, 1.0, 2).is_err());
    }

    #[test]
    fn epsilon_dominance_examples() {
        let a = entry(vec![1, 3, 5], [7, 8], [7, 8]);
        let b = entry(vec![1, 2, 5], [4, 5], [4, 5]);
        assert!(epsilon_dominates(&a, &b, 1.0, 0));
        assert!(epsilon_dominates(&a, &a, 1e-9, 0));
        assert!(!epsilon_dominates_strictly(&a, &a, 1.0, 0));
        let elsewhere = entry(vec![1, 3], [7, 8], [7, 8]);
        assert!(!epsilon_dominates(&a, &elsewhere, 1.0, 0));
    }

    #[test]
    fn relaxation_levels_end_at_the_ceiling() {
        let p = ApproxParams::uniform(1.0, 2.0).unwrap();
        assert_eq!(p.relaxation_levels(), vec![1.0, 1.5, 2.0]);
        let flat = ApproxParams::uniform(1.0, 1.0).unwrap();
        assert_eq!(flat.relaxation_levels(), vec![1.0]);
        let odd = ApproxParams::uniform(1.0, 1.7).unwrap();
        assert_eq!(odd.relaxation_levels(), vec![1.0, 1.5, 1.7]);
    }

    #[test]
    fn params_validation() {
        assert!(ApproxParams::new(0.0, 1.0, 1.0).is_err());
        assert!(ApproxParams::new(1.0, 1.0, 0.5).is_err());
        assert!(ApproxParams::uniform(1.0, 2.0).unwrap().with_r(1.0).is_err());
        let p = ApproxParams::new(1.0, 3.0, 3.0).unwrap();
        assert!((p.box_base(5) - 2f64.powf(0.25)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn floor_log_brackets(f in 1u64..1_000_000, r in 1.001f64..10.0) {
            let k = floor_log(f, r) as i32;
            prop_assert!(r.powi(k) <= f as f64);
            prop_assert!(r.powi(k + 1) > f as f64);
        }

        #[test]
        fn boxes_are_monotone(a in prop::collection::vec(1u64..10_000, 3), d in prop::collection::vec(0u64..10_000, 3), r in 1.01f64..4.0) {
            let b: Vec<u64> = a.iter().zip(&d).map(|(x, y)| x + y).collect();
            let rel = compare_box(&box_of(&a, r), &box_of(&b, r));
            prop_assert!(rel.is_weak());
        }

        #[test]
        fn tiny_slack_is_weak_dominance(a in prop::collection::vec(1u64..50, 2), b in prop::collection::vec(1u64..50, 2)) {
            let x = entry(vec![1, 2], [a[0], a[1]], [1, 1]);
            let y = entry(vec![1, 2], [b[0], b[1]], [1, 1]);
            let weak = path_dominance(&x, &y, 0).is_weak();
            prop_assert_eq!(epsilon_dominates(&x, &y, 1e-9, 0), weak);
        }
    }
}
