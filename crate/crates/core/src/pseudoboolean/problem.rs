use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::PseudoBooleanError;
use crate::pareto::{MultiPartyObjectives, ObjectiveVector, Sense};

/// Fixed-length binary decision vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn zeros(n: usize) -> Self {
        BitString(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        BitString(vec![true; n])
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        BitString((0..n).map(|_| rng.random_bool(0.5)).collect())
    }

    /// The `index`-th string of length `n` in counting order, bit 0 being the
    /// most significant position. Used for exhaustive enumeration.
    pub fn from_index(n: usize, index: u64) -> Self {
        BitString((0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn with_flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.flip(i);
        out
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn hamming(&self, other: &BitString) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        BitString(bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = PseudoBooleanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(PseudoBooleanError::InvalidBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

/// Flips exactly one uniformly chosen position. Draws one index from `rng`.
pub fn one_bit_mutation<R: Rng + ?Sized>(x: &BitString, rng: &mut R) -> BitString {
    assert!(!x.is_empty(), "cannot mutate an empty bit string");
    x.with_flipped(rng.random_range(0..x.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// Party 1 of BPAOAZ alone: all ones, rear zeros.
    Aorz,
    /// Party 2 of BPAOAZ alone: all ones, front zeros.
    Aofz,
    /// Two parties, two objectives each.
    Bpaoaz,
    /// The four BPAOAZ objectives seen by a single party.
    Aoaz,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Aorz => "aorz",
            ProblemKind::Aofz => "aofz",
            ProblemKind::Bpaoaz => "bpaoaz",
            ProblemKind::Aoaz => "aoaz",
        }
    }

    /// Objectives per party.
    pub fn party_structure(self) -> &'static [usize] {
        match self {
            ProblemKind::Aorz | ProblemKind::Aofz => &[2],
            ProblemKind::Bpaoaz => &[2, 2],
            ProblemKind::Aoaz => &[4],
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = PseudoBooleanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aorz" => Ok(ProblemKind::Aorz),
            "aofz" => Ok(ProblemKind::Aofz),
            "bpaoaz" => Ok(ProblemKind::Bpaoaz),
            "aoaz" => Ok(ProblemKind::Aoaz),
            _ => Err(PseudoBooleanError::UnknownProblem(s.to_string())),
        }
    }
}

/// A member of the all-ones/all-zeros family at a fixed even length.
/// All objectives are maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PseudoBooleanProblem {
    kind: ProblemKind,
    n: usize,
}

/// The four raw sums every family member is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct HalfCounts {
    ones_front: u64,
    ones_rear: u64,
    half: u64,
}

impl HalfCounts {
    fn of(x: &BitString) -> Self {
        let half = x.len() / 2;
        let bits = x.bits();
        HalfCounts {
            ones_front: bits[..half].iter().filter(|&&b| b).count() as u64,
            ones_rear: bits[half..].iter().filter(|&&b| b).count() as u64,
            half: half as u64,
        }
    }

    // f11: ones in the rear half.
    fn f11(self) -> u64 {
        self.ones_rear
    }

    // f12: ones in the front half plus zeros in the rear half.
    fn f12(self) -> u64 {
        self.ones_front + (self.half - self.ones_rear)
    }

    // f21: zeros in the front half plus ones in the rear half.
    fn f21(self) -> u64 {
        (self.half - self.ones_front) + self.ones_rear
    }

    // f22: ones in the front half.
    fn f22(self) -> u64 {
        self.ones_front
    }
}

impl PseudoBooleanProblem {
    pub fn new(kind: ProblemKind, n: usize) -> Result<Self, PseudoBooleanError> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(PseudoBooleanError::InvalidLength(n));
        }
        Ok(PseudoBooleanProblem { kind, n })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sense(&self) -> Sense {
        Sense::Maximize
    }

    pub fn party_count(&self) -> usize {
        self.kind.party_structure().len()
    }

    pub fn eval(&self, x: &BitString) -> Result<MultiPartyObjectives, PseudoBooleanError> {
        if x.len() != self.n {
            return Err(PseudoBooleanError::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &BitString) -> MultiPartyObjectives {
        let c = HalfCounts::of(x);
        let aorz = || ObjectiveVector::new(vec![c.f11(), c.f12()]);
        let aofz = || ObjectiveVector::new(vec![c.f21(), c.f22()]);
        let parties = match self.kind {
            ProblemKind::Aorz => vec![aorz()],
            ProblemKind::Aofz => vec![aofz()],
            ProblemKind::Bpaoaz => vec![aorz(), aofz()],
            ProblemKind::Aoaz => vec![ObjectiveVector::new(vec![c.f11(), c.f12(), c.f21(), c.f22()])],
        };
        MultiPartyObjectives::new(parties)
    }

    /// Representative solutions of the target set every optimizer tries to
    /// cover: the whole Pareto front for single-party problems and the
    /// common Pareto set `{1^n}` for BPAOAZ. Objective vectors are distinct.
    pub fn target_solutions(&self) -> Vec<BitString> {
        let half = self.n / 2;
        // 1^{n/2} followed by j ones then zeros.
        let front_ones =
            |j: usize| -> BitString { (0..self.n).map(|i| i < half || i < half + j).collect::<Vec<_>>().into() };
        // i ones then zeros in the front half, followed by 1^{n/2}.
        let rear_ones = |i: usize| -> BitString { (0..self.n).map(|p| p >= half || p < i).collect::<Vec<_>>().into() };
        match self.kind {
            ProblemKind::Bpaoaz => vec![BitString::ones(self.n)],
            ProblemKind::Aorz => (0..=half).map(front_ones).collect(),
            ProblemKind::Aofz => (0..=half).map(rear_ones).collect(),
            ProblemKind::Aoaz => {
                let mut out: Vec<BitString> = (0..=half).map(front_ones).collect();
                // 1^n is already present as front_ones(half).
                out.extend((0..half).map(rear_ones));
                out
            }
        }
    }

    pub fn target_objectives(&self) -> Vec<MultiPartyObjectives> {
        self.target_solutions().iter().map(|x| self.eval_unchecked(x)).collect()
    }
}

impl fmt::Display for PseudoBooleanProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={})", self.kind, self.n)
    }
}
