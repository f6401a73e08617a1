//! Bit-string problems where every party maximizes leading-ones/trailing-zeros
//! style counts, and the optimizers that solve them.

mod optimizers;
mod problem;

use thiserror::Error;

pub use optimizers::{
    drive, run_algorithm, run_empmo_payoff, run_empmo_random, run_empmo_simple, run_semo, EmpmoPayoff, EmpmoRandom,
    EmpmoSimple, Optimizer, PbAlgorithm, PopulationEntry, RunTrace, Semo, Start, StopRule,
};
pub use problem::{one_bit_mutation, BitString, ProblemKind, PseudoBooleanProblem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PseudoBooleanError {
    #[error("invalid bit character {0:?}")]
    InvalidBit(char),
    #[error("unknown problem {0:?}")]
    UnknownProblem(String),
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("problem size must be even and at least 4, got {0}")]
    InvalidLength(usize),
    #[error("expected a bit string of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("algorithm needs {expected} parties, problem has {got}")]
    PartyCount { expected: usize, got: usize },
    #[error("phi must lie strictly between 0 and 1, got {0}")]
    InvalidPhi(f64),
    #[error("this algorithm needs a phi value")]
    MissingPhi,
}
