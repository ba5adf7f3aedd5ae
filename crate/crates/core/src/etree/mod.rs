//! The tree forcing built from fast-growing branching: growth functions,
//! level norms, and finite truncations of its conditions.

mod condition;
mod profile;

use num_bigint::BigUint;
use thiserror::Error;

use crate::Rational;

pub use condition::{q_t_eps_membership, show_path, ECondition, LebReport, NodePath, SuccessorSet};
pub use profile::{
    lemma_v50_check, norm_at_least, norm_compare, norm_value, paper_constants, CardinalityReport, CustomProfile,
    GrowthProfile, Level, LevelSpec, NormValue, PaperConstants, EXHAUSTIVE_LIMIT,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EtreeError {
    #[error("height {h} is not representable: {detail}")]
    Unrepresentable { h: usize, detail: String },
    #[error("profile has no level {0}")]
    LevelUndefined(usize),
    #[error("level {h}: {reason}")]
    BadLevel { h: usize, reason: String },
    #[error("count {n} exceeds the branching {m}")]
    CountOutOfRange { n: BigUint, m: BigUint },
    #[error("threshold {0} must be positive")]
    ThresholdNegative(Rational),
    #[error("threshold {0} has a numerator or denominator beyond 2^32")]
    ExponentTooLarge(Rational),
    #[error("malformed condition: {0}")]
    Malformed(String),
    #[error("not a condition")]
    NotACondition,
}
