//! Exact intersection numbers of finite forcing notions.
//!
//! The intersection number of a set `Q` of conditions is the infimum, over
//! finite sequences from `Q`, of the fraction of the sequence that shares a
//! common lower bound. On finite structures it equals the value of a 0/1
//! matrix game, which this crate solves with an exact rational simplex. The
//! result comes with both witnesses: an optimal measure and an optimal
//! sequence.
//!
//! Modules:
//! - [`order`]: finite preorders, compatibility, separative order, linkedness.
//! - [`algebra`]: fields of sets, regular-open completions, embeddings.
//! - [`measure`]: finitely additive measures, integration, density property.
//! - [`intersection`]: `i*`, exact intersection numbers and certificates.
//! - [`linkedness`]: intersection-linked families and derived covers.
//! - [`etree`]: growth functions, norms and loss for the tree forcing.
//! - [`random`] and [`verify`]: seeded instance generators and check suites.

pub mod algebra;
pub mod etree;
pub mod intersection;
pub mod linkedness;
pub mod measure;
pub mod order;
pub mod random;
pub mod set;
pub mod verify;

pub use num_bigint::{BigInt, BigUint};

/// Exact rational numbers used throughout.
pub type Rational = num_rational::BigRational;

/// Shorthand for `n/d` as a [`Rational`].
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
