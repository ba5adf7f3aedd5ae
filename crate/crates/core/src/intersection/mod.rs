//! `i*`, exact intersection numbers, and the checks built on them.
//!
//! [`int_exact`] moves `Q` into a field of sets through a dense embedding
//! (the regular-open completion for posets, the identity for fields) and
//! solves the matrix game there. The optimal row strategy is a measure
//! bounding `int(Q)` from below; the optimal column strategy, scaled to
//! integers, is a sequence from `Q` bounding it from above. Both bounds are
//! recomputed independently before a certificate is returned.

pub mod game;
mod lemmas;
pub mod simplex;

use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

pub use lemmas::{lemma_s8_suite, S8Item, S8Report};

use crate::algebra::{AlgebraError, EmbeddingMap, FieldOfSets};
use crate::measure::{Fam, MeasureError, SimpleFunction};
use crate::order::{dedup, ConditionSeq, Forcing, OrderError};
use crate::set::Subset;
use crate::{BigInt, Rational};
use game::GameLp;
use simplex::LpError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntersectionError {
    #[error("the family Q is empty")]
    EmptyFamily,
    #[error("`{0}` is not a nonzero condition")]
    ZeroElement(String),
    #[error("n_max must be at least 1")]
    ZeroLength,
    #[error("embedding is not complete")]
    NotComplete,
    #[error("delta {0} is outside [0,1]")]
    DeltaOutOfRange(Rational),
    #[error("measure takes values above 1")]
    MeasureAboveOne,
    #[error("measure is defined on a different algebra")]
    AlgebraMismatch,
    #[error("sequence entry `{0}` is not in Q")]
    NotInFamily(String),
    #[error("witnesses do not certify the same value: {primal} vs {dual}")]
    WitnessMismatch { primal: Rational, dual: Rational },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Order(#[from] OrderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Both witnesses come from the simplex.
    LpExact,
    /// Witnesses were supplied by the caller and checked.
    SequenceBound,
}

/// `int(Q)` together with a witness for each side of the inequality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionCertificate<E> {
    pub value: Rational,
    /// `Q`, deduplicated and sorted.
    pub family: Vec<E>,
    /// Images of `family` in the algebra of `primal_witness`.
    pub images: Vec<Subset>,
    /// Probability measure with `min_q Ξ(ι(q)) = value`.
    pub primal_witness: Fam,
    /// Sequence from `Q` with `i*/n = value`.
    pub dual_witness: ConditionSeq<E>,
    pub dual_i_star: usize,
    pub method: Method,
}

impl<E> IntersectionCertificate<E> {
    /// The lower bound certified by the measure.
    pub fn primal_value(&self) -> Rational {
        self.images
            .iter()
            .map(|s| self.primal_witness.measure_of(s).expect("image is a member"))
            .min()
            .expect("Q is nonempty")
    }

    /// The upper bound certified by the sequence.
    pub fn dual_value(&self) -> Rational {
        Rational::new(BigInt::from(self.dual_i_star), BigInt::from(self.dual_witness.len()))
    }
}

impl<E: Clone + Ord + std::hash::Hash + std::fmt::Debug> IntersectionCertificate<E> {
    /// Checks caller-supplied witnesses: `measure` must live on the field
    /// that `f` represents `Q` in, and `seq` must draw from `Q`.
    pub fn from_witnesses<F: Forcing<Elem = E>>(
        f: &F,
        q: &[E],
        measure: Fam,
        seq: Vec<E>,
    ) -> Result<Self, IntersectionError> {
        let family = checked_family(f, q)?;
        let (field, images) = f.represent(&family)?;
        if *measure.algebra() != field {
            return Err(IntersectionError::AlgebraMismatch);
        }
        if !measure.is_probability() {
            return Err(IntersectionError::Measure(MeasureError::ZeroTotal));
        }
        if let Some(x) = seq.iter().find(|x| family.binary_search(x).is_err()) {
            return Err(IntersectionError::NotInFamily(f.describe(x)));
        }
        let dual_i_star = f.i_star(&seq)?;
        let cert = IntersectionCertificate {
            value: Rational::zero(),
            family,
            images,
            primal_witness: measure,
            dual_witness: ConditionSeq(seq),
            dual_i_star,
            method: Method::SequenceBound,
        };
        let (primal, dual) = (cert.primal_value(), cert.dual_value());
        if primal != dual {
            return Err(IntersectionError::WitnessMismatch { primal, dual });
        }
        Ok(IntersectionCertificate { value: primal, ..cert })
    }
}

fn checked_family<F: Forcing>(f: &F, q: &[F::Elem]) -> Result<Vec<F::Elem>, IntersectionError> {
    let family = dedup(q);
    if family.is_empty() {
        return Err(IntersectionError::EmptyFamily);
    }
    if let Some(x) = family.iter().find(|x| !f.is_condition(x)) {
        return Err(IntersectionError::ZeroElement(f.describe(x)));
    }
    Ok(family)
}

/// `i*` of a nonempty sequence.
pub fn i_star<F: Forcing>(f: &F, seq: &ConditionSeq<F::Elem>) -> Result<usize, IntersectionError> {
    Ok(f.i_star(seq.entries())?)
}

/// Exact `int(Q)` with primal and dual witnesses.
pub fn int_exact<F: Forcing>(f: &F, q: &[F::Elem]) -> Result<IntersectionCertificate<F::Elem>, IntersectionError> {
    let family = checked_family(f, q)?;
    let (field, images) = f.represent(&family)?;
    let payoff: Vec<Vec<bool>> = field
        .atoms()
        .iter()
        .map(|atom| images.iter().map(|img| atom.is_subset(img)).collect())
        .collect();
    let game = GameLp::new(payoff, images.len())
        .ok_or_else(|| IntersectionError::ZeroElement(f.describe(&family[0])))?;
    let solution = game.solve()?;

    let primal_witness = Fam::new(field, solution.row_strategy)?;
    let denominator = solution
        .col_strategy
        .iter()
        .fold(BigInt::one(), |acc, y| acc.lcm(y.denom()));
    let mut seq = Vec::new();
    for (x, y) in family.iter().zip(&solution.col_strategy) {
        let count = (y * Rational::from_integer(denominator.clone())).to_integer();
        let count: usize = count.try_into().expect("repetition count fits in usize");
        seq.extend(std::iter::repeat_n(x.clone(), count));
    }
    let dual_i_star = f.i_star(&seq)?;

    let cert = IntersectionCertificate {
        value: solution.value,
        family,
        images,
        primal_witness,
        dual_witness: ConditionSeq(seq),
        dual_i_star,
        method: Method::LpExact,
    };
    let (primal, dual) = (cert.primal_value(), cert.dual_value());
    if primal != cert.value || dual != cert.value {
        return Err(IntersectionError::WitnessMismatch { primal, dual });
    }
    Ok(cert)
}

/// `int(Q)`, with the empty family mapped to 1 (infimum over nothing).
pub fn int_or_one<F: Forcing>(f: &F, q: &[F::Elem]) -> Result<Rational, IntersectionError> {
    if q.is_empty() {
        return Ok(Rational::one());
    }
    Ok(int_exact(f, q)?.value)
}

/// Best `i*/n` over multisets from `Q` of size at most `n_max`.
pub fn int_upper_bound<F: Forcing>(f: &F, q: &[F::Elem], n_max: usize) -> Result<Rational, IntersectionError> {
    Ok(best_sequence(f, q, n_max)?.0)
}

/// Like [`int_upper_bound`], also returning a sequence attaining the bound
/// (the shortest one found).
pub fn best_sequence<F: Forcing>(
    f: &F,
    q: &[F::Elem],
    n_max: usize,
) -> Result<(Rational, ConditionSeq<F::Elem>), IntersectionError> {
    if n_max == 0 {
        return Err(IntersectionError::ZeroLength);
    }
    let family = checked_family(f, q)?;
    let rows = maximal_rows(f.bound_profiles(&family));

    let mut search = MultisetSearch {
        rows: rows.iter().map(Subset::to_vec).collect(),
        loads: vec![0; rows.len()],
        counts: vec![0; family.len()],
        best: (1, 1),
        best_counts: {
            let mut c = vec![0; family.len()];
            c[0] = 1;
            c
        },
    };
    for n in 2..=n_max {
        search.run(0, n, n);
    }
    let (num, den) = search.best;
    let mut seq = Vec::with_capacity(den);
    for (x, &c) in family.iter().zip(&search.best_counts) {
        seq.extend(std::iter::repeat_n(x.clone(), c));
    }
    Ok((Rational::new(BigInt::from(num), BigInt::from(den)), ConditionSeq(seq)))
}

/// Drops rows contained in another row; they never attain the maximum.
fn maximal_rows(rows: Vec<Subset>) -> Vec<Subset> {
    let rows = dedup(&rows);
    rows.iter()
        .filter(|r| !r.is_empty() && !rows.iter().any(|s| s != *r && r.is_subset(s)))
        .cloned()
        .collect()
}

/// Enumerates count vectors over `Q` with a fixed total, pruning as soon as
/// the heaviest row already rules out beating the best ratio.
struct MultisetSearch {
    /// For each maximal witness row, the columns below it.
    rows: Vec<Vec<usize>>,
    loads: Vec<usize>,
    counts: Vec<usize>,
    best: (usize, usize),
    best_counts: Vec<usize>,
}

impl MultisetSearch {
    fn max_load(&self) -> usize {
        self.loads.iter().copied().max().unwrap_or(0)
    }

    fn hopeless(&self, n: usize) -> bool {
        self.max_load() * self.best.1 >= self.best.0 * n
    }

    fn add(&mut self, col: usize, k: usize) {
        self.counts[col] += k;
        for (load, row) in self.loads.iter_mut().zip(&self.rows) {
            if row.binary_search(&col).is_ok() {
                *load += k;
            }
        }
    }

    fn remove(&mut self, col: usize, k: usize) {
        self.counts[col] -= k;
        for (load, row) in self.loads.iter_mut().zip(&self.rows) {
            if row.binary_search(&col).is_ok() {
                *load -= k;
            }
        }
    }

    fn run(&mut self, col: usize, remaining: usize, n: usize) {
        if self.hopeless(n) {
            return;
        }
        let last = col + 1 == self.counts.len();
        if last {
            self.add(col, remaining);
            if !self.hopeless(n) {
                self.best = (self.max_load(), n);
                self.best_counts = self.counts.clone();
            }
            self.remove(col, remaining);
            return;
        }
        for k in (0..=remaining).rev() {
            self.add(col, k);
            self.run(col + 1, remaining - k, n);
            self.remove(col, k);
        }
    }
}

/// Measure-based lower bound: `Q = {p ∈ B⁺ : Ξ(p) >= δ}` has `int(Q) >= δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KelleyBound {
    pub family: Vec<Subset>,
    pub measure: Fam,
    pub delta: Rational,
}

/// One pass of the integral argument for a particular sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KelleyReplay {
    pub i_star: usize,
    pub n: usize,
    /// `Σ_i χ_{q_i} <= i*` on every atom.
    pub pointwise: bool,
    /// `∫ Σ_i χ_{q_i} dΞ`, equal to `Σ_i Ξ(q_i)`.
    pub integral: Rational,
    /// `i* >= i*·Ξ(X) >= integral >= n·δ`.
    pub holds: bool,
}

pub fn kelley_lower_bound(b: &FieldOfSets, m: &Fam, delta: Rational) -> Result<KelleyBound, IntersectionError> {
    if m.algebra() != b {
        return Err(IntersectionError::AlgebraMismatch);
    }
    if m.total() > Rational::one() {
        return Err(IntersectionError::MeasureAboveOne);
    }
    if delta < Rational::zero() || delta > Rational::one() {
        return Err(IntersectionError::DeltaOutOfRange(delta));
    }
    let family = b
        .positive_members()
        .filter(|p| m.measure_of(p).map(|v| v >= delta).unwrap_or(false))
        .collect();
    Ok(KelleyBound { family, measure: m.clone(), delta })
}

impl KelleyBound {
    pub fn algebra(&self) -> &FieldOfSets {
        self.measure.algebra()
    }

    pub fn replay(&self, seq: &[Subset]) -> Result<KelleyReplay, IntersectionError> {
        let b = self.algebra();
        if let Some(x) = seq.iter().find(|x| !self.family.contains(x)) {
            return Err(IntersectionError::NotInFamily(x.to_string()));
        }
        let i_star = b.i_star(seq)?;
        let mut sum = SimpleFunction::constant(b, Rational::zero());
        let mut direct = Rational::zero();
        for q in seq {
            sum = sum.add(&SimpleFunction::characteristic(b, q)?)?;
            direct += self.measure.measure_of(q)?;
        }
        let ceiling = SimpleFunction::constant(b, Rational::from_integer(BigInt::from(i_star)));
        let pointwise = sum.le(&ceiling);
        let integral = self.measure.integrate(&sum)?;
        let top = self.measure.integrate(&ceiling)?;
        let n = seq.len();
        let holds = pointwise
            && integral == direct
            && Rational::from_integer(BigInt::from(i_star)) >= top
            && top >= integral
            && integral >= &self.delta * Rational::from_integer(BigInt::from(n));
        Ok(KelleyReplay { i_star, n, pointwise, integral, holds })
    }

    /// Exact `int` of the family; the empty family counts as 1.
    pub fn exact_value(&self) -> Result<Rational, IntersectionError> {
        int_or_one(self.algebra(), &self.family)
    }
}

/// `int(Q) = int(Q↑)`.
pub fn check_upward_invariance<F: Forcing>(f: &F, q: &[F::Elem]) -> Result<bool, IntersectionError> {
    let base = int_exact(f, q)?.value;
    let closed = int_exact(f, &f.upward_closure(q))?.value;
    Ok(base == closed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreimageCheck {
    pub target_value: Rational,
    pub source_value: Rational,
}

impl PreimageCheck {
    pub fn holds(&self) -> bool {
        self.target_value <= self.source_value
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreservationReport {
    pub source_value: Rational,
    pub target_value: Rational,
    /// `int(R) <= int(e⁻¹[R])` for each sampled `R`.
    pub preimages: Vec<PreimageCheck>,
}

impl PreservationReport {
    pub fn holds(&self) -> bool {
        self.source_value == self.target_value && self.preimages.iter().all(PreimageCheck::holds)
    }
}

/// Compares `int(Q)` with `int(e[Q])`, and `int(R)` with `int(e⁻¹[R])` for
/// each sample `R` of nonzero target members.
pub fn check_embedding_preservation(
    e: &EmbeddingMap,
    q: &[usize],
    samples: &[Vec<Subset>],
) -> Result<PreservationReport, IntersectionError> {
    if !e.is_complete() {
        return Err(IntersectionError::NotComplete);
    }
    let source_value = int_exact(e.source(), q)?.value;
    let target_value = int_exact(e.target(), &e.image_of(q))?.value;
    let preimages = samples
        .iter()
        .map(|r| {
            Ok(PreimageCheck {
                target_value: int_or_one(e.target(), r)?,
                source_value: int_or_one(e.source(), &e.preimage(r))?,
            })
        })
        .collect::<Result<Vec<_>, IntersectionError>>()?;
    Ok(PreservationReport { source_value, target_value, preimages })
}
