//! Finitely additive measures on finite fields of sets, in exact rationals.
//!
//! A measure is given by its atom weights; everything else (relative
//! measures, integrals of atom-constant functions, the density property)
//! is a finite sum over atoms.
//!
//! The density property quantifies over every `ε > 0`. Here it is checked
//! against an explicit list of `ε` values only; since the check gets harder
//! as `ε` shrinks, the smallest listed value decides the verdict.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{AlgebraError, FieldOfSets};
use crate::set::Subset;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("expected {expected} atom weights, got {found}")]
    WeightCount { found: usize, expected: usize },
    #[error("negative weight on atom {0}")]
    NegativeWeight(usize),
    #[error("the measure of the whole space must be positive")]
    ZeroTotal,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("cannot condition on {0}: it has measure zero")]
    ZeroMeasure(String),
    #[error("function and measure live on different algebras")]
    AlgebraMismatch,
    #[error("density family contains the zero element")]
    ZeroInFamily,
    #[error("epsilon {0} is not in (0,1)")]
    EpsOutOfRange(Rational),
    #[error("measure is not a strictly positive probability measure")]
    NotStrictlyPositiveProbability,
    #[error("not a subalgebra of the measure's algebra")]
    NotSubalgebra,
    #[error("{0} is not a member of the subalgebra")]
    OutsideSubalgebra(String),
}

/// Finitely additive measure given by nonnegative atom weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fam {
    algebra: FieldOfSets,
    weights: Vec<Rational>,
}

impl Fam {
    pub fn new(algebra: FieldOfSets, weights: Vec<Rational>) -> Result<Self, MeasureError> {
        if weights.len() != algebra.atom_count() {
            return Err(MeasureError::WeightCount { found: weights.len(), expected: algebra.atom_count() });
        }
        if let Some(k) = weights.iter().position(|w| *w < Rational::zero()) {
            return Err(MeasureError::NegativeWeight(k));
        }
        if weights.iter().all(Zero::is_zero) {
            return Err(MeasureError::ZeroTotal);
        }
        Ok(Fam { algebra, weights })
    }

    /// Normalized counting measure: each atom weighs its share of points.
    /// On a powerset this is the uniform probability.
    pub fn counting(algebra: &FieldOfSets) -> Self {
        let n = algebra.ground_size() as i64;
        let weights = algebra
            .atoms()
            .iter()
            .map(|a| Rational::new((a.len() as i64).into(), n.into()))
            .collect();
        Fam { algebra: algebra.clone(), weights }
    }

    pub fn algebra(&self) -> &FieldOfSets {
        &self.algebra
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn total(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        self.total().is_one()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.weights.iter().all(|w| *w > Rational::zero())
    }

    /// Sum of the weights of the atoms below `e`.
    pub fn measure_of(&self, e: &Subset) -> Result<Rational, MeasureError> {
        let mask = self.algebra.atom_mask(e)?;
        Ok(self.sum_mask(mask))
    }

    fn sum_mask(&self, mask: u64) -> Rational {
        self.weights
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, w)| w)
            .sum()
    }

    /// `a ↦ Ξ(a ∧ b) / Ξ(b)`.
    pub fn relative_measure(&self, b: &Subset) -> Result<Fam, MeasureError> {
        let mask = self.algebra.atom_mask(b)?;
        let mb = self.sum_mask(mask);
        if mb.is_zero() {
            return Err(MeasureError::ZeroMeasure(b.to_string()));
        }
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(k, w)| if mask >> k & 1 == 1 { w / &mb } else { Rational::zero() })
            .collect();
        Ok(Fam { algebra: self.algebra.clone(), weights })
    }

    /// `∫ f dΞ` as the weighted sum over atoms.
    pub fn integrate(&self, f: &SimpleFunction) -> Result<Rational, MeasureError> {
        if f.algebra != self.algebra {
            return Err(MeasureError::AlgebraMismatch);
        }
        Ok(f.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }

    /// For every `ε` in `eps` and every nonzero `b`, some `s` in `family`
    /// has `Ξ_s(b) >= 1 - ε`.
    pub fn density_property_check(
        &self,
        family: &[Subset],
        eps: &[Rational],
    ) -> Result<DensityVerdict, MeasureError> {
        if !(self.is_probability() && self.is_strictly_positive()) {
            return Err(MeasureError::NotStrictlyPositiveProbability);
        }
        check_eps(eps)?;
        let mut relatives = Vec::with_capacity(family.len());
        for s in family {
            if s.is_empty() {
                return Err(MeasureError::ZeroInFamily);
            }
            relatives.push(self.relative_measure(s)?);
        }
        let mut eps_sorted = eps.to_vec();
        eps_sorted.sort();
        for e in &eps_sorted {
            let need = Rational::one() - e;
            for mask in 1..self.algebra.member_count() {
                if !relatives.iter().any(|r| r.sum_mask(mask) >= need) {
                    return Ok(DensityVerdict::Fails {
                        eps: e.clone(),
                        member: self.algebra.member_from_mask(mask),
                    });
                }
            }
        }
        Ok(DensityVerdict::Holds)
    }

    /// Restriction to a subalgebra, and whether `family` (which must lie in
    /// the subalgebra) still witnesses the density property there.
    pub fn restrict_to_subalgebra(
        &self,
        sub: &FieldOfSets,
        family: &[Subset],
        eps: &[Rational],
    ) -> Result<(Fam, bool), MeasureError> {
        if !sub.is_subalgebra_of(&self.algebra) {
            return Err(MeasureError::NotSubalgebra);
        }
        if let Some(s) = family.iter().find(|s| !sub.is_member(s)) {
            return Err(MeasureError::OutsideSubalgebra(s.to_string()));
        }
        let weights = sub
            .atoms()
            .iter()
            .map(|a| self.measure_of(a))
            .collect::<Result<Vec<_>, _>>()?;
        let restricted = Fam::new(sub.clone(), weights)?;
        let holds = restricted.density_property_check(family, eps)?.holds();
        Ok((restricted, holds))
    }
}

fn check_eps(eps: &[Rational]) -> Result<(), MeasureError> {
    match eps
        .iter()
        .find(|e| **e <= Rational::zero() || **e >= Rational::one())
    {
        Some(e) => Err(MeasureError::EpsOutOfRange(e.clone())),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DensityVerdict {
    Holds,
    /// No member of the family conditions `member` up to `1 - eps`.
    Fails { eps: Rational, member: Subset },
}

impl DensityVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, DensityVerdict::Holds)
    }
}

/// A function constant on the atoms of a field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleFunction {
    algebra: FieldOfSets,
    values: Vec<Rational>,
}

impl SimpleFunction {
    pub fn new(algebra: FieldOfSets, values: Vec<Rational>) -> Result<Self, MeasureError> {
        if values.len() != algebra.atom_count() {
            return Err(MeasureError::WeightCount { found: values.len(), expected: algebra.atom_count() });
        }
        Ok(SimpleFunction { algebra, values })
    }

    pub fn constant(algebra: &FieldOfSets, c: Rational) -> Self {
        SimpleFunction { algebra: algebra.clone(), values: vec![c; algebra.atom_count()] }
    }

    /// `χ_E` for a member `E`.
    pub fn characteristic(algebra: &FieldOfSets, e: &Subset) -> Result<Self, MeasureError> {
        let mask = algebra.atom_mask(e)?;
        let values = (0..algebra.atom_count())
            .map(|k| if mask >> k & 1 == 1 { Rational::one() } else { Rational::zero() })
            .collect();
        Ok(SimpleFunction { algebra: algebra.clone(), values })
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn add(&self, other: &SimpleFunction) -> Result<Self, MeasureError> {
        if self.algebra != other.algebra {
            return Err(MeasureError::AlgebraMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(SimpleFunction { algebra: self.algebra.clone(), values })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        SimpleFunction {
            algebra: self.algebra.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &SimpleFunction) -> bool {
        self.algebra == other.algebra && self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    pub fn integrate(&self, m: &Fam) -> Result<Rational, MeasureError> {
        m.integrate(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn set(ground: usize, pts: &[usize]) -> Subset {
        Subset::from_indices(ground, pts.iter().copied())
    }

    #[test]
    fn measure_of_examples() {
        let m = Fam::counting(&FieldOfSets::powerset(3).unwrap());
        assert_eq!(m.measure_of(&set(3, &[0, 1])).unwrap(), r(2, 3));
        assert_eq!(m.measure_of(&set(3, &[])).unwrap(), r(0, 1));
        assert_eq!(m.measure_of(&set(3, &[0, 1, 2])).unwrap(), r(1, 1));

        let coarse = FieldOfSets::generate(3, &[vec![0]]).unwrap();
        let m = Fam::counting(&coarse);
        assert!(matches!(m.measure_of(&set(3, &[1])), Err(MeasureError::Algebra(_))));
    }

    #[test]
    fn relative_measure_examples() {
        let m = Fam::counting(&FieldOfSets::powerset(3).unwrap());
        let rel = m.relative_measure(&set(3, &[0, 1])).unwrap();
        assert_eq!(rel.measure_of(&set(3, &[0])).unwrap(), r(1, 2));
        assert!(rel.is_probability());

        let unnormalized = Fam::new(FieldOfSets::powerset(3).unwrap(), vec![r(1, 1), r(2, 1), r(3, 1)]).unwrap();
        let whole = unnormalized.relative_measure(&set(3, &[0, 1, 2])).unwrap();
        assert_eq!(whole.weights(), &[r(1, 6), r(1, 3), r(1, 2)]);

        let at0 = m.relative_measure(&set(3, &[0])).unwrap();
        assert_eq!(at0.measure_of(&set(3, &[1, 2])).unwrap(), r(0, 1));

        let degenerate = Fam::new(FieldOfSets::powerset(2).unwrap(), vec![r(0, 1), r(1, 1)]).unwrap();
        assert!(matches!(
            degenerate.relative_measure(&set(2, &[0])),
            Err(MeasureError::ZeroMeasure(_))
        ));
    }

    #[test]
    fn integrate_examples() {
        let b = FieldOfSets::powerset(3).unwrap();
        let m = Fam::new(b.clone(), vec![r(1, 2), r(1, 3), r(1, 6)]).unwrap();
        let e = set(3, &[0, 2]);
        let chi = SimpleFunction::characteristic(&b, &e).unwrap();
        assert_eq!(m.integrate(&chi).unwrap(), m.measure_of(&e).unwrap());
        let c = SimpleFunction::constant(&b, r(5, 7));
        assert_eq!(m.integrate(&c).unwrap(), r(5, 7) * m.total());

        let other = FieldOfSets::trivial(3).unwrap();
        let f = SimpleFunction::constant(&other, r(1, 1));
        assert_eq!(m.integrate(&f), Err(MeasureError::AlgebraMismatch));
    }

    #[test]
    fn strict_positivity() {
        let b = FieldOfSets::powerset(2).unwrap();
        assert!(Fam::counting(&b).is_strictly_positive());
        assert!(!Fam::new(b, vec![r(0, 1), r(1, 1)]).unwrap().is_strictly_positive());
        assert!(Fam::counting(&FieldOfSets::trivial(4).unwrap()).is_strictly_positive());
    }

    #[test]
    fn rejects_bad_weights() {
        let b = FieldOfSets::powerset(2).unwrap();
        assert_eq!(Fam::new(b.clone(), vec![r(1, 1)]), Err(MeasureError::WeightCount { found: 1, expected: 2 }));
        assert_eq!(Fam::new(b.clone(), vec![r(-1, 1), r(2, 1)]), Err(MeasureError::NegativeWeight(0)));
        assert_eq!(Fam::new(b, vec![r(0, 1), r(0, 1)]), Err(MeasureError::ZeroTotal));
    }

    #[test]
    fn density_examples() {
        let b = FieldOfSets::powerset(3).unwrap();
        let m = Fam::counting(&b);
        let eps = [r(1, 100), r(1, 2)];
        assert!(m.density_property_check(b.atoms(), &eps).unwrap().holds());
        let all: Vec<Subset> = b.positive_members().collect();
        assert!(m.density_property_check(&all, &eps).unwrap().holds());

        let b2 = FieldOfSets::powerset(2).unwrap();
        let m2 = Fam::counting(&b2);
        match m2.density_property_check(&[b2.unit()], &[r(1, 4)]).unwrap() {
            DensityVerdict::Fails { eps, member } => {
                assert_eq!(eps, r(1, 4));
                assert_eq!(member.len(), 1);
            }
            DensityVerdict::Holds => panic!("expected a counterexample"),
        }

        assert_eq!(
            m.density_property_check(&[b.zero()], &eps),
            Err(MeasureError::ZeroInFamily)
        );
        assert_eq!(
            m.density_property_check(b.atoms(), &[r(1, 1)]),
            Err(MeasureError::EpsOutOfRange(r(1, 1)))
        );
    }

    #[test]
    fn restriction_examples() {
        let b = FieldOfSets::powerset(3).unwrap();
        let m = Fam::counting(&b);
        let eps = [r(1, 10)];
        let (same, ok) = m.restrict_to_subalgebra(&b, b.atoms(), &eps).unwrap();
        assert_eq!(same, m);
        assert!(ok);

        let s = vec![set(3, &[0]), set(3, &[1, 2])];
        let sub = FieldOfSets::from_generators(3, &s, 16).unwrap();
        let (_, ok) = m.restrict_to_subalgebra(&sub, &s, &eps).unwrap();
        assert!(ok);

        let trivial = FieldOfSets::trivial(3).unwrap();
        let (restricted, ok) = m.restrict_to_subalgebra(&trivial, &[trivial.unit()], &eps).unwrap();
        assert!(ok);
        assert_eq!(restricted.weights(), &[r(1, 1)]);

        assert_eq!(
            m.restrict_to_subalgebra(&trivial, &[set(3, &[0])], &eps),
            Err(MeasureError::OutsideSubalgebra("{0}".into()))
        );
        let coarse = Fam::counting(&trivial);
        assert_eq!(
            coarse.restrict_to_subalgebra(&b, &[], &eps),
            Err(MeasureError::NotSubalgebra)
        );
    }
}
