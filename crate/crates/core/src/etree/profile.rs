//! Growth functions `ϱ, π, a, M` and the level norms `μ_h`.
//!
//! Norm comparisons never take logarithms: `μ_h(n) >= u/v` is decided as
//! `M^v >= a^u · (M - n)^v` over big integers.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::EtreeError;
use crate::{BigInt, Rational};

/// Branching data of one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    /// Number of children of every node at this level.
    pub m: BigUint,
    /// Base of the logarithm in the norm.
    pub a: BigUint,
}

/// A user-supplied level. `rho` and `pi` are informational only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSpec {
    pub m: BigUint,
    pub a: BigUint,
    pub rho: Option<BigUint>,
    pub pi: Option<BigUint>,
}

impl LevelSpec {
    pub fn new(m: impl Into<BigUint>, a: impl Into<BigUint>) -> Self {
        LevelSpec { m: m.into(), a: a.into(), rho: None, pi: None }
    }

    fn level(&self) -> Level {
        Level { m: self.m.clone(), a: self.a.clone() }
    }
}

/// Explicit per-level tables, optionally repeating a tail level forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CustomProfile {
    levels: Vec<LevelSpec>,
    tail: Option<LevelSpec>,
}

impl CustomProfile {
    pub fn new(levels: Vec<LevelSpec>, tail: Option<LevelSpec>) -> Result<Self, EtreeError> {
        for (h, l) in levels.iter().enumerate() {
            check_level(h, l)?;
        }
        if let Some(t) = &tail {
            check_level(levels.len(), t)?;
        }
        if levels.is_empty() && tail.is_none() {
            return Err(EtreeError::LevelUndefined(0));
        }
        Ok(CustomProfile { levels, tail })
    }

    /// The same `M` and `a` at every level.
    pub fn uniform(m: u64, a: u64) -> Result<Self, EtreeError> {
        Self::new(Vec::new(), Some(LevelSpec::new(m, a)))
    }

    pub fn levels(&self) -> &[LevelSpec] {
        &self.levels
    }

    pub fn tail(&self) -> Option<&LevelSpec> {
        self.tail.as_ref()
    }

    pub fn spec(&self, h: usize) -> Option<&LevelSpec> {
        self.levels.get(h).or(self.tail.as_ref())
    }
}

fn check_level(h: usize, l: &LevelSpec) -> Result<(), EtreeError> {
    let two = BigUint::from(2u8);
    if l.m < two || l.a < two {
        return Err(EtreeError::BadLevel { h, reason: "M and a must both be at least 2".into() });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrowthProfile {
    /// The recursive growth functions; exact only at heights 0 and 1.
    Paper,
    Custom(CustomProfile),
}

/// `(ϱ(h), π(h), a(h), M(h))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperConstants {
    pub rho: BigUint,
    pub pi: BigUint,
    pub a: BigUint,
    pub m: BigUint,
}

/// Exact constants of the recursive profile. Heights above 1 are refused:
/// `π(2)` alone has more than `2^1928` binary digits.
pub fn paper_constants(h: usize) -> Result<PaperConstants, EtreeError> {
    let base = PaperConstants {
        rho: BigUint::from(2u8),
        pi: BigUint::from(2u8),
        a: BigUint::from(4u8),
        m: BigUint::from(16u8),
    };
    match h {
        0 => Ok(base),
        1 => Ok(next_constants(0, &BigUint::one(), &base).1),
        _ => Err(paper_guard(h)),
    }
}

/// From height `h` (with `|Lev_h|` nodes) to height `h + 1`.
fn next_constants(h: u32, lev_size: &BigUint, c: &PaperConstants) -> (BigUint, PaperConstants) {
    let lev_next = lev_size * &c.m;
    let rho = lev_next.clone().max(BigUint::from(h + 3));
    let inner = BigUint::from((h + 2) * (h + 2)) * rho.pow(h + 2);
    let exponent = rho.pow(h + 1).to_u32().expect("exponent fits at height 1");
    let pi = inner.pow(exponent);
    let a = pi.pow(h + 3);
    let m = a.pow(2);
    (lev_next, PaperConstants { rho, pi, a, m })
}

fn paper_guard(h: usize) -> EtreeError {
    let c1 = paper_constants(1).expect("height 1 is exact");
    // |Lev_2| = |Lev_1| · M(1) = 16 · M(1), a power of two.
    let rho2_bits = (BigUint::from(16u8) * &c1.m).bits() - 1;
    EtreeError::Unrepresentable {
        h,
        detail: format!(
            "pi(2) = [9 * rho(2)^3]^(rho(2)^2) with rho(2) = 2^{rho2_bits}, so pi(2) has more than 2^{} binary digits",
            2 * rho2_bits
        ),
    }
}

impl GrowthProfile {
    /// `M(h)` and `a(h)`.
    pub fn level(&self, h: usize) -> Result<Level, EtreeError> {
        match self {
            GrowthProfile::Paper => {
                let c = paper_constants(h)?;
                Ok(Level { m: c.m, a: c.a })
            }
            GrowthProfile::Custom(p) => p.spec(h).map(LevelSpec::level).ok_or(EtreeError::LevelUndefined(h)),
        }
    }

    pub fn branching(&self, h: usize) -> Result<BigUint, EtreeError> {
        Ok(self.level(h)?.m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormValue {
    Infinite,
    /// `approx` is a float estimate; `exact` is present when the value is
    /// rational.
    Finite { approx: f64, exact: Option<Rational> },
}

fn check_count(level: &Level, n: &BigUint) -> Result<(), EtreeError> {
    if *n > level.m {
        return Err(EtreeError::CountOutOfRange { n: n.clone(), m: level.m.clone() });
    }
    Ok(())
}

/// Natural logarithm of a big integer from its leading 64 bits.
fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().expect("fits").to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    top.to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

/// `μ_h(n)`.
pub fn norm_value(profile: &GrowthProfile, h: usize, n: &BigUint) -> Result<NormValue, EtreeError> {
    let level = profile.level(h)?;
    check_count(&level, n)?;
    if *n == level.m {
        return Ok(NormValue::Infinite);
    }
    let rest = &level.m - n;
    let exact = norm_exact_rational(&level, n);
    let approx = match &exact {
        Some(q) => q.to_f64().expect("finite"),
        None => (big_ln(&level.m) - big_ln(&rest)) / big_ln(&level.a),
    };
    Ok(NormValue::Finite { approx, exact })
}

/// Smallest `b` with `x = b^k` for some `k`, together with that `k`.
fn primitive_root(x: &BigUint) -> (BigUint, u64) {
    for k in (2..=x.bits()).rev() {
        let r = x.nth_root(k as u32);
        if r.pow(k as u32) == *x {
            return (r, k);
        }
    }
    (x.clone(), 1)
}

/// The exact value of a finite `μ_h(n)` when it is rational. It is rational
/// exactly when `M/(M - n)` is an integer power of the primitive root of
/// `a`.
fn norm_exact_rational(level: &Level, n: &BigUint) -> Option<Rational> {
    let rest = &level.m - n;
    if rest.is_zero() || !(&level.m % &rest).is_zero() {
        return None;
    }
    let mut r = &level.m / &rest;
    let (b, k) = primitive_root(&level.a);
    let mut j: u64 = 0;
    while !r.is_one() {
        if !(&r % &b).is_zero() {
            return None;
        }
        r /= &b;
        j += 1;
    }
    Some(Rational::new(BigInt::from(j), BigInt::from(k)))
}

/// Compares `μ_h(n)` with `threshold`; `μ_h(M) = ∞` is greater than
/// everything.
pub fn norm_compare(
    profile: &GrowthProfile,
    h: usize,
    n: &BigUint,
    threshold: &Rational,
) -> Result<Ordering, EtreeError> {
    let level = profile.level(h)?;
    check_count(&level, n)?;
    if *threshold < Rational::zero() {
        return Err(EtreeError::ThresholdNegative(threshold.clone()));
    }
    if *n == level.m {
        return Ok(Ordering::Greater);
    }
    let too_big = || EtreeError::ExponentTooLarge(threshold.clone());
    let u = threshold.numer().to_u32().ok_or_else(too_big)?;
    let v = threshold.denom().to_u32().ok_or_else(too_big)?;
    let lhs = level.m.pow(v);
    let rhs = level.a.pow(u) * (&level.m - n).pow(v);
    Ok(lhs.cmp(&rhs))
}

/// `μ_h(n) >= threshold`, with a positive rational threshold.
pub fn norm_at_least(profile: &GrowthProfile, h: usize, n: &BigUint, threshold: &Rational) -> Result<bool, EtreeError> {
    if *threshold <= Rational::zero() {
        return Err(EtreeError::ThresholdNegative(threshold.clone()));
    }
    Ok(norm_compare(profile, h, n, threshold)? != Ordering::Less)
}

/// Counts up to this bound are checked exhaustively.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityReport {
    pub h: usize,
    pub exhaustive: bool,
    /// Counts checked by exact integer identity.
    pub exact: usize,
    /// Counts with irrational norm, checked by bracketing and in floating point.
    pub approximate: usize,
    pub failures: Vec<BigUint>,
}

impl CardinalityReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `n = M·(1 - a^{-μ_h(n)})` for every `n <= M(h)`, or for boundary and
/// power-of-`a` samples when `M(h)` exceeds [`EXHAUSTIVE_LIMIT`].
pub fn lemma_v50_check(profile: &GrowthProfile, h: usize) -> Result<CardinalityReport, EtreeError> {
    let level = profile.level(h)?;
    let exhaustive = level.m <= BigUint::from(EXHAUSTIVE_LIMIT);
    let samples: Vec<BigUint> = if exhaustive {
        let m = level.m.to_u64().expect("small");
        (0..=m).map(BigUint::from).collect()
    } else {
        cardinality_samples(&level)
    };
    let mut report = CardinalityReport { h, exhaustive, exact: 0, approximate: 0, failures: Vec::new() };
    for n in samples {
        let ok = match norm_value(profile, h, &n)? {
            // a^{-∞} = 0, so the right side is M.
            NormValue::Infinite => {
                report.exact += 1;
                n == level.m
            }
            NormValue::Finite { exact: Some(mu), .. } => {
                report.exact += 1;
                // a^{p/q} = M/(M - n)  <=>  a^p · (M - n)^q = M^q
                let p = mu.numer().to_u32().ok_or(EtreeError::ExponentTooLarge(mu.clone()))?;
                let q = mu.denom().to_u32().ok_or(EtreeError::ExponentTooLarge(mu.clone()))?;
                level.a.pow(p) * (&level.m - &n).pow(q) == level.m.pow(q)
            }
            NormValue::Finite { exact: None, approx } => {
                report.approximate += 1;
                irrational_case_consistent(profile, h, &level, &n, approx)?
            }
        };
        if !ok {
            report.failures.push(n);
        }
    }
    Ok(report)
}

/// The float value lies between rationals that bracket `μ` exactly, and
/// reproduces `n` to double precision.
fn irrational_case_consistent(
    profile: &GrowthProfile,
    h: usize,
    level: &Level,
    n: &BigUint,
    approx: f64,
) -> Result<bool, EtreeError> {
    const DEN: i64 = 1 << 10;
    let scaled = (approx * DEN as f64).floor() as i64;
    let lo = Rational::new(BigInt::from(scaled - 1), BigInt::from(DEN));
    let hi = Rational::new(BigInt::from(scaled + 2), BigInt::from(DEN));
    let lower_ok = lo <= Rational::zero() || norm_compare(profile, h, n, &lo)? == Ordering::Greater;
    let upper_ok = norm_compare(profile, h, n, &hi)? == Ordering::Less;
    let rel = if level.m.bits() <= 52 {
        let m = level.m.to_f64().expect("finite");
        let a = level.a.to_f64().expect("finite");
        let rebuilt = m * (1.0 - a.powf(-approx));
        (rebuilt - n.to_f64().expect("finite")).abs() <= 1e-6 * m.max(1.0)
    } else {
        true
    };
    Ok(lower_ok && upper_ok && rel)
}

/// Boundary counts and the counts whose norm is an integer.
fn cardinality_samples(level: &Level) -> Vec<BigUint> {
    let one = BigUint::one();
    let two = BigUint::from(2u8);
    let m = &level.m;
    let mut out = vec![BigUint::zero(), one.clone(), two.clone(), m / &two, m - &two, m - &one, m.clone()];
    let mut power = level.a.clone();
    for _ in 0..64 {
        if power > *m {
            break;
        }
        if (m % &power).is_zero() {
            out.push(m - m / &power);
        }
        power *= &level.a;
    }
    out.sort();
    out.dedup();
    out
}
