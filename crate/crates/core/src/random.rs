//! Seeded generators of small random instances.

use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;

use crate::algebra::{FieldOfSets, MAX_GROUND_CAP};
use crate::measure::Fam;
use crate::order::{Forcing, FinitePoset};
use crate::set::Subset;
use crate::{BigInt, Rational};

/// A poset on `1..=max_len` elements labelled `p0, p1, ..`: each pair
/// `i < j` is related with probability `density`. With `preorder`, one
/// extra back edge may merge elements into an equivalence class.
pub fn random_poset<R: Rng>(rng: &mut R, max_len: usize, density: f64, preorder: bool) -> FinitePoset {
    let n = rng.gen_range(1..=max_len.max(1));
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                pairs.push((i, j));
            }
        }
    }
    if preorder && n >= 2 && rng.gen_bool(0.3) {
        let j = rng.gen_range(1..n);
        let i = rng.gen_range(0..j);
        pairs.push((i, j));
        pairs.push((j, i));
    }
    // Shuffle labels so the order is not aligned with the index order.
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let pairs: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
    FinitePoset::from_relation((0..n).map(|i| format!("p{i}")), &pairs).expect("indices in range")
}

/// A field over `1..=max_ground` points generated by up to three random
/// subsets.
pub fn random_field<R: Rng>(rng: &mut R, max_ground: usize) -> FieldOfSets {
    let ground = rng.gen_range(1..=max_ground.clamp(1, MAX_GROUND_CAP));
    let gens: Vec<Subset> = (0..rng.gen_range(0..=3))
        .map(|_| Subset::from_indices(ground, (0..ground).filter(|_| rng.gen_bool(0.5))))
        .collect();
    FieldOfSets::from_generators(ground, &gens, MAX_GROUND_CAP).expect("ground within cap")
}

/// `1..=max_len` distinct conditions of `f`.
pub fn random_family<F: Forcing, R: Rng>(rng: &mut R, f: &F, max_len: usize) -> Vec<F::Elem> {
    let conds = f.conditions();
    let k = rng.gen_range(1..=max_len.clamp(1, conds.len().max(1)));
    conds.into_iter().choose_multiple(rng, k)
}

/// A strictly positive probability measure with small integer weights.
pub fn random_measure<R: Rng>(rng: &mut R, field: &FieldOfSets) -> Fam {
    let raw: Vec<i64> = (0..field.atom_count()).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = raw.iter().sum();
    let weights = raw
        .iter()
        .map(|&w| Rational::new(BigInt::from(w), BigInt::from(total)))
        .collect();
    Fam::new(field.clone(), weights).expect("positive weights")
}
