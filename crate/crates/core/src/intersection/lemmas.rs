//! Elementary facts about `i*` and `int`, checked on one instance.

use itertools::Itertools;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{int_exact, IntersectionError};
use crate::order::{dedup, Forcing};
use crate::{BigInt, Rational};

/// Outcome of one numbered fact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct S8Item {
    pub item: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Number of individual comparisons made.
    pub checks: usize,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct S8Report {
    pub items: Vec<S8Item>,
}

impl S8Report {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

struct Item {
    item: u8,
    name: &'static str,
    checks: usize,
    counterexample: Option<String>,
}

impl Item {
    fn new(item: u8, name: &'static str) -> Self {
        Item { item, name, checks: 0, counterexample: None }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(describe());
        }
    }

    fn finish(self) -> S8Item {
        S8Item {
            item: self.item,
            name: self.name,
            passed: self.counterexample.is_none() && self.checks > 0,
            checks: self.checks,
            counterexample: self.counterexample,
        }
    }
}

fn frac(n: usize, d: usize) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Sequences from `q`: every one of length at most 3, then random ones up
/// to length 8.
fn sample_sequences<E: Clone>(q: &[E], rng: &mut ChaCha8Rng) -> Vec<Vec<E>> {
    let mut out = Vec::new();
    for len in 1..=3 {
        out.extend(
            std::iter::repeat_n(q.iter().cloned(), len)
                .multi_cartesian_product()
                .take(200),
        );
    }
    for _ in 0..40 {
        let len = rng.gen_range(1..=8);
        out.push((0..len).map(|_| q.choose(rng).expect("nonempty").clone()).collect());
    }
    out
}

/// Greedy maximal antichain, scanning conditions in a shuffled order.
fn maximal_antichain<F: Forcing>(f: &F, rng: &mut ChaCha8Rng) -> Vec<F::Elem> {
    let mut conds = f.conditions();
    conds.shuffle(rng);
    let mut chosen: Vec<F::Elem> = Vec::new();
    for c in conds {
        if chosen.iter().all(|a| !f.compatible(a, &c)) {
            chosen.push(c);
        }
    }
    chosen
}

/// Checks the basic facts relating `i*`, `int`, linkedness and antichains
/// on the family `q` of `f`, using `seed` for the sampled sequences and
/// supersets.
pub fn lemma_s8_suite<F: Forcing>(f: &F, q: &[F::Elem], seed: u64) -> Result<S8Report, IntersectionError> {
    let q = dedup(q);
    if q.is_empty() {
        return Err(IntersectionError::EmptyFamily);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let value = int_exact(f, &q)?.value;
    let k = q.len();
    let linked = (1..=k).take_while(|&m| f.is_m_linked(&q, m)).last().unwrap_or(0);
    let seqs = sample_sequences(&q, &mut rng);
    let show = |s: &[F::Elem]| s.iter().map(|x| f.describe(x)).join(" ");

    let mut linked_item = Item::new(1, "m-linked bounds i* below by min(m, n)");
    let mut range_item = Item::new(2, "1 <= i* <= n");
    let mut centered_item = Item::new(3, "int = 1 iff centered");
    let mut singleton_item = Item::new(4, "int of a singleton is 1");
    let mut floor_item = Item::new(5, "int(Q) >= 1/|Q|");
    let mut antichain_item = Item::new(6, "antichain has int 1/|A|");
    let mut converse_item = Item::new(7, "int >= 1 - 1/(m+1) forces m-linked");
    let mut mono_item = Item::new(8, "int is antitone in Q");

    for s in &seqs {
        let i = f.i_star(s)?;
        let n = s.len();
        linked_item.check(i >= linked.min(n), || format!("{} has i* {i} below {}", show(s), linked.min(n)));
        range_item.check(1 <= i && i <= n, || format!("{} has i* {i}", show(s)));
        if f.is_centered(&q) {
            centered_item.check(i == n, || format!("centered Q but {} has i* {i}", show(s)));
        }
    }

    let centered = f.is_centered(&q);
    centered_item.check(value.is_one() == centered, || format!("int = {value}, centered = {centered}"));

    for p in f.conditions() {
        let v = int_exact(f, std::slice::from_ref(&p))?.value;
        singleton_item.check(v.is_one(), || format!("int({{{}}}) = {v}", f.describe(&p)));
    }

    floor_item.check(value >= frac(1, k), || format!("int = {value} < 1/{k}"));

    let mut antichains = vec![maximal_antichain(f, &mut rng)];
    if f.is_antichain(&q) {
        antichains.push(q.clone());
    }
    for a in &antichains {
        let v = int_exact(f, a)?.value;
        antichain_item.check(v == frac(1, dedup(a).len()), || format!("antichain {} has int {v}", show(a)));
    }

    for m in 2..=k.max(3) {
        let threshold = Rational::one() - frac(1, m + 1);
        if value >= threshold {
            converse_item.check(f.is_m_linked(&q, m), || format!("int = {value} but not {m}-linked"));
        } else {
            converse_item.check(true, String::new);
        }
    }

    let all = f.conditions();
    let mut supersets = vec![all.clone()];
    for _ in 0..4 {
        let mut extra: Vec<F::Elem> = all.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        extra.extend(q.iter().cloned());
        supersets.push(extra);
    }
    for sup in &supersets {
        let v = int_exact(f, sup)?.value;
        mono_item.check(v <= value, || format!("int of superset {} is {v} > {value}", show(sup)));
    }

    Ok(S8Report {
        items: vec![
            linked_item.finish(),
            range_item.finish(),
            centered_item.finish(),
            singleton_item.finish(),
            floor_item.finish(),
            antichain_item.finish(),
            converse_item.finish(),
            mono_item.finish(),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FieldOfSets;
    use crate::order::FinitePoset;
    use crate::set::Subset;

    #[test]
    fn suite_passes_on_small_examples() {
        let v = FinitePoset::from_labeled_relation(&["p", "q", "r"], &[("r", "p"), ("r", "q")]).unwrap();
        let report = lemma_s8_suite(&v, &[0, 1], 1).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.items.len(), 8);

        let a = FinitePoset::antichain(4);
        assert!(lemma_s8_suite(&a, &[0, 1, 2], 2).unwrap().passed());

        let b = FieldOfSets::powerset(3).unwrap();
        let q: Vec<Subset> = [[0, 1], [0, 2], [1, 2]].iter().map(|s| Subset::from_indices(3, *s)).collect();
        assert!(lemma_s8_suite(&b, &q, 3).unwrap().passed());
    }

    #[test]
    fn empty_family_rejected() {
        let a = FinitePoset::antichain(2);
        assert_eq!(lemma_s8_suite(&a, &[], 0), Err(IntersectionError::EmptyFamily));
    }
}
