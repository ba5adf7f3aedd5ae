//! Seeded check suites over random instances.
//!
//! Each suite draws `count` instances from one seed and reports, per
//! property, how many comparisons were made and the first counterexample.
//! Errors raised while checking an instance are reported as a failure of the
//! extra item `computations succeed`.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_traits::One;
use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{regularize, ro_completion};
use crate::intersection::{
    check_embedding_preservation, check_upward_invariance, int_exact, int_or_one, int_upper_bound,
    kelley_lower_bound, lemma_s8_suite,
};
use crate::linkedness::{
    density_to_linked_family, derive_m_linked_cover, transfer_backward, transfer_forward, verify_intersection_linked,
    LinkedFamily,
};
use crate::order::{Forcing, FinitePoset};
use crate::random::{random_family, random_field, random_measure, random_poset};
use crate::set::Subset;
use crate::{ratio, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Basic facts about `i*` and `int` on random posets.
    S8,
    /// `int(Q) = int(Q↑)`.
    S7,
    /// `i*` computed in a poset and in its regular-open completion.
    S3,
    /// Linked families moved along the completion embedding.
    I7,
    /// `m`-linked covers read off linked families.
    I15,
    /// Linked families built from the density property.
    I70,
    /// Primal and dual certificates of `int_exact` on random fields.
    Duality,
}

impl Suite {
    pub const ALL: [Suite; 7] = [Suite::S8, Suite::S7, Suite::S3, Suite::I7, Suite::I15, Suite::I70, Suite::Duality];

    pub fn name(self) -> &'static str {
        match self {
            Suite::S8 => "s8",
            Suite::S7 => "s7",
            Suite::S3 => "s3",
            Suite::I7 => "i7",
            Suite::I15 => "i15",
            Suite::I70 => "i70",
            Suite::Duality => "duality",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownSuite(pub String);

impl fmt::Display for UnknownSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = Suite::ALL.iter().map(|s| s.name()).join("|");
        write!(f, "unknown suite `{}` (expected {names})", self.0)
    }
}

impl std::error::Error for UnknownSuite {}

impl FromStr for Suite {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemReport {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub count: usize,
    pub items: Vec<ItemReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

const ERRORS: &str = "computations succeed";

/// Per-item counters in declaration order.
struct Tally {
    items: Vec<ItemReport>,
}

impl Tally {
    fn new(names: &[&str]) -> Self {
        let items = names
            .iter()
            .chain(std::iter::once(&ERRORS))
            .map(|n| ItemReport { name: n.to_string(), passed: true, checked: 0, counterexample: None })
            .collect();
        Tally { items }
    }

    fn slot(&mut self, name: &str) -> &mut ItemReport {
        let pos = self
            .items
            .iter()
            .position(|i| i.name == name)
            .unwrap_or_else(|| panic!("item `{name}` not declared"));
        &mut self.items[pos]
    }

    fn check(&mut self, name: &str, ok: bool, describe: impl FnOnce() -> String) {
        let slot = self.slot(name);
        slot.checked += 1;
        if !ok {
            slot.passed = false;
            if slot.counterexample.is_none() {
                slot.counterexample = Some(describe());
            }
        }
    }

    fn error(&mut self, instance: String, e: impl fmt::Display) {
        self.check(ERRORS, false, || format!("{instance}: {e}"));
    }

    fn finish(self) -> Vec<ItemReport> {
        self.items
            .into_iter()
            .map(|mut i| {
                // Declared items must have been exercised.
                if i.name != ERRORS && i.checked == 0 {
                    i.passed = false;
                    i.counterexample.get_or_insert_with(|| "no instance exercised this item".into());
                }
                i
            })
            .collect()
    }
}

/// One-line description of a poset by its strict order relation.
pub fn describe_poset(p: &FinitePoset) -> String {
    let rel = (0..p.len())
        .cartesian_product(0..p.len())
        .filter(|&(a, b)| a != b && p.leq(a, b))
        .map(|(a, b)| format!("{}<={}", p.label(a), p.label(b)))
        .join(" ");
    format!("P = {{{}}} with [{}]", p.labels().join(","), rel)
}

fn poset_instance(rng: &mut ChaCha8Rng, max_len: usize) -> FinitePoset {
    let density = rng.gen_range(0.1..0.6);
    random_poset(rng, max_len, density, true)
}

fn show<F: Forcing>(f: &F, q: &[F::Elem]) -> String {
    format!("[{}]", q.iter().map(|x| f.describe(x)).join(" "))
}

pub fn run_suite(suite: Suite, seed: u64, count: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items = match suite {
        Suite::S8 => suite_s8(&mut rng, count),
        Suite::S7 => suite_s7(&mut rng, count),
        Suite::S3 => suite_s3(&mut rng, count),
        Suite::I7 => suite_i7(&mut rng, count),
        Suite::I15 => suite_i15(&mut rng, count),
        Suite::I70 => suite_i70(&mut rng, count),
        Suite::Duality => suite_duality(&mut rng, count),
    };
    SuiteReport { suite, seed, count, items }
}

fn suite_s8(rng: &mut ChaCha8Rng, count: usize) -> Vec<ItemReport> {
    let names = [
        "(1) m-linked bounds i* below by min(m, n)",
        "(2) 1 <= i* <= n",
        "(3) int = 1 iff centered",
        "(4) int of a singleton is 1",
        "(5) int(Q) >= 1/|Q|",
        "(6) antichain has int 1/|A|",
        "(7) int >= 1 - 1/(m+1) forces m-linked",
        "(8) int is antitone in Q",
    ];
    let mut t = Tally::new(&names);
    for _ in 0..count {
        let p = poset_instance(rng, 8);
        let q = random_family(rng, &p, 5);
        let seed = rng.gen();
        let instance = || format!("{} Q = {}", describe_poset(&p), show(&p, &q));
        match lemma_s8_suite(&p, &q, seed) {
            Ok(report) => {
                for (item, name) in report.items.iter().zip(names) {
                    let slot = t.slot(name);
                    slot.checked += item.checks;
                    if !item.passed {
                        slot.passed = false;
                        slot.counterexample.get_or_insert_with(|| {
                            format!("{}: {}", instance(), item.counterexample.clone().unwrap_or_default())
                        });
                    }
                }
            }
            Err(e) => t.error(instance(), e),
        }
    }
    t.finish()
}

fn suite_s7(rng: &mut ChaCha8Rng, count: usize) -> Vec<ItemReport> {
    let posets = "int(Q) = int(Q↑) on posets";
    let fields = "int(Q) = int(Q↑) on fields";
    let mut t = Tally::new(&[posets, fields]);
    for k in 0..count {
        if k % 2 == 0 {
            let p = poset_instance(rng, 8);
            let q = random_family(rng, &p, 5);
            let inst = || format!("{} Q = {}", describe_poset(&p), show(&p, &q));
            match check_upward_invariance(&p, &q) {
                Ok(ok) => t.check(posets, ok, inst),
                Err(e) => t.error(inst(), e),
            }
        } else {
            let b = random_field(rng, 5);
            let q = random_family(rng, &b, 5);
            let inst = || format!("atoms {:?} Q = {}", b.atoms(), show(&b, &q));
            match check_upward_invariance(&b, &q) {
                Ok(ok) => t.check(fields, ok, inst),
                Err(e) => t.error(inst(), e),
            }
        }
    }
    t.finish()
}

/// Largest number of entries whose regular-open images share a point,
/// by brute force over index subsets.
fn meet_count(p: &FinitePoset, seq: &[usize]) -> usize {
    let opens: Vec<Subset> = seq
        .iter()
        .map(|&q| regularize(p, &Subset::from_indices(p.len(), p.below(q).iter())))
        .collect();
    (0..seq.len())
        .powerset()
        .filter(|idx| {
            let mut acc = Subset::full(p.len());
            for &i in idx {
                acc.intersect_with(&opens[i]);
            }
            !acc.is_empty()
        })
        .map(|idx| idx.len())
        .max()
        .unwrap_or(0)
}

fn suite_s3(rng: &mut ChaCha8Rng, count: usize) -> Vec<ItemReport> {
    let istar = "i* in P equals the largest meet count in the completion";
    let members = "completion members are exactly the regular open sets";
    let incompat = "incompatible iff images are disjoint";
    let dense = "completion embedding is complete and dense";
    let mut t = Tally::new(&[istar, members, incompat, dense]);
    for _ in 0..count {
        let p = poset_instance(rng, 7);
        let inst = describe_poset(&p);
        let c = match ro_completion(&p) {
            Ok(c) => c,
            Err(e) => {
                t.error(inst, e);
                continue;
            }
        };
        for n in 1..=5 {
            for seq in (0..p.len()).combinations_with_replacement(n) {
                let lhs = p.i_star(&seq);
                let rhs = meet_count(&p, &seq);
                t.check(istar, lhs == Ok(rhs), || format!("{inst} seq {seq:?}: {lhs:?} vs {rhs}"));
            }
        }
        let brute: std::collections::BTreeSet<Subset> = (0..p.len())
            .powerset()
            .map(|a| regularize(&p, &Subset::from_indices(p.len(), a)))
            .collect();
        let built: std::collections::BTreeSet<Subset> = c.field.members().map(|m| c.regular_open(&m)).collect();
        t.check(members, brute == built, || format!("{inst}: {} vs {} regular open sets", brute.len(), built.len()));
        for m in c.field.members() {
            let back = c.member_of(&c.regular_open(&m));
            t.check(members, back.as_ref() == Ok(&m), || format!("{inst}: member {m} round-trips to {back:?}"));
        }
        for (a, b) in (0..p.len()).tuple_combinations() {
            let disjoint = c.embedding.image(a).is_disjoint(c.embedding.image(b));
            t.check(incompat, p.compatible(a, b) != disjoint, || {
                format!("{inst}: {} and {}", p.label(a), p.label(b))
            });
        }
        t.check(dense, c.embedding.is_complete() && c.embedding.is_dense(), || inst.clone());
    }
    t.finish()
}

/// A family on `f` that is valid by construction: each condition's cell
/// starts as the singleton and receives random extra members as long as
/// its intersection number stays at least `1 - ε`.
pub fn random_valid_family<F: Forcing, R: Rng>(
    rng: &mut R,
    f: &F,
    eps_grid: &[Rational],
) -> Result<LinkedFamily<F::Elem>, crate::linkedness::LinkedError> {
    let conds = f.conditions();
    let mut cells = Vec::new();
    for p in &conds {
        for eps in eps_grid {
            let mut cell = vec![p.clone()];
            for _ in 0..2 {
                let Some(x) = conds.iter().choose(rng) else { break };
                let mut grown = cell.clone();
                grown.push(x.clone());
                if int_exact(f, &grown)?.value >= Rational::one() - eps {
                    cell = grown;
                }
            }
            cells.push((f.describe(p), eps.clone(), cell));
        }
    }
    LinkedFamily::new(conds.iter().map(|p| f.describe(p)).collect(), eps_grid.to_vec(), cells)
}

fn suite_i7(rng: &mut ChaCha8Rng, count: usize) -> Vec<ItemReport> {
    let forward = "forward transfer of a valid family is valid";
    let round = "pulling the forwarded family back is valid";
    let backward = "backward transfer of a valid completion family is valid";
    let equal = "forwarded cells keep their intersection number";
    let pulled = "pulled-back cells do not lose intersection number";
    let mut t = Tally::new(&[forward, round, backward, equal, pulled]);
    let grid = vec![ratio(1, 4), ratio(1, 2), ratio(3, 4)];
    for _ in 0..count {
        let p = poset_instance(rng, 6);
        let inst = describe_poset(&p);
        let result = (|| -> Result<(), Box<dyn std::error::Error>> {
            let c = ro_completion(&p)?;
            let fam = random_valid_family(rng, &p, &grid)?;
            let fwd = transfer_forward(&c.embedding, &fam)?;
            t.check(forward, verify_intersection_linked(&c.field, &fwd)?.holds(), || inst.clone());
            let back = transfer_backward(&c.embedding, &fwd)?;
            t.check(round, verify_intersection_linked(&p, &back)?.holds(), || inst.clone());
            for (i, _) in fam.index_set().iter().enumerate() {
                for e in 0..grid.len() {
                    let src = int_or_one(&p, fam.cell(i, e))?;
                    let dst = int_or_one(&c.field, fwd.cell(i, e))?;
                    t.check(equal, src == dst, || format!("{inst}: cell {i},{e} {src} vs {dst}"));
                }
            }
            let target_fam = random_valid_family(rng, &c.field, &grid)?;
            let pulled_fam = transfer_backward(&c.embedding, &target_fam)?;
            t.check(backward, verify_intersection_linked(&p, &pulled_fam)?.holds(), || inst.clone());
            let closed = crate::linkedness::upward_close_family(&c.field, &target_fam);
            for (i, _) in target_fam.index_set().iter().enumerate() {
                for e in 0..grid.len() {
                    let src = int_or_one(&c.field, closed.cell(i, e))?;
                    let dst = int_or_one(&p, pulled_fam.cell(i, e))?;
                    t.check(pulled, dst >= src, || format!("{inst}: cell {i},{e} {src} vs pulled {dst}"));
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            t.error(inst, e);
        }
    }
    t.finish()
}

/// Independent `m`-linked check: every subfamily of size `min(m, |S|)` has
/// a common lower bound found by scanning the poset.
fn m_linked_oracle(p: &FinitePoset, s: &[usize], m: usize) -> bool {
    s.iter()
        .copied()
        .combinations(m.min(s.len()))
        .all(|sub| (0..p.len()).any(|r| sub.iter().all(|&q| p.leq(r, q))))
}

fn suite_i15(rng: &mut ChaCha8Rng, count: usize) -> Vec<ItemReport> {
    let two = "cover for m = 2 is 2-linked and covers P";
    let three = "cover for m = 3 is 3-linked and covers P";
    let mut t = Tally::new(&[two, three]);
    let grid = vec![ratio(1, 5), ratio(1, 3), ratio(1, 2)];
    for _ in 0..count {
        let p = poset_instance(rng, 7);
        let inst = describe_poset(&p);
        let result = (|| -> Result<(), Box<dyn std::error::Error>> {
            let fam = random_valid_family(rng, &p, &grid)?;
            for (m, name) in [(2, two), (3, three)] {
                let cover = derive_m_linked_cover(&p, &fam, m)?;
                let linked = cover.sets.iter().all(|(_, s)| m_linked_oracle(&p, s, m));
                let covers = (0..p.len()).all(|x| cover.sets.iter().any(|(_, s)| s.contains(&x)));
                t.check(name, linked && covers, || format!("{inst}: {:?}", cover.sets));
            }
            Ok(())
        })();
        if let Err(e) = result {
            t.error(inst, e);
        }
    }
    t.finish()
}

fn suite_i70(rng: &mut ChaCha8Rng, count: usize) -> Vec<ItemReport> {
    let density = "atoms and the unit witness the density property";
    let cells = "every cell has int >= 1 - eps";
    let union = "cells at each eps cover every nonzero member";
    let replay = "integral argument replays on sampled sequences";
    let mut t = Tally::new(&[density, cells, union, replay]);
    let grid = vec![ratio(1, 4), ratio(1, 2), ratio(3, 4)];
    for _ in 0..count {
        let b = random_field(rng, 5);
        let m = random_measure(rng, &b);
        let inst = format!("atoms {:?} weights {:?}", b.atoms(), m.weights());
        let result = (|| -> Result<(), Box<dyn std::error::Error>> {
            let mut s: Vec<Subset> = b.atoms().to_vec();
            s.push(b.unit());
            s.extend(b.positive_members().choose_multiple(rng, 2));
            t.check(density, m.density_property_check(&s, &grid)?.holds(), || inst.clone());
            let fam = density_to_linked_family(&m, &s, grid.clone())?;
            for (idx, eps, cell) in fam.cells() {
                let v = int_exact(&b, cell)?.value;
                let need = Rational::one() - eps;
                t.check(cells, v >= need, || format!("{inst}: cell {idx},{eps} has int {v}"));
            }
            for e in 0..grid.len() {
                let n = fam.union_at(e).len();
                t.check(union, n == b.positive_members().count(), || format!("{inst}: eps index {e}"));
            }
            let sfam: Vec<Subset> = fam.index_set().iter().filter_map(|i| s.iter().find(|x| x.to_string() == *i).cloned()).collect();
            for (i, si) in sfam.iter().enumerate() {
                let rel = m.relative_measure(si)?;
                for (e, eps) in grid.iter().enumerate() {
                    let kb = kelley_lower_bound(&b, &rel, Rational::one() - eps)?;
                    let cell = fam.cell(i, e);
                    let len = rng.gen_range(1..=6);
                    let seq: Vec<Subset> = (0..len).filter_map(|_| cell.iter().choose(rng).cloned()).collect();
                    if seq.is_empty() {
                        continue;
                    }
                    let r = kb.replay(&seq)?;
                    t.check(replay, r.holds, || format!("{inst}: s = {si}, eps {eps}, seq {seq:?}"));
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            t.error(inst, e);
        }
    }
    t.finish()
}

fn suite_duality(rng: &mut ChaCha8Rng, count: usize) -> Vec<ItemReport> {
    let agree = "primal and dual certificates agree";
    let attained = "multiset search at the dual length attains the value";
    let embedding = "completion preserves int and pulled-back samples";
    let mut t = Tally::new(&[agree, attained, embedding]);
    for k in 0..count {
        let b = random_field(rng, 7);
        let q = random_family(rng, &b, 6);
        let inst = format!("atoms {:?} Q = {}", b.atoms(), show(&b, &q));
        let result = (|| -> Result<(), Box<dyn std::error::Error>> {
            let cert = int_exact(&b, &q)?;
            let ok = cert.primal_value() == cert.value && cert.dual_value() == cert.value;
            t.check(agree, ok, || inst.clone());
            let ub = int_upper_bound(&b, &q, cert.dual_witness.len())?;
            t.check(attained, ub == cert.value, || format!("{inst}: search {ub} vs {}", cert.value));
            if k % 4 == 0 {
                let p = random_poset(rng, 6, 0.4, true);
                let c = ro_completion(&p)?;
                let pq = random_family(rng, &p, 4);
                let samples: Vec<Vec<Subset>> = (0..3)
                    .map(|_| c.field.positive_members().choose_multiple(rng, 2))
                    .collect();
                let r = check_embedding_preservation(&c.embedding, &pq, &samples)?;
                t.check(embedding, r.holds(), || describe_poset(&p));
            }
            Ok(())
        })();
        if let Err(e) = result {
            t.error(inst, e);
        }
    }
    t.finish()
}
