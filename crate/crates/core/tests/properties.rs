use std::collections::{BTreeMap, BTreeSet};

use intnum::algebra::{is_regular_open, ro_completion, FieldOfSets};
use intnum::etree::{
    lemma_v50_check, norm_at_least, norm_value, CustomProfile, ECondition, GrowthProfile, NormValue, SuccessorSet,
};
use intnum::intersection::{int_exact, int_upper_bound};
use intnum::linkedness::{derive_m_linked_cover, upward_close_family, verify_intersection_linked};
use intnum::measure::SimpleFunction;
use intnum::order::{FinitePoset, Forcing};
use intnum::random::{random_family, random_field, random_measure, random_poset};
use intnum::verify::random_valid_family;
use intnum::set::Subset;
use intnum::{ratio, BigUint, Rational};
use num_traits::One;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn poset(seed: u64) -> (FinitePoset, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density = rng.gen_range(0.1..0.7);
    let p = random_poset(&mut rng, 7, density, true);
    (p, rng)
}

fn field(seed: u64) -> (FieldOfSets, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_field(&mut rng, 6);
    (f, rng)
}

/// Closure of the generators under complement and binary union, by iteration.
fn fixpoint_field(ground: usize, gens: &[Subset]) -> BTreeSet<Subset> {
    let mut all: BTreeSet<Subset> = gens.iter().cloned().collect();
    all.insert(Subset::empty(ground));
    loop {
        let mut next = all.clone();
        for a in &all {
            next.insert(a.complement());
            for b in &all {
                next.insert(a.union(b));
            }
        }
        if next.len() == all.len() {
            return all;
        }
        all = next;
    }
}

fn uniform_profile(m: u64, a: u64) -> GrowthProfile {
    GrowthProfile::Custom(CustomProfile::uniform(m, a).expect("valid level"))
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn order_implies_separative_order(seed in any::<u64>()) {
        let (p, _) = poset(seed);
        let n = p.len();
        for a in 0..n {
            prop_assert!(p.separative_leq(a, a));
            for b in 0..n {
                if p.leq(a, b) {
                    prop_assert!(p.separative_leq(a, b));
                }
                for c in 0..n {
                    if p.separative_leq(a, b) && p.separative_leq(b, c) {
                        prop_assert!(p.separative_leq(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn separative_bound_lies_below_everything(seed in any::<u64>()) {
        let (p, mut rng) = poset(seed);
        let x = rng.gen_range(0..p.len());
        let above: Vec<usize> = (0..p.len()).filter(|&y| p.separative_leq(x, y)).collect();
        let k = rng.gen_range(0..=above.len());
        let ps: Vec<usize> = above.choose_multiple(&mut rng, k).copied().collect();
        let r = p.separative_bound(x, &ps);
        prop_assert!(r.is_some());
        let r = r.unwrap();
        prop_assert!(p.leq(r, x));
        for &q in &ps {
            prop_assert!(p.leq(r, q));
        }
    }

    #[test]
    fn linkedness_ladder(seed in any::<u64>()) {
        let (p, mut rng) = poset(seed);
        let q = random_family(&mut rng, &p, 5);
        if p.is_centered(&q) {
            for m in 2..=5 {
                prop_assert!(p.is_m_linked(&q, m));
            }
        }
        for m in 2..=5 {
            if p.is_m_linked(&q, m + 1) {
                prop_assert!(p.is_m_linked(&q, m));
            }
        }
        if q.len() >= 2 && p.is_antichain(&q) {
            prop_assert!(!p.is_m_linked(&q, 2));
        }
    }

    #[test]
    fn upward_closure_is_a_closure(seed in any::<u64>()) {
        let (p, mut rng) = poset(seed);
        let q = random_family(&mut rng, &p, 5);
        let c = Forcing::upward_closure(&p, &q);
        prop_assert!(q.iter().all(|x| c.contains(x)));
        prop_assert_eq!(Forcing::upward_closure(&p, &c), c.clone());
        for &x in &c {
            for y in 0..p.len() {
                if p.leq(x, y) {
                    prop_assert!(c.contains(&y));
                }
            }
        }
    }

    #[test]
    fn completion_matches_brute_force_regular_opens(seed in any::<u64>()) {
        let (p, _) = poset(seed);
        prop_assume!(p.len() <= 6);
        let c = ro_completion(&p).unwrap();
        let n = p.len();
        let brute: BTreeSet<Subset> = (0u64..1 << n)
            .map(|mask| Subset::from_indices(n, (0..n).filter(|i| mask >> i & 1 == 1)))
            .filter(|s| is_regular_open(&p, s))
            .collect();
        let got: BTreeSet<Subset> = c.field.members().map(|m| c.regular_open(&m)).collect();
        prop_assert_eq!(got, brute);
    }

    #[test]
    fn incompatible_iff_images_meet_in_zero(seed in any::<u64>()) {
        let (p, _) = poset(seed);
        let c = ro_completion(&p).unwrap();
        for a in 0..p.len() {
            for b in 0..p.len() {
                let meet = c.embedding.image(a).intersection(c.embedding.image(b));
                prop_assert_eq!(p.compatible(a, b), !meet.is_empty());
            }
        }
    }

    #[test]
    fn generated_field_is_the_boolean_closure(ground in 1usize..7, masks in prop::collection::vec(any::<u8>(), 0..4)) {
        let gens: Vec<Subset> = masks
            .iter()
            .map(|m| Subset::from_indices(ground, (0..ground).filter(|i| m >> i & 1 == 1)))
            .collect();
        let f = FieldOfSets::from_generators(ground, &gens, 63).unwrap();
        let got: BTreeSet<Subset> = f.members().collect();
        prop_assert_eq!(got, fixpoint_field(ground, &gens));
    }

    #[test]
    fn measure_is_additive_and_monotone(seed in any::<u64>()) {
        let (b, mut rng) = field(seed);
        let m = random_measure(&mut rng, &b);
        let members: Vec<Subset> = b.members().collect();
        for _ in 0..8 {
            let x = members.choose(&mut rng).unwrap();
            let y = members.choose(&mut rng).unwrap();
            let y_minus_x = y.difference(x);
            let lhs = m.measure_of(&x.union(&y_minus_x)).unwrap();
            let rhs = m.measure_of(x).unwrap() + m.measure_of(&y_minus_x).unwrap();
            prop_assert_eq!(lhs, rhs);
            if x.is_subset(y) {
                prop_assert!(m.measure_of(x).unwrap() <= m.measure_of(y).unwrap());
            }
        }
    }

    #[test]
    fn integral_is_linear(seed in any::<u64>(), c in 0i64..5, d in 1i64..5) {
        let (b, mut rng) = field(seed);
        let m = random_measure(&mut rng, &b);
        let draw = |rng: &mut ChaCha8Rng| {
            let values = (0..b.atom_count()).map(|_| ratio(rng.gen_range(-4..5), rng.gen_range(1..4))).collect();
            SimpleFunction::new(b.clone(), values).unwrap()
        };
        let f = draw(&mut rng);
        let g = draw(&mut rng);
        let k = ratio(c, d);
        let lhs = f.scale(&k).add(&g).unwrap().integrate(&m).unwrap();
        let rhs = k * f.integrate(&m).unwrap() + g.integrate(&m).unwrap();
        prop_assert_eq!(lhs, rhs);
        let one = SimpleFunction::constant(&b, Rational::one());
        prop_assert_eq!(one.integrate(&m).unwrap(), Rational::one());
    }

    #[test]
    fn duality_gap_is_zero_on_fields(seed in any::<u64>()) {
        let (b, mut rng) = field(seed);
        let q = random_family(&mut rng, &b, 5);
        let cert = int_exact(&b, &q).unwrap();
        prop_assert_eq!(cert.primal_value(), cert.value.clone());
        prop_assert_eq!(cert.dual_value(), cert.value.clone());
    }

    #[test]
    fn duality_gap_is_zero_on_posets(seed in any::<u64>()) {
        let (p, mut rng) = poset(seed);
        let q = random_family(&mut rng, &p, 5);
        let cert = int_exact(&p, &q).unwrap();
        prop_assert_eq!(cert.primal_value(), cert.value.clone());
        prop_assert_eq!(cert.dual_value(), cert.value.clone());
        let n = q.len() as i64;
        prop_assert!(cert.value >= ratio(1, n) && cert.value <= Rational::one());
        prop_assert_eq!(cert.value == Rational::one(), p.is_centered(&q));
    }

    #[test]
    fn i_star_is_bounded_and_permutation_invariant(seed in any::<u64>()) {
        let (p, mut rng) = poset(seed);
        let q = random_family(&mut rng, &p, 5);
        let len = rng.gen_range(1..=7);
        let mut seq: Vec<usize> = (0..len).map(|_| *q.choose(&mut rng).unwrap()).collect();
        let v = p.i_star(&seq).unwrap();
        prop_assert!(v >= 1 && v <= len);
        seq.shuffle(&mut rng);
        prop_assert_eq!(p.i_star(&seq).unwrap(), v);
    }

    #[test]
    fn upper_bound_dominates_and_improves(seed in any::<u64>()) {
        let (p, mut rng) = poset(seed);
        let q = random_family(&mut rng, &p, 4);
        let v = int_exact(&p, &q).unwrap().value;
        let mut prev: Option<Rational> = None;
        for n in 1..=4 {
            let ub = int_upper_bound(&p, &q, n).unwrap();
            prop_assert!(ub >= v);
            if let Some(prev) = prev {
                prop_assert!(ub <= prev);
            }
            prev = Some(ub);
        }
    }

    #[test]
    fn norm_is_monotone_in_count(m in 2u64..40, a in 2u64..6, t_num in 1i64..8, t_den in 1i64..4) {
        let profile = uniform_profile(m, a);
        let t = ratio(t_num, t_den);
        let mut previous = false;
        for n in 0..=m {
            let now = norm_at_least(&profile, 0, &big(n), &t).unwrap();
            prop_assert!(!previous || now);
            previous = now;
        }
        prop_assert!(norm_at_least(&profile, 0, &big(m), &t).unwrap());
    }

    #[test]
    fn norm_decision_agrees_with_exact_values(m in 2u64..60, a in 2u64..6, n_frac in 0.0f64..1.0, t_num in 1i64..8, t_den in 1i64..4) {
        let profile = uniform_profile(m, a);
        let n = ((m as f64) * n_frac) as u64;
        let t = ratio(t_num, t_den);
        let decided = norm_at_least(&profile, 0, &big(n), &t).unwrap();
        match norm_value(&profile, 0, &big(n)).unwrap() {
            NormValue::Infinite => prop_assert!(decided),
            NormValue::Finite { exact: Some(q), .. } => prop_assert_eq!(decided, q >= t),
            NormValue::Finite { approx, exact: None } => {
                let tf = t_num as f64 / t_den as f64;
                if (approx - tf).abs() > 1e-9 {
                    prop_assert_eq!(decided, approx >= tf);
                }
            }
        }
    }

    #[test]
    fn cardinality_identity_holds(m in 2u64..300, a in 2u64..9) {
        let report = lemma_v50_check(&uniform_profile(m, a), 0).unwrap();
        prop_assert!(report.exhaustive);
        prop_assert!(report.holds(), "failures {:?}", report.failures);
    }

    #[test]
    fn shrinking_successor_sets_is_antitone(keep in prop::collection::btree_set(0u64..16, 2..=16), drop in 0usize..16) {
        let profile = uniform_profile(16, 4);
        let trunk = vec![big(1)];
        let wide: Vec<BigUint> = keep.iter().map(|&k| big(k)).collect();
        let mut narrow = wide.clone();
        if narrow.len() > 2 {
            narrow.remove(drop % narrow.len());
        }
        let build = |kept: Vec<BigUint>| {
            let nodes = BTreeMap::from([(trunk.clone(), SuccessorSet::Explicit(kept))]);
            ECondition::new(profile.clone(), trunk.clone(), nodes, 2).unwrap()
        };
        let (w, n) = (build(wide), build(narrow));
        if n.is_condition().unwrap() {
            prop_assert!(w.is_condition().unwrap());
        }
        prop_assert!(n.leb_ratio().unwrap().ratio <= w.leb_ratio().unwrap().ratio);
    }

    #[test]
    fn extending_the_trunk_keeps_a_condition(excluded in prop::collection::btree_set(0u64..16, 0..3), depth in 1usize..5) {
        // Excluding at most two of sixteen children keeps the norm above 1 + 1/1.
        let profile = uniform_profile(16, 2);
        let trunk: Vec<BigUint> = (0..depth).map(|_| big(0)).collect();
        let mut excl: Vec<BigUint> = excluded.iter().map(|&k| big(k)).collect();
        excl.retain(|k| *k != big(0));
        let nodes = BTreeMap::from([(trunk.clone(), SuccessorSet::Cofinite { total: big(16), excluded: excl })]);
        let c = ECondition::new(profile, trunk, nodes, depth + 1).unwrap();
        prop_assume!(c.is_condition().unwrap());
        let d = c.restrict_to_child(big(0)).unwrap();
        prop_assert!(d.is_condition().unwrap());
        prop_assert!(d.trunk().starts_with(c.trunk()));
    }

    #[test]
    fn extension_lands_in_the_loss_domain(den in 3i64..12) {
        let c = ECondition::full_tree(uniform_profile(8, 2));
        let eps = ratio(1, den);
        let d = c.extend_into_loss_domain(Some(&eps)).unwrap();
        let loss = d.loss_of().unwrap();
        prop_assert!(matches!(loss, Some(ref l) if *l <= eps));
        prop_assert!(d.trunk().len() >= 3 * 3 + 1);
    }

    #[test]
    fn closing_cells_upward_keeps_the_verdict(seed in any::<u64>()) {
        let (p, mut rng) = poset(seed);
        let grid = vec![ratio(1, 5), ratio(1, 3), ratio(1, 2)];
        let fam = random_valid_family(&mut rng, &p, &grid).unwrap();
        let verdict = verify_intersection_linked(&p, &fam).unwrap();
        prop_assert!(verdict.holds());
        let closed = upward_close_family(&p, &fam);
        prop_assert!(verify_intersection_linked(&p, &closed).unwrap().holds());
    }

    #[test]
    fn derived_covers_are_m_linked_and_dense(seed in any::<u64>(), m in 1usize..4) {
        let (p, mut rng) = poset(seed);
        let grid = vec![ratio(1, 6), ratio(1, 3)];
        let fam = random_valid_family(&mut rng, &p, &grid).unwrap();
        let cover = derive_m_linked_cover(&p, &fam, m).unwrap();
        for (_, set) in &cover.sets {
            prop_assert!(set.is_empty() || p.is_m_linked(set, m));
        }
        for x in 0..p.len() {
            prop_assert!(cover.sets.iter().any(|(_, s)| s.contains(&x)));
        }
    }
}
