//! Acceptance gate: each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use intnum::algebra::{ro_completion, FieldOfSets};
use intnum::etree::{lemma_v50_check, norm_at_least, norm_value, paper_constants, GrowthProfile, NormValue};
use intnum::intersection::{
    check_embedding_preservation, int_exact, int_upper_bound, kelley_lower_bound, IntersectionCertificate,
};
use intnum::linkedness::{
    density_to_linked_family, derive_m_linked_cover, transfer_backward, transfer_forward, verify_intersection_linked,
};
use intnum::measure::Fam;
use intnum::order::{FinitePoset, Forcing};
use intnum::random::{random_family, random_field, random_poset};
use intnum::set::Subset;
use intnum::verify::{random_valid_family, run_suite, Suite};
use intnum::{ratio, BigUint, Rational};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Largest number of entries sharing a ground point.
fn field_i_star_oracle(ground: usize, seq: &[Subset]) -> usize {
    (0..ground).map(|x| seq.iter().filter(|s| s.contains(x)).count()).max().unwrap_or(0)
}

/// Measure of a member, summing atom weights directly.
fn measure_oracle(m: &Fam, s: &Subset) -> Rational {
    m.algebra()
        .atoms()
        .iter()
        .zip(m.weights())
        .filter(|(a, _)| a.is_subset(s))
        .map(|(_, w)| w.clone())
        .sum()
}

fn check_certificate_independently(
    b: &FieldOfSets,
    cert: &IntersectionCertificate<Subset>,
) -> Result<(), String> {
    let primal = cert
        .family
        .iter()
        .map(|q| measure_oracle(&cert.primal_witness, q))
        .min()
        .ok_or("empty family")?;
    let seq = cert.dual_witness.entries();
    let dual = Rational::new(field_i_star_oracle(b.ground_size(), seq).into(), seq.len().into());
    ensure(cert.primal_witness.is_probability(), || "primal witness is not a probability".into())?;
    ensure(seq.iter().all(|x| cert.family.contains(x)), || "dual witness leaves Q".into())?;
    ensure(primal == cert.value && dual == cert.value, || {
        format!("value {} but primal {primal}, dual {dual}", cert.value)
    })
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let instances = 240;
    let mut longest = 0;
    for k in 0..instances {
        let b = random_field(&mut rng, 7);
        let q = random_family(&mut rng, &b, 6);
        let cert = int_exact(&b, &q).map_err(|e| format!("instance {k}: {e}"))?;
        check_certificate_independently(&b, &cert).map_err(|e| format!("instance {k}: {e}"))?;
        let n = cert.dual_witness.len();
        longest = longest.max(n);
        let ub = int_upper_bound(&b, &q, n).map_err(|e| e.to_string())?;
        ensure(ub == cert.value, || format!("instance {k}: search at length {n} gives {ub}, LP {}", cert.value))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{instances} random fields, longest dual witness {longest}, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    for k in 2..=6 {
        let a = FinitePoset::antichain(k);
        let q: Vec<usize> = (0..k).collect();
        let v = int_exact(&a, &q).map_err(|e| e.to_string())?.value;
        ensure(v == ratio(1, k as i64), || format!("k = {k}: int = {v}"))?;
        let b = FieldOfSets::powerset(k).map_err(|e| e.to_string())?;
        let atoms = b.atoms().to_vec();
        let v = int_exact(&b, &atoms).map_err(|e| e.to_string())?.value;
        ensure(v == ratio(1, k as i64), || format!("k = {k} atoms: int = {v}"))?;
    }
    Ok("int = 1/k for k = 2..6 in antichain posets and atom families".into())
}

fn criterion_3() -> Outcome {
    let report = run_suite(Suite::S8, 303, 520);
    let checks: usize = report.items.iter().map(|i| i.checked).sum();
    match report.items.iter().find(|i| !i.passed) {
        None => Ok(format!("8 items over {} random posets, {checks} comparisons", report.count)),
        Some(i) => Err(format!("{}: {}", i.name, i.counterexample.clone().unwrap_or_default())),
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let instances = 220;
    for k in 0..instances {
        let density = rng.gen_range(0.1..0.6);
        let p = random_poset(&mut rng, 8, density, true);
        let q = random_family(&mut rng, &p, 5);
        // Upward closure computed directly from the order relation.
        let closed: Vec<usize> = (0..p.len()).filter(|&x| q.iter().any(|&y| p.leq(y, x))).collect();
        let a = int_exact(&p, &q).map_err(|e| e.to_string())?.value;
        let b = int_exact(&p, &closed).map_err(|e| e.to_string())?.value;
        ensure(a == b, || format!("instance {k}: {a} vs {b}"))?;
    }
    Ok(format!("int(Q) = int(Q↑) on {instances} random (P, Q)"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let instances = 120;
    let mut sampled = 0;
    for k in 0..instances {
        let density = rng.gen_range(0.1..0.6);
        let p = random_poset(&mut rng, 7, density, true);
        let c = ro_completion(&p).map_err(|e| e.to_string())?;
        let q = random_family(&mut rng, &p, 5);
        for _ in 0..10 {
            let len = rng.gen_range(1..=6);
            let seq: Vec<usize> = (0..len).map(|_| q[rng.gen_range(0..q.len())]).collect();
            let images: Vec<Subset> = seq.iter().map(|&x| c.embedding.image(x).clone()).collect();
            let lhs = p.i_star(&seq).map_err(|e| e.to_string())?;
            let rhs = field_i_star_oracle(c.field.ground_size(), &images);
            ensure(lhs == rhs, || format!("instance {k}: i* {lhs} vs {rhs} for {seq:?}"))?;
        }
        let members: Vec<Subset> = c.field.positive_members().collect();
        let samples: Vec<Vec<Subset>> = (0..4)
            .map(|_| {
                let n = rng.gen_range(1..=members.len().min(4));
                let mut r: BTreeSet<Subset> = BTreeSet::new();
                while r.len() < n {
                    r.insert(members[rng.gen_range(0..members.len())].clone());
                }
                r.into_iter().collect()
            })
            .collect();
        sampled += samples.len();
        let report = check_embedding_preservation(&c.embedding, &q, &samples).map_err(|e| e.to_string())?;
        ensure(report.source_value == report.target_value, || {
            format!("instance {k}: {} vs {}", report.source_value, report.target_value)
        })?;
        ensure(report.holds(), || format!("instance {k}: preimage inequality fails"))?;
    }
    Ok(format!("{instances} random posets through their completion, {sampled} sampled R"))
}

fn criterion_6() -> Outcome {
    let b = FieldOfSets::powerset(2).map_err(|e| e.to_string())?;
    let m = Fam::counting(&b);
    let k = kelley_lower_bound(&b, &m, ratio(1, 2)).map_err(|e| e.to_string())?;
    let expected: BTreeSet<Subset> = [vec![0], vec![1], vec![0, 1]]
        .into_iter()
        .map(|s| Subset::from_indices(2, s))
        .collect();
    let got: BTreeSet<Subset> = k.family.iter().cloned().collect();
    ensure(got == expected, || format!("Q = {got:?}"))?;
    let v = k.exact_value().map_err(|e| e.to_string())?;
    ensure(v == ratio(1, 2), || format!("int = {v}"))?;
    let replay = k.replay(&k.family).map_err(|e| e.to_string())?;
    ensure(replay.holds, || format!("{replay:?}"))?;
    Ok("Q = {0},{1},{0,1} and int = 1/2 = delta".into())
}

fn pow2(k: u32) -> BigUint {
    BigUint::one() << k
}

fn criterion_7() -> Outcome {
    let c1 = paper_constants(1).map_err(|e| e.to_string())?;
    ensure(c1.rho == BigUint::from(16u8), || format!("rho(1) = {}", c1.rho))?;
    ensure(c1.pi == pow2(160), || "pi(1) != 2^160".into())?;
    ensure(c1.a == pow2(480), || "a(1) != 2^480".into())?;
    ensure(c1.m == pow2(960), || "M(1) != 2^960".into())?;
    let p = GrowthProfile::Paper;
    let mu = norm_value(&p, 0, &BigUint::from(12u8)).map_err(|e| e.to_string())?;
    ensure(matches!(&mu, NormValue::Finite { exact: Some(v), .. } if *v == ratio(1, 1)), || format!("{mu:?}"))?;
    let at14 = norm_at_least(&p, 0, &BigUint::from(14u8), &ratio(4, 3)).map_err(|e| e.to_string())?;
    let at13 = norm_at_least(&p, 0, &BigUint::from(13u8), &ratio(4, 3)).map_err(|e| e.to_string())?;
    ensure(at14 && !at13, || format!("threshold 4/3: n=14 {at14}, n=13 {at13}"))?;
    let r = lemma_v50_check(&p, 0).map_err(|e| e.to_string())?;
    ensure(r.holds() && r.exhaustive && r.exact + r.approximate == 17, || format!("{r:?}"))?;
    Ok(format!(
        "rho(1)=16, pi(1)=2^160, a(1)=2^480, M(1)=2^960, mu_0(12)=1, thresholds ok, identity on 17 counts ({} exact)",
        r.exact
    ))
}

fn criterion_8() -> Outcome {
    let p = GrowthProfile::Paper;
    let m = pow2(960);
    let keep1 = norm_at_least(&p, 1, &(&m - 1u8), &ratio(2, 1)).map_err(|e| e.to_string())?;
    let keep2 = norm_at_least(&p, 1, &(&m - 2u8), &ratio(2, 1)).map_err(|e| e.to_string())?;
    ensure(keep1 && !keep2, || format!("M-1: {keep1}, M-2: {keep2}"))?;
    ensure(m == pow2(480).pow(2), || "M(1) != a(1)^2".into())?;
    Ok("M(1)-1 children meet threshold 2, M(1)-2 do not".into())
}

fn criterion_9() -> Outcome {
    let b = FieldOfSets::powerset(3).map_err(|e| e.to_string())?;
    let m = Fam::counting(&b);
    let mut s = b.atoms().to_vec();
    s.push(b.unit());
    let grid = vec![ratio(1, 4), ratio(1, 2), ratio(3, 4)];
    let fam = density_to_linked_family(&m, &s, grid).map_err(|e| e.to_string())?;
    let mut cells = 0;
    for (idx, eps, cell) in fam.cells() {
        let cert = int_exact(&b, cell).map_err(|e| e.to_string())?;
        check_certificate_independently(&b, &cert).map_err(|e| format!("cell {idx},{eps}: {e}"))?;
        let need = Rational::one() - eps;
        ensure(cert.value >= need, || format!("cell {idx},{eps}: int {} < {need}", cert.value))?;
        cells += 1;
    }
    ensure(cells == 12, || format!("{cells} cells"))?;
    Ok(format!("{cells} cells, each with int >= 1 - eps by exact LP"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let grid = vec![ratio(1, 5), ratio(1, 3), ratio(1, 2), ratio(3, 4)];
    let instances = 60;
    for k in 0..instances {
        let density = rng.gen_range(0.1..0.6);
        let p = random_poset(&mut rng, 6, density, true);
        let c = ro_completion(&p).map_err(|e| e.to_string())?;
        let fam = random_valid_family(&mut rng, &p, &grid).map_err(|e| e.to_string())?;
        let holds = |v: Result<intnum::linkedness::LinkedVerdict, _>| v.map(|v| v.holds()).unwrap_or(false);
        ensure(holds(verify_intersection_linked(&p, &fam)), || format!("instance {k}: source family"))?;
        let fwd = transfer_forward(&c.embedding, &fam).map_err(|e| e.to_string())?;
        ensure(holds(verify_intersection_linked(&c.field, &fwd)), || format!("instance {k}: forward"))?;
        let target = random_valid_family(&mut rng, &c.field, &grid).map_err(|e| e.to_string())?;
        let back = transfer_backward(&c.embedding, &target).map_err(|e| e.to_string())?;
        ensure(holds(verify_intersection_linked(&p, &back)), || format!("instance {k}: backward"))?;
        for m in [2, 3] {
            let cover = derive_m_linked_cover(&p, &fam, m).map_err(|e| format!("instance {k}, m = {m}: {e}"))?;
            for (_, set) in &cover.sets {
                ensure(p.is_m_linked(set, m), || format!("instance {k}: set not {m}-linked"))?;
            }
            let covered: BTreeSet<usize> = cover.sets.iter().flat_map(|(_, s)| s.iter().copied()).collect();
            ensure(covered.len() == p.len(), || format!("instance {k}: cover misses elements"))?;
        }
    }
    Ok(format!("{instances} random posets, both transfer directions, covers for m = 2, 3"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("duality certificates on random fields", criterion_1),
        ("antichain law", criterion_2),
        ("basic intersection-number facts", criterion_3),
        ("upward invariance", criterion_4),
        ("preservation through the completion", criterion_5),
        ("measure lower bound attained", criterion_6),
        ("tree constants and level-0 norms", criterion_7),
        ("boundary norm at level 1", criterion_8),
        ("linked family from the density property", criterion_9),
        ("transfer and m-linked covers", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
