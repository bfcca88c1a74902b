//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line with its runtime. Every criterion states its own instance
//! counts and tolerances; a failure here is a release blocker.

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde_json::{json, Value};

use refined_stark::darmon::{self, DarmonCase};
use refined_stark::gmodlat::{
    check_propnorm, check_propnorm_r0, dual_basis, explore_phiconj, random_lattice,
    random_subgroup, subsets, thminj_check, Evaluator, FixedPart, NormDescentSetup, WedgeElement,
};
use refined_stark::groupring::{
    kolyvagin_derivative, norm_element, project_to_quotient, EqAugIso, FiniteAbelianGroup,
    GroupRingElement, Subgroup,
};
use refined_stark::lfun::verify_lemma_compute;
use refined_stark::numberfield::QuadField;
use refined_stark::stark::{
    verdict_of, verify_norm_relation_rank1, verify_stark_rank1, verify_unramified_case,
    UnramifiedInstance,
};
use refined_stark::{cli, report};

fn finish(name: &str, started: Instant, pass: bool) {
    let secs = started.elapsed().as_secs_f64();
    println!(
        "[acceptance] {name}: {} ({secs:.2}s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name} failed after {secs:.2}s");
}

/// Abelian groups of order at most 24, as invariant-factor lists.
fn group_pool() -> Vec<Vec<u64>> {
    vec![
        vec![2],
        vec![3],
        vec![4],
        vec![5],
        vec![6],
        vec![8],
        vec![2, 2],
        vec![2, 4],
        vec![2, 6],
        vec![3, 3],
        vec![2, 2, 2],
        vec![12],
        vec![2, 10],
        vec![24],
        vec![2, 12],
        vec![2, 2, 6],
    ]
}

fn small_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<BigRational> {
    (0..n)
        .map(|_| BigRational::from(BigInt::from(rng.gen_range(-3i64..4))))
        .collect()
}

/// Criterion 1: the five exact algebra identities, 200 randomized instances
/// each over groups of order <= 24, module rank <= 3, degree d <= 3.
#[test]
fn criterion_1_algebra_identities() {
    let started = Instant::now();
    let pool = group_pool();
    let mut rng = ChaCha12Rng::seed_from_u64(2024);

    // (a) descended-evaluator identity: Phi(m) = Phi^H(N_H^r m)
    let mut done = 0;
    while done < 200 {
        let g = FiniteAbelianGroup::new(pool[rng.gen_range(0..pool.len())].clone());
        let rank = rng.gen_range(1..=3);
        let m = random_lattice(&g, rank, &mut rng);
        let h = random_subgroup(&g, &mut rng);
        let fp = FixedPart::new(&m, &h).expect("fixed part");
        let r_deg = rng.gen_range(1..=rank.min(2));
        let duals = dual_basis(&m);
        let norm = norm_element(&g, &h);
        let vectors: Vec<Vec<BigRational>> =
            (0..r_deg).map(|_| small_vec(&mut rng, rank)).collect();
        let w = WedgeElement::from_vectors(&m, vectors);
        let mut nw_vectors: Vec<Vec<BigRational>> = Vec::new();
        for (_, vs) in &w.terms {
            for v in vs {
                nw_vectors.push(m.act_ring(&norm, v));
            }
        }
        let nw = WedgeElement::from_vectors(&m, nw_vectors);
        let nw_fixed = fp.restrict_wedge(&nw).expect("norm lands in the fixed part");
        for j in subsets(rank, r_deg).iter().take(2) {
            let ev = Evaluator::new(j.iter().map(|&i| duals[i].clone()).collect());
            let lhs = project_to_quotient(&ev.evaluate(&w), &fp.quotient);
            let ev_h = Evaluator::new(j.iter().map(|&i| fp.descend(&duals[i])).collect());
            let rhs = ev_h.evaluate(&nw_fixed);
            assert_eq!(lhs, rhs, "descended-evaluator identity failed");
        }
        done += 1;
    }

    // (b) injection compatibility: i(N_H^r m) pairs like N_H m
    let mut done = 0;
    let mut attempts = 0;
    while done < 200 {
        attempts += 1;
        assert!(attempts < 5000, "could not build enough instances");
        let g = FiniteAbelianGroup::new(pool[rng.gen_range(0..pool.len())].clone());
        let rank = rng.gen_range(1..=3);
        let m = random_lattice(&g, rank, &mut rng);
        let h = random_subgroup(&g, &mut rng);
        let r_deg = rng.gen_range(1..=rank.min(2));
        let setup = match NormDescentSetup::new(&m, &h, r_deg, 0) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let norm = norm_element(&g, &h);
        let vectors: Vec<Vec<BigRational>> =
            (0..r_deg).map(|_| small_vec(&mut rng, rank)).collect();
        let w = WedgeElement::from_vectors(&m, vectors);
        let mut nw_vectors: Vec<Vec<BigRational>> = Vec::new();
        for (_, vs) in &w.terms {
            for v in vs {
                nw_vectors.push(m.act_ring(&norm, v));
            }
        }
        let nw = WedgeElement::from_vectors(&m, nw_vectors);
        let y = setup.fixed_part.restrict_wedge(&nw).expect("fixed");
        let iy = setup.canonical_injection(&y).expect("injection solvable");
        let nhm = w.scale_ring(&norm);
        assert_eq!(
            setup.rubin.pairing(&iy),
            setup.rubin.pairing(&nhm),
            "injection compatibility failed"
        );
        done += 1;
    }

    // (c) norm-descent identity in the proved range: r in {0,1} or d = 0
    let mut done = 0;
    let mut attempts = 0;
    while done < 200 {
        attempts += 1;
        assert!(attempts < 5000, "could not build enough instances");
        let g = FiniteAbelianGroup::new(pool[rng.gen_range(0..pool.len())].clone());
        let h = random_subgroup(&g, &mut rng);
        let rep = if rng.gen_bool(0.5) {
            let d = rng.gen_range(0..=3);
            check_propnorm_r0(&g, &h, d, 1, &mut rng).expect("degree-0 check")
        } else {
            let rank = rng.gen_range(1..=3);
            let m = random_lattice(&g, rank, &mut rng);
            let (r_deg, d) = if rng.gen_bool(0.5) {
                (1, rng.gen_range(0..=3))
            } else {
                (rng.gen_range(1..=rank.min(2)), 0)
            };
            let setup = match NormDescentSetup::new(&m, &h, r_deg, d) {
                Ok(s) => s,
                Err(_) => continue,
            };
            check_propnorm(&setup, 1, &mut rng).expect("descent check")
        };
        assert_eq!(rep.failed, 0, "norm-descent identity failed: {:?}", rep.counterexamples);
        done += 1;
    }

    // (d) injectivity of the descended pairing
    let mut done = 0;
    let mut attempts = 0;
    while done < 200 {
        attempts += 1;
        assert!(attempts < 5000, "could not build enough instances");
        let g = FiniteAbelianGroup::new(pool[rng.gen_range(0..pool.len())].clone());
        let rank = rng.gen_range(1..=3);
        let m = random_lattice(&g, rank, &mut rng);
        let h = random_subgroup(&g, &mut rng);
        let r_deg = rng.gen_range(1..=rank.min(2));
        let d = rng.gen_range(0..=2);
        let setup = match NormDescentSetup::new(&m, &h, r_deg, d) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let rep = thminj_check(&setup, 1, &mut rng).expect("injectivity check");
        assert_eq!(rep.failed, 0, "injectivity failed: {:?}", rep.counterexamples);
        done += 1;
    }

    // (e) graded augmentation isomorphism Z[G/H] (x) Q(H)^d = Q_H^d
    let mut done = 0;
    while done < 200 {
        let g = FiniteAbelianGroup::new(pool[rng.gen_range(0..pool.len())].clone());
        let h = random_subgroup(&g, &mut rng);
        let d = rng.gen_range(0..=3);
        EqAugIso::new(&g, &h, d).expect("graded augmentation isomorphism");
        done += 1;
    }

    finish("criterion 1 (algebra identities, 5 x 200 instances)", started, true);
}

/// Criterion 2: telescoping identity (gamma - 1) D = (ell - 1) - N for the
/// derivative operator, exactly, for every prime ell <= 50.
#[test]
fn criterion_2_derivative_telescoping() {
    let started = Instant::now();
    for ell in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let g = FiniteAbelianGroup::new(vec![ell - 1]);
        let d = kolyvagin_derivative(&g, &[(ell, g.gen(0))]).expect("derivative");
        let gamma = GroupRingElement::basis(&g, g.gen(0));
        let lhs = gamma.sub(&GroupRingElement::one(&g)).mul(&d);
        let full = Subgroup::full(&g);
        let rhs = GroupRingElement::one(&g)
            .scale(&BigRational::from(BigInt::from(ell - 1)))
            .sub(&norm_element(&g, &full));
        assert_eq!(lhs, rhs, "telescoping failed at ell = {ell}");
    }
    finish("criterion 2 (derivative telescoping, primes <= 50)", started, true);
}

/// Criterion 3: exact distribution/norm relation for smoothed cyclotomic
/// symbols across >= 10 (level, added prime) pairs.
#[test]
fn criterion_3_norm_relation() {
    let started = Instant::now();
    let pairs = [
        (5u64, 3u64),
        (5, 7),
        (7, 3),
        (12, 5),
        (15, 2),
        (12, 2),
        (9, 3),
        (5, 5),
        (8, 2),
        (7, 7),
        (11, 3),
        (13, 5),
    ];
    for (level, ell) in pairs {
        let rep = verify_norm_relation_rank1(level, ell, &[], None).expect("relation check");
        assert_eq!(verdict_of(&rep), "pass", "({level},{ell}): {rep}");
    }
    // smoothed variants
    for (level, ell, t) in [(5u64, 3u64, 7u64), (7, 3, 11)] {
        let rep = verify_norm_relation_rank1(level, ell, &[t], None).expect("relation check");
        assert_eq!(verdict_of(&rep), "pass", "({level},{ell},T={t}): {rep}");
    }
    finish("criterion 3 (norm relation, 14 pairs)", started, true);
}

/// Criterion 4: rank-1 Stark regulator identity to relative 1e-8 at 256-bit
/// precision for >= 5 cases across D in {5, 13, 17}.
#[test]
fn criterion_4_stark_rank1() {
    let started = Instant::now();
    let cases = [
        (5u64, 1u64, 7u64),
        (5, 11, 7),
        (13, 1, 7),
        (13, 5, 7),
        (17, 1, 7),
        (17, 3, 7),
    ];
    for (d, n, t) in cases {
        let rep = verify_stark_rank1(d, n, &[t], 256, 1e-8).expect("stark check");
        assert_eq!(verdict_of(&rep), "pass", "({d},{n}): {rep}");
    }
    finish("criterion 4 (rank-1 Stark identity, 6 cases)", started, true);
}

/// Criterion 5: regulator comparison identity to relative 1e-8 for >= 5
/// (D, n) cases, including cases with at least one inert prime.
#[test]
fn criterion_5_regulator_comparison() {
    let started = Instant::now();
    let cases = [(5u64, 3u64), (5, 7), (5, 11), (13, 5), (13, 7), (17, 13)];
    let mut with_inert = 0;
    for (d, n) in cases {
        let field = QuadField::new(d).expect("field");
        let r = verify_lemma_compute(&field, n, 256).expect("regulator comparison");
        assert!(r.pass && r.rel_err < 1e-8, "({d},{n}): rel_err = {}", r.rel_err);
        if r.nu_minus >= 1 {
            with_inert += 1;
        }
    }
    assert!(with_inert >= 1, "no case with an inert prime");
    finish("criterion 5 (regulator comparison, 6 cases)", started, true);
}

/// Criterion 6: exact unramified-tower oracle on >= 10 towers covering both
/// the rank-0 and rank-1 branches with 1 or 2 moved primes.
#[test]
fn criterion_6_unramified_towers() {
    let started = Instant::now();
    let towers: [(i64, Vec<u64>, Vec<u64>); 11] = [
        (-3, vec![2], vec![11]),
        (-4, vec![3], vec![11]),
        (-7, vec![3], vec![11]),
        (-8, vec![5], vec![7]),
        (-3, vec![2, 5], vec![11]),
        (-7, vec![3, 5], vec![11]),
        (-4, vec![3, 7], vec![11]),
        (5, vec![2], vec![7]),
        (13, vec![2], vec![7]),
        (17, vec![3], vec![7]),
        (5, vec![2, 3], vec![7]),
    ];
    for (disc, qs, t_set) in towers {
        let rep = verify_unramified_case(&UnramifiedInstance {
            disc,
            qs: qs.clone(),
            t_set,
            trials: 12,
        })
        .expect("oracle");
        assert_eq!(verdict_of(&rep), "pass", "disc {disc}, qs {qs:?}: {rep}");
    }
    finish("criterion 6 (unramified oracle, 11 towers)", started, true);
}

/// Criterion 7: odd-part descent (recursion and fixedness) for D = 5 with
/// n in {11, 22, 341}.
#[test]
fn criterion_7_descent() {
    let started = Instant::now();
    for n in [11u64, 22, 341] {
        let case = DarmonCase::new(5, n).expect("case");
        let rep = darmon::verify_propdes(&case, 40, 1).expect("descent");
        let v = rep["verdict"].as_str().unwrap_or("fail");
        assert_eq!(v, "pass", "(5,{n}): {rep}");
    }
    finish("criterion 7 (odd-part descent, D=5, n in {11,22,341})", started, true);
}

/// Criterion 8: headline class comparison passes on >= 5 non-degenerate
/// cases (comparison modulus m >= 3), with the wrong-class-number control
/// failing on every one (40 power-test primes), and the degenerate m = 1
/// case passing the archimedean variant to 1e-8.
#[test]
fn criterion_8_headline_identity() {
    let started = Instant::now();
    let cases = [(5u64, 11u64), (5, 29), (5, 31), (13, 23), (17, 13)];
    for (d, n) in cases {
        let case = DarmonCase::new(d, n).expect("case");
        assert!(case.m >= 3, "({d},{n}) is degenerate");
        let main = darmon::verify_mrthm(&case, 40, 1, 256, 1e-8).expect("headline");
        assert_eq!(
            main["verdict"].as_str().unwrap_or("fail"),
            "pass",
            "({d},{n}): {main}"
        );
        let control = darmon::verify_mrthm_mutated(&case, 40, 1, 256, 1e-8).expect("control");
        assert_eq!(
            control["verdict"].as_str().unwrap_or("pass"),
            "fail",
            "({d},{n}) mutated control did not fail: {control}"
        );
    }
    // degenerate modulus: nu_+ = 0 forces m = 1, archimedean-log variant
    let degenerate = DarmonCase::new(5, 2).expect("case");
    assert_eq!(degenerate.m, 1);
    let rep = darmon::verify_mrthm(&degenerate, 40, 1, 256, 1e-8).expect("archimedean variant");
    let v = rep["verdict"].as_str().unwrap_or("fail");
    assert!(v == "pass" || v == "trivial", "(5,2): {rep}");
    assert_eq!(rep["degenerate_modulus"], json!(true), "(5,2): {rep}");
    finish("criterion 8 (headline identity, 5 cases + controls + degenerate)", started, true);
}

/// Criterion 9: identical configs and seeds reproduce byte-identical report
/// bodies.
#[test]
fn criterion_9_determinism() {
    use clap::Parser;
    let started = Instant::now();
    let dir = std::env::temp_dir().join("rs-acceptance-determinism");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let cfg_path = dir.join("cases.json");
    std::fs::write(
        &cfg_path,
        serde_json::to_string(&json!([
            {"kind": "stark", "d": 5, "n": 11},
            {"kind": "lemma", "d": 5, "n": 11},
            {"kind": "t-family", "level": 55},
            {"kind": "algebra-property", "r": 1, "depth": 1, "instances": 20, "trials": 2},
            {"kind": "darmon", "d": 5, "n": 11}
        ]))
        .expect("config json"),
    )
    .expect("write config");
    let mut args = cli::Cli::try_parse_from(["refined-stark", "--seed", "7"]).expect("args");
    args.globals.config = Some(cfg_path);
    let (code_a, rep_a) = cli::run(&args);
    let (code_b, rep_b) = cli::run(&args);
    assert_eq!(code_a, 0, "first run: {rep_a}");
    assert_eq!(code_b, 0, "second run: {rep_b}");
    let body_a = report::body_string(&rep_a["body"]);
    let body_b = report::body_string(&rep_b["body"]);
    assert_eq!(body_a, body_b, "report bodies differ between identical runs");
    finish("criterion 9 (byte-identical report bodies)", started, true);
}

/// Criterion 10: descent-identity explorer outside the proved range (degree
/// 2, depth <= 2): 100 planted instances run to completion with every
/// verdict serialized; counterexamples are reproducible from the recorded
/// per-instance seed.
#[test]
fn criterion_10_explorer() {
    let started = Instant::now();
    let pool = group_pool();
    let mut records: Vec<Value> = Vec::new();
    let mut done = 0;
    let mut seed = 0u64;
    while done < 100 {
        seed += 1;
        assert!(seed < 5000, "could not build enough instances");
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let g = FiniteAbelianGroup::new(pool[rng.gen_range(0..pool.len())].clone());
        let rank = rng.gen_range(2..=3);
        let m = random_lattice(&g, rank, &mut rng);
        let h = random_subgroup(&g, &mut rng);
        let d = rng.gen_range(0..=2);
        let setup = match NormDescentSetup::new(&m, &h, 2, d) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let rep = explore_phiconj(&setup, 1, &mut rng).expect("explorer trial");
        records.push(json!({
            "seed": seed,
            "group": g.factors,
            "rank": rank,
            "depth": d,
            "passed": rep.passed,
            "failed": rep.failed,
            "skipped": rep.skipped,
            "counterexamples": rep.counterexamples,
        }));
        done += 1;
    }
    // every verdict serializes
    let serialized = serde_json::to_string(&records).expect("serialize verdicts");
    assert!(!serialized.is_empty());
    // any counterexample must be reproducible from its recorded seed
    for rec in &records {
        if rec["failed"].as_u64().unwrap_or(0) == 0 {
            continue;
        }
        let s = rec["seed"].as_u64().expect("seed recorded");
        let mut rng = ChaCha12Rng::seed_from_u64(s);
        let g = FiniteAbelianGroup::new(
            rec["group"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_u64().unwrap())
                .collect(),
        );
        let rank = rec["rank"].as_u64().unwrap() as usize;
        let m = random_lattice(&g, rank, &mut rng);
        let h = random_subgroup(&g, &mut rng);
        let d = rec["depth"].as_u64().unwrap() as usize;
        let setup = NormDescentSetup::new(&m, &h, 2, d).expect("setup reproduces");
        let rep = explore_phiconj(&setup, 1, &mut rng).expect("replay");
        assert_eq!(rep.failed, rec["failed"].as_u64().unwrap() as usize);
        assert_eq!(rep.counterexamples.len(), rec["counterexamples"].as_array().unwrap().len());
    }
    finish("criterion 10 (explorer, 100 planted instances)", started, true);
}

// keep Arc in scope for the group constructors above
#[allow(dead_code)]
fn _arc_marker(_: Arc<FiniteAbelianGroup>) {}
