//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use foxprim::cli;
use foxprim::delta::{
    classify_delta_primitive_f2, delta_primitive_m2, delta_primitive_necessary, odd_rank_obstruction, project_to_metabelian,
    weight2_matrix, CommutatorProductSpec, DeltaM2,
};
use foxprim::fox::{chain_rule_check, derivative_row_identity_check, double_jacobian, left_derivatives, linearized_matrix, right_derivatives};
use foxprim::groupring::{Exponents, LaurentElement, Ring, RingElement, RingMatrix};
use foxprim::maps::{is_automorphism, is_monomorphism, orbit_violation_witness, same_orbit, Endomorphism, OrbitOutcome};
use foxprim::primitivity::{cmz_necessary_condition, enumerate_primitives_f2, is_primitive};
use foxprim::words::{parse_unranked, random_word, Rank, ReducedWords, Word};

const SEED: u64 = 20_240_601;

fn r(n: usize) -> Rank {
    Rank::new(n).unwrap()
}

fn w(s: &str) -> Word {
    parse_unranked(s).unwrap()
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn x_minus_one(i: usize) -> RingElement {
    RingElement::from_word(Word::gen(i)).ring_sub(&RingElement::one())
}

fn random_endomorphism(rng: &mut ChaCha8Rng, rank: Rank, max_len: usize) -> Endomorphism {
    let images = (0..rank.get()).map(|_| random_word(rng, rank, max_len)).collect();
    Endomorphism::new(rank, images).unwrap()
}

fn elementary_nielsen(rng: &mut ChaCha8Rng, rank: Rank) -> Endomorphism {
    let n = rank.get();
    let mut images: Vec<Word> = (1..=n).map(Word::gen).collect();
    let i = rng.gen_range(0..n);
    let j = (i + rng.gen_range(1..n)) % n;
    match rng.gen_range(0..5) {
        0 => images[i] = images[i].multiply(&Word::gen(j + 1)),
        1 => images[i] = images[i].multiply(&Word::gen(j + 1).inverse()),
        2 => images[i] = Word::gen(j + 1).multiply(&images[i]),
        3 => images[i] = images[i].inverse(),
        _ => images.swap(i, j),
    }
    Endomorphism::new(rank, images).unwrap()
}

fn random_automorphism(rng: &mut ChaCha8Rng, rank: Rank, steps: usize) -> Endomorphism {
    (0..steps).fold(Endomorphism::identity(rank), |acc, _| elementary_nielsen(rng, rank).compose(&acc).unwrap())
}

/// Element of `F_n'`: a word times the inverse of a shuffle of its letters.
fn random_derived(rng: &mut ChaCha8Rng, rank: Rank, half: usize) -> Word {
    let a = random_word(rng, rank, half);
    let mut letters = a.letters().to_vec();
    for k in (1..letters.len()).rev() {
        letters.swap(k, rng.gen_range(0..=k));
    }
    a.multiply(&Word::from_letters(letters).inverse())
}

fn criterion_1(rng: &mut ChaCha8Rng) -> Outcome {
    let mut checked = 0;
    for n in [2, 4] {
        let rank = r(n);
        for _ in 0..1000 {
            let x = random_word(rng, rank, 20);
            let a = RingElement::from_word(x.clone());
            let target = a.ring_sub(&RingElement::constant(a.augmentation()));
            let left = left_derivatives(&a, rank).unwrap();
            let right = right_derivatives(&a, rank).unwrap();
            let mut sl = RingElement::zero();
            let mut sr = RingElement::zero();
            for i in 1..=n {
                sl = sl.ring_add(&left.get(i).ring_mul(&x_minus_one(i)));
                sr = sr.ring_add(&x_minus_one(i).ring_mul(right.get(i)));
            }
            if sl != target || sr != target {
                return outcome(false, format!("identity fails for {x} in rank {n}"));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} words, both identities exact"))
}

fn criterion_2(rng: &mut ChaCha8Rng) -> Outcome {
    let mut checked = 0;
    for n in [2, 3] {
        for _ in 0..250 {
            let phi = random_endomorphism(rng, r(n), 4);
            let u = random_word(rng, r(n), 8);
            if !chain_rule_check(&phi, &u) || !derivative_row_identity_check(&phi, &u) {
                return outcome(false, format!("fails for {phi} on {u}"));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} (map, word) pairs, chain rule and row identity exact"))
}

fn criterion_3() -> Outcome {
    let alpha = Endomorphism::parse("x1->x1*x3^-1; x2->x3*x2*x3^-1; x3->x3; x4->x4").unwrap();
    let u = w("x1 x2 x1^-1 x2^-1 x3 x4 x3^-1 x4^-1");
    let v = w("x1 x2 x1^-1 x2^-1 x2 x3 x2^-1 x3^-1 x3 x4 x3^-1 x4^-1");
    let image = alpha.apply(&u) == v;
    let aut = is_automorphism(&alpha);
    let orbit = match same_orbit(&u, &v, r(4), 1_000_000).unwrap() {
        OrbitOutcome::Same(cert) => cert.verify() && cert.to_automorphism().apply(&u) == v,
        _ => false,
    };
    outcome(image && aut && orbit, format!("image exact: {image}, automorphism: {aut}, same orbit with replayed certificate: {orbit}"))
}

fn criterion_4() -> Outcome {
    let rank = r(2);
    let e = |s: &str| RingElement::parse(s, rank).unwrap();
    let frozen =
        RingMatrix::from_rows(vec![vec![e("A - bA"), e("-A")], vec![e("1 - bAB + AB"), e("B - AB")]]).unwrap();
    let u = w("abAB");
    // the frozen table must satisfy d_i(u) - ε(d_i(u)) = Σ_j (x_j - 1) D[i][j]
    let left = left_derivatives(&RingElement::from_word(u.clone()), rank).unwrap();
    let oracle_ok = (0..2).all(|i| {
        let d = left.get(i + 1);
        let rebuilt = (0..2).fold(RingElement::zero(), |acc, j| acc.ring_add(&x_minus_one(j + 1).ring_mul(frozen.get(i, j))));
        rebuilt == d.ring_sub(&RingElement::constant(d.augmentation()))
    });
    let computed = double_jacobian(&u, rank).unwrap();
    let det = computed.abelianize().det().unwrap();
    let det_ok = det == LaurentElement::monomial(vec![-1, -1], 1);
    outcome(
        computed == frozen && oracle_ok && det_ok,
        format!("table matches: {}, oracle identities: {oracle_ok}, abelianized det {det}", computed == frozen),
    )
}

fn criterion_5(rng: &mut ChaCha8Rng) -> Outcome {
    let mut count = 0;
    for n in [3, 5] {
        let rank = r(n);
        let pairs = n * (n - 1) / 2;
        for k in 0..400 {
            let x = if k < 200 {
                let spec = CommutatorProductSpec::new(rank, (0..pairs).map(|_| rng.gen_range(-3..=3)).collect()).unwrap();
                let wm = weight2_matrix(&spec);
                if !wm.is_antisymmetric_zero_diagonal() || wm.det().unwrap() != BigInt::from(0) {
                    return outcome(false, format!("weight-2 matrix fails for {spec:?}"));
                }
                spec.word()
            } else {
                let x = random_derived(rng, rank, 8);
                assert!(x.len() <= 16);
                x
            };
            let a = linearized_matrix(&x, rank).unwrap();
            let det_zero = a.det().unwrap() == BigInt::from(0);
            if !a.is_antisymmetric_zero_diagonal() || !det_zero || !odd_rank_obstruction(&x, rank).unwrap() {
                return outcome(false, format!("rank {n}: {x} has linearized matrix {a}"));
            }
            count += 1;
        }
    }
    let even: Vec<String> = [2, 4, 6]
        .iter()
        .map(|&n| weight2_matrix(&CommutatorProductSpec::symplectic(r(n))).det().unwrap().to_string())
        .collect();
    let even_ok = even.iter().all(|d| d == "1");
    outcome(even_ok, format!("{count} odd-rank elements singular and antisymmetric; u_2m determinants for n=2,4,6: {}", even.join(", ")))
}

fn criterion_6(rng: &mut ChaCha8Rng) -> Outcome {
    let rank = r(2);
    let c = w("abAB");
    for k in 0..120 {
        let g = random_word(rng, rank, 8);
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let h = c.pow(sign).conjugate_by(&g);
        let got = delta_primitive_m2(&h, rank).unwrap();
        let ok = match &got {
            DeltaM2::DeltaPrimitive { sign: s, conjugator } => {
                let rebuilt = c.pow(*s).conjugate_by(&Exponents::new(conjugator.clone()).to_word());
                *s == sign
                    && *conjugator == g.abelianization(rank)
                    && project_to_metabelian(&rebuilt, rank).unwrap() == project_to_metabelian(&h, rank).unwrap()
            }
            _ => false,
        };
        if !ok {
            return outcome(false, format!("conjugate by {g} with sign {sign}: {got:?}"));
        }
    }
    for k in 2..=5 {
        if delta_primitive_m2(&c.pow(k), rank).unwrap() != DeltaM2::NotDeltaPrimitive {
            return outcome(false, format!("[x1,x2]^{k} accepted"));
        }
    }
    // products of conjugates with quotient q = Σ s_i x^{g_i}; keep q nonzero, non-unit
    let mut negatives = 0;
    while negatives < 120 {
        let terms = rng.gen_range(2..=4);
        let mut h = Word::identity();
        let mut q = LaurentElement::zero();
        for _ in 0..terms {
            let g = random_word(rng, rank, 4);
            let s: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
            h = h.multiply(&c.pow(s).conjugate_by(&g));
            q = q.ring_add(&LaurentElement::monomial(g.abelianization(rank), s));
        }
        let is_unit = q.num_terms() == 1 && q.terms().all(|(_, coeff)| coeff == &BigInt::from(1) || coeff == &BigInt::from(-1));
        if q.is_zero() || is_unit {
            continue;
        }
        if delta_primitive_m2(&h, rank).unwrap() != DeltaM2::NotDeltaPrimitive {
            return outcome(false, format!("{h} with quotient {q} accepted"));
        }
        negatives += 1;
    }
    outcome(true, format!("120 conjugates recovered with sign and monomial, powers 2..5 and {negatives} non-unit quotients rejected"))
}

fn criterion_7() -> Outcome {
    let rank = r(2);
    let expected: BTreeSet<Word> = ["abAB", "bABa", "ABab", "BabA", "baBA", "aBAb", "BAba", "AbaB"].iter().map(|s| w(s)).collect();
    let mut accepted = BTreeSet::new();
    let mut discrepancies = 0;
    let mut scanned = 0;
    for x in ReducedWords::new(rank, 10).filter(|x| !x.is_identity() && x.is_cyclically_reduced()) {
        scanned += 1;
        let f2 = classify_delta_primitive_f2(&x, rank).unwrap();
        if f2 {
            let m2 = matches!(delta_primitive_m2(&x, rank).unwrap(), DeltaM2::DeltaPrimitive { .. });
            if !delta_primitive_necessary(&x, rank).unwrap() || !m2 {
                return outcome(false, format!("{x} accepted but fails a consistency check"));
            }
            accepted.insert(x);
        } else if x.abelianization(rank) == [0, 0] && matches!(delta_primitive_m2(&x, rank).unwrap(), DeltaM2::DeltaPrimitive { .. }) {
            discrepancies += 1;
        }
    }
    outcome(
        accepted == expected,
        format!("{scanned} cyclically reduced words, accepted {} (expected 8), M2 discrepancies {discrepancies}", accepted.len()),
    )
}

fn totient(n: usize) -> usize {
    (1..=n).filter(|&k| num_integer::gcd(k, n) == 1).count()
}

fn criterion_8() -> Outcome {
    let rank = r(2);
    let mut by_len = [0usize; 15];
    let (comm, power) = (w("abAB"), w("aabb"));
    for p in enumerate_primitives_f2(14) {
        by_len[p.len()] += 1;
        if !cmz_necessary_condition(&p, rank).unwrap() {
            return outcome(false, format!("{p} violates the CMZ condition"));
        }
        if p.has_prefix(&comm) || p.has_prefix(&power) {
            return outcome(false, format!("{p} has a blocking prefix"));
        }
    }
    // one primitive conjugacy class per coprime pair and sign pattern, n rotations each
    let oracle_ok = (2..=14).all(|n| by_len[n] == 4 * n * totient(n));
    let total: usize = by_len.iter().sum();
    outcome(
        by_len[1] == 4 && by_len[1] + by_len[2] == 12 && oracle_ok,
        format!("{total} primitives up to length 14, counts at lengths 1, <=2: {}, {}; per-length counts match 4n*phi(n): {oracle_ok}", by_len[1], by_len[1] + by_len[2]),
    )
}

fn criterion_9(rng: &mut ChaCha8Rng) -> Outcome {
    let rank = r(2);
    let non_aut = [
        "x1->aa; x2->b",
        "x1->a; x2->bb",
        "x1->abAB; x2->b",
        "x1->abAB; x2->aBAb",
        "x1->a; x2->a",
        "x1->abab; x2->b",
        "x1->aaa; x2->b",
        "x1->aab; x2->abb",
        "x1->a; x2->bab",
        "x1->1; x2->b",
        "x1->ab; x2->ba",
        "x1->aabAB; x2->b",
    ];
    let u = w("a");
    for m in non_aut {
        let phi = Endomorphism::parse(m).unwrap();
        assert!(!is_automorphism(&phi));
        match orbit_violation_witness(&phi, &u, 8, 1_000_000).unwrap() {
            Some(v) if is_primitive(&v, rank).unwrap() && !is_primitive(&phi.apply(&v), rank).unwrap() => {}
            other => return outcome(false, format!("{m}: witness {other:?}")),
        }
    }
    let mut auts: Vec<Endomorphism> =
        ["x1->ab; x2->b", "x1->b; x2->a", "x1->A; x2->B"].iter().map(|m| Endomorphism::parse(m).unwrap()).collect();
    while auts.len() < 12 {
        auts.push(random_automorphism(rng, rank, 6));
    }
    for phi in &auts {
        if let Some(v) = orbit_violation_witness(phi, &u, 8, 1_000_000).unwrap() {
            return outcome(false, format!("automorphism {phi} has witness {v}"));
        }
    }
    outcome(true, format!("{} non-automorphisms refuted, {} automorphisms without witness at length 8", non_aut.len(), auts.len()))
}

fn criterion_10(rng: &mut ChaCha8Rng) -> Outcome {
    let mut count = 0;
    for k in 0..210 {
        let rank = r(2 + k % 3);
        let phi = random_automorphism(rng, rank, 1 + k % 8);
        let det = phi.abelianized_jacobian_det();
        if !is_automorphism(&phi) || !is_monomorphism(&phi) || det.is_unit().is_none() {
            return outcome(false, format!("{phi}: det {det}"));
        }
        count += 1;
    }
    let sq = Endomorphism::parse("x1->aa; x2->b").unwrap();
    let u2 = w("abAB");
    let fixture = is_monomorphism(&sq) && !is_automorphism(&sq) && sq.apply(&u2) != u2;
    outcome(fixture, format!("{count} Nielsen composites recognized; x1->x1^2 monomorphism, not automorphism, moves u2: {fixture}"))
}

fn criterion_11() -> Outcome {
    let run = || {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let args = ["foxprim", "--json", "--workers", "1", "--seed", "7", "prim", "block-search", "--rank", "3", "--cand-len", "4", "--max-len", "10"];
        let status = cli::run(args, &mut out, &mut err);
        (status, String::from_utf8(out).unwrap())
    };
    let (s1, a) = run();
    let (s2, b) = run();
    let report: serde_json::Value = match serde_json::from_str(a.trim()) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("report is not JSON: {e}")),
    };
    let short_ok = report["results"].as_array().unwrap().iter().all(|res| {
        let cand = parse_unranked(res["candidate"].as_str().unwrap()).unwrap();
        cand.len() > 2 || res["verdict"] == "extendable"
    });
    let recorded = report["seed"] == 7 && report["max_len"] == 10 && report["cand_len"] == 4 && report["rank"] == 3;
    outcome(
        s1 == 0 && s2 == 0 && a == b && short_ok && recorded,
        format!(
            "exit {s1}/{s2}, identical reports: {}, {} candidates, {} survivors, short candidates extendable: {short_ok}",
            a == b,
            report["candidates"],
            report["survivors"].as_array().map_or(0, Vec::len)
        ),
    )
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    // (criterion, time limit)
    let limits = [30, 60, 60, 1, 120, 60, 300, 600, 300, 120, 600];
    let mut failures = 0;
    for (idx, limit) in limits.iter().enumerate() {
        let start = Instant::now();
        let o = match idx + 1 {
            1 => criterion_1(&mut rng),
            2 => criterion_2(&mut rng),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(&mut rng),
            6 => criterion_6(&mut rng),
            7 => criterion_7(),
            8 => criterion_8(),
            9 => criterion_9(&mut rng),
            10 => criterion_10(&mut rng),
            _ => criterion_11(),
        };
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let passed = o.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "{} criterion {:>2}: {} [{:.2}s, limit {}s]",
            if passed { "PASS" } else { "FAIL" },
            idx + 1,
            o.detail,
            elapsed.as_secs_f64(),
            limit
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 11 acceptance criteria passed");
}
