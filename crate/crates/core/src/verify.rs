//! Self-contained check suite over the worked examples and the main
//! structural results at desk scale. Deterministic for a given seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::delta::{
    commutator_inverse, delta_primitive_m2, odd_rank_obstruction, symplectic_inverse, verify_inverse_certificate,
    weight2_matrix, CommutatorProductSpec, DeltaM2,
};
use crate::error::Result;
use crate::fox::double_jacobian;
use crate::groupring::{LaurentElement, RingElement, RingMatrix};
use crate::maps::{orbit_violation_witness, same_orbit, Endomorphism, OrbitOutcome, DEFAULT_BUDGET};
use crate::primitivity::{blocking_verdict, cmz_necessary_condition, enumerate_primitives_f2, BlockingVerdict};
use crate::words::{parse_unranked, random_word, random_word_of_length, Rank, Word};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn rank(n: usize) -> Rank {
    Rank::new(n).expect("valid rank")
}

fn word(s: &str) -> Word {
    parse_unranked(s).expect("fixture word")
}

/// The worked rank-4 example: `[x1,x2][x3,x4]` and `[x1,x2][x2,x3][x3,x4]`.
pub fn example_pair() -> (Endomorphism, Word, Word) {
    let alpha = Endomorphism::parse("x1->aC; x2->cbC; x3->c; x4->d").expect("fixture map");
    let u = word("abAB").multiply(&word("cdCD"));
    let v = word("abAB").multiply(&word("bcBC")).multiply(&word("cdCD"));
    (alpha, u, v)
}

/// Frozen table of `D_{[x1,x2]}`.
pub fn commutator_double_jacobian() -> RingMatrix {
    let e = |s: &str| RingElement::parse(s, rank(2)).expect("fixture element");
    RingMatrix::from_rows(vec![vec![e("A - bA"), e("-A")], vec![e("1 - bAB + AB"), e("B - AB")]]).expect("2x2")
}

fn check_example_pair() -> Result<CheckResult> {
    let (alpha, u, v) = example_pair();
    let image_ok = alpha.apply(&u) == v;
    let aut = alpha.is_automorphism();
    let orbit = same_orbit(&u, &v, rank(4), DEFAULT_BUDGET)?;
    let certified = matches!(&orbit, OrbitOutcome::Same(c) if c.verify());
    Ok(CheckResult {
        name: "rank-4 automorphic image",
        passed: image_ok && aut && certified,
        detail: format!("image matches: {image_ok}, automorphism: {aut}, orbit certificate: {certified}"),
    })
}

fn check_double_jacobian() -> Result<CheckResult> {
    let d = double_jacobian(&word("abAB"), rank(2))?;
    let table_ok = d == commutator_double_jacobian();
    let det = d.abelianize().det()?;
    let det_ok = det == LaurentElement::monomial(vec![-1, -1], 1);
    Ok(CheckResult {
        name: "double Jacobian of [x1,x2]",
        passed: table_ok && det_ok,
        detail: format!("table matches: {table_ok}, abelianized determinant {det}"),
    })
}

fn check_m2(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let c = word("abAB");
    let mut ok = 0;
    let mut bad = Vec::new();
    for k in 0..40 {
        let g = random_word(rng, rank(2), 8);
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let expected = DeltaM2::DeltaPrimitive { sign, conjugator: g.abelianization(rank(2)) };
        let got = delta_primitive_m2(&c.pow(sign).conjugate_by(&g), rank(2))?;
        if got == expected {
            ok += 1;
        } else {
            bad.push(g.to_string());
        }
    }
    let powers_ok = (2..=5).all(|k| delta_primitive_m2(&c.pow(k), rank(2)).ok() == Some(DeltaM2::NotDeltaPrimitive));
    Ok(CheckResult {
        name: "M2 decision",
        passed: bad.is_empty() && powers_ok,
        detail: format!("{ok}/40 conjugates recognized, powers 2..5 rejected: {powers_ok}"),
    })
}

fn check_odd_rank(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut tested = 0;
    for n in [3, 5] {
        let r = rank(n);
        let count = n * (n - 1) / 2;
        for _ in 0..25 {
            let exps = (0..count).map(|_| rand::Rng::gen_range(rng, -3..=3)).collect();
            let spec = CommutatorProductSpec::new(r, exps)?;
            odd_rank_obstruction(&spec.word(), r)?;
            let a = weight2_matrix(&spec);
            if !a.is_antisymmetric_zero_diagonal() || !num_traits::Zero::is_zero(&a.det()?) {
                return Ok(CheckResult { name: "odd-rank obstruction", passed: false, detail: format!("spec {spec:?}") });
            }
            // a random commutator of random words also lies in F_n'
            let x = random_word_of_length(rng, r, 4);
            let y = random_word_of_length(rng, r, 4);
            odd_rank_obstruction(&x.commutator(&y), r)?;
            tested += 2;
        }
    }
    let even_ok = [2, 4, 6].iter().all(|&n| {
        let det = weight2_matrix(&CommutatorProductSpec::symplectic(rank(n))).det();
        det.map(|d| d == num_bigint::BigInt::from(1)).unwrap_or(false)
    });
    Ok(CheckResult {
        name: "odd-rank obstruction",
        passed: even_ok,
        detail: format!("{tested} odd-rank elements singular, u_2m unimodular for n = 2, 4, 6: {even_ok}"),
    })
}

fn check_certificates() -> Result<CheckResult> {
    let inv2 = commutator_inverse();
    let ok2 = verify_inverse_certificate(&word("abAB"), &inv2, rank(2))?;
    let inv4 = symplectic_inverse(rank(4), &inv2)?;
    let ok4 = verify_inverse_certificate(&CommutatorProductSpec::symplectic(rank(4)).word(), &inv4, rank(4))?;
    Ok(CheckResult {
        name: "inverse certificates",
        passed: ok2 && ok4,
        detail: format!("[x1,x2]: {ok2}, [x1,x2][x3,x4]: {ok4}"),
    })
}

fn check_blocking() -> Result<CheckResult> {
    let r = rank(2);
    let fixtures = ["abAB", "aabb", "aaabb", "baBA"];
    let proven = fixtures
        .iter()
        .all(|g| matches!(blocking_verdict(&word(g), r, 10).map(|o| o.verdict), Ok(BlockingVerdict::BlockedProven { .. })));
    let (comm, power) = (word("abAB"), word("aabb"));
    let mut count = 0usize;
    let mut clean = true;
    for p in enumerate_primitives_f2(10) {
        count += 1;
        clean &= !p.has_prefix(&comm) && !p.has_prefix(&power) && cmz_necessary_condition(&p, r)?;
    }
    Ok(CheckResult {
        name: "blocking fixtures",
        passed: proven && clean,
        detail: format!("certified families: {proven}, {count} primitives up to length 10 avoid them: {clean}"),
    })
}

fn check_witness() -> Result<CheckResult> {
    let square = Endomorphism::parse("x1->aa; x2->b")?;
    let found = orbit_violation_witness(&square, &word("a"), 4, DEFAULT_BUDGET)? == Some(word("a"));
    let aut = Endomorphism::parse("x1->ab; x2->b")?;
    let none = orbit_violation_witness(&aut, &word("a"), 4, DEFAULT_BUDGET)?.is_none();
    Ok(CheckResult {
        name: "orbit preservation harness",
        passed: found && none,
        detail: format!("witness for x1->x1^2: {found}, none for a Nielsen automorphism: {none}"),
    })
}

/// Runs every check; individual failures are reported, errors abort.
pub fn verify_paper(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        check_example_pair()?,
        check_double_jacobian()?,
        check_m2(&mut rng)?,
        check_odd_rank(&mut rng)?,
        check_certificates()?,
        check_blocking()?,
        check_witness()?,
    ])
}
