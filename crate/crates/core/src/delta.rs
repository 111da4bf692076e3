//! Δ-primitivity: the Magnus embedding of the free metabelian group, the
//! exact decision in `M_2`, the odd-rank obstruction, and inverse
//! certificates for the double Jacobian.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fox::{double_jacobian, linearized_matrix, word_left_derivatives};
use crate::groupring::{Exponents, IntMatrix, LaurentElement, Ring, RingElement, RingMatrix};
use crate::words::{Rank, ReducedWords, Word};

/// Image of a word in `M_n = F_n / F_n''`: exponent sums plus abelianized
/// left derivatives. The pair determines the element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetabelianElement {
    pub abelianization: Vec<i64>,
    pub derivatives: Vec<LaurentElement>,
}

impl MetabelianElement {
    pub fn identity(rank: Rank) -> Self {
        MetabelianElement { abelianization: vec![0; rank.get()], derivatives: vec![LaurentElement::zero(); rank.get()] }
    }

    pub fn rank(&self) -> usize {
        self.abelianization.len()
    }

    pub fn is_identity(&self) -> bool {
        self.abelianization.iter().all(|&e| e == 0) && self.derivatives.iter().all(LaurentElement::is_zero)
    }

    /// `Σ derivatives_i (x_i - 1) = x^abelianization - 1`.
    pub fn magnus_identity_holds(&self) -> bool {
        let lhs = self.derivatives.iter().enumerate().fold(LaurentElement::zero(), |acc, (i, d)| {
            acc.ring_add(&d.ring_mul(&LaurentElement::var(i + 1).ring_sub(&LaurentElement::one())))
        });
        let rhs = LaurentElement::monomial(self.abelianization.clone(), 1).ring_sub(&LaurentElement::one());
        lhs == rhs
    }

    /// Product in `M_n`: `(a, d)(b, e) = (a + b, d + x^a e)`.
    pub fn multiply(&self, other: &Self) -> Self {
        let shift = Exponents::new(self.abelianization.clone());
        MetabelianElement {
            abelianization: self.abelianization.iter().zip(&other.abelianization).map(|(a, b)| a + b).collect(),
            derivatives: self.derivatives.iter().zip(&other.derivatives).map(|(d, e)| d.ring_add(&e.shift(&shift))).collect(),
        }
    }
}

pub fn project_to_metabelian(w: &Word, rank: Rank) -> Result<MetabelianElement> {
    let d = word_left_derivatives(w, rank)?;
    Ok(MetabelianElement { abelianization: w.abelianization(rank), derivatives: d.abelianize() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeltaM2 {
    NotInDerivedSubgroup,
    NotDeltaPrimitive,
    /// The element equals `g [x1,x2]^sign g^-1` in `M_2` for any `g` with
    /// exponent sums `conjugator`.
    DeltaPrimitive { sign: i64, conjugator: Vec<i64> },
}

fn rank_two() -> Rank {
    Rank::new(2).expect("rank 2")
}

/// Decides whether the image of `w` in `M_2` is Δ-primitive.
///
/// On `M_2'` the derivatives are `q (1 - x2), q (x1 - 1)` for a unique
/// `q ∈ Z[A_2]`; the element is Δ-primitive iff `q` is a unit.
pub fn delta_primitive_m2(w: &Word, rank: Rank) -> Result<DeltaM2> {
    if rank.get() != 2 {
        return Err(Error::Precondition(format!("M2 decision needs rank 2, got {rank}")));
    }
    let m = project_to_metabelian(w, rank)?;
    if m.abelianization.iter().any(|&e| e != 0) {
        return Ok(DeltaM2::NotInDerivedSubgroup);
    }
    let one = LaurentElement::one();
    let d1_base = one.ring_sub(&LaurentElement::var(2));
    let d2_base = LaurentElement::var(1).ring_sub(&one);
    let q = m.derivatives[0]
        .divide_exact(&d1_base)?
        .ok_or_else(|| Error::TheoryViolation(format!("d1 of {w} is not divisible by 1 - x2")))?;
    if q.ring_mul(&d2_base) != m.derivatives[1] {
        return Err(Error::TheoryViolation(format!("d2 of {w} disagrees with quotient {q}")));
    }
    let Some((sign, mono)) = q.is_unit() else {
        return Ok(DeltaM2::NotDeltaPrimitive);
    };
    let conjugator = mono.padded(2);
    let c = Word::gen(1).commutator(&Word::gen(2)).pow(sign);
    let g = Exponents::new(conjugator.clone()).to_word();
    if project_to_metabelian(&c.conjugate_by(&g), rank_two())? != m {
        return Err(Error::TheoryViolation(format!("{w} does not re-verify as a conjugate of [x1,x2]^{sign}")));
    }
    Ok(DeltaM2::DeltaPrimitive { sign, conjugator })
}

/// Exponents `k_1..k_N` of `c_1^{k_1} ... c_N^{k_N}`, the `c_t` running over
/// `[x_i, x_j]`, `i < j`, in lexicographic order of `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutatorProductSpec {
    pub rank: Rank,
    pub exponents: Vec<i64>,
}

impl CommutatorProductSpec {
    pub fn new(rank: Rank, exponents: Vec<i64>) -> Result<Self> {
        let n = rank.get();
        let expected = n * (n - 1) / 2;
        if exponents.len() != expected {
            return Err(Error::DimensionMismatch(format!("expected {expected} exponents for rank {n}, got {}", exponents.len())));
        }
        Ok(CommutatorProductSpec { rank, exponents })
    }

    /// `(i, j)` pairs, 1-based, in the order the exponents refer to.
    pub fn pairs(rank: Rank) -> Vec<(usize, usize)> {
        let n = rank.get();
        (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect()
    }

    pub fn word(&self) -> Word {
        Self::pairs(self.rank)
            .into_iter()
            .zip(&self.exponents)
            .fold(Word::identity(), |acc, ((i, j), &k)| acc.multiply(&Word::gen(i).commutator(&Word::gen(j)).pow(k)))
    }

    /// `u_{2m} = [x1,x2][x3,x4]...[x_{2m-1},x_{2m}]`.
    pub fn symplectic(rank: Rank) -> Self {
        let exps = Self::pairs(rank).into_iter().map(|(i, j)| i64::from(i % 2 == 1 && j == i + 1)).collect();
        CommutatorProductSpec { rank, exponents: exps }
    }
}

/// Coefficient matrix of `d_i(w) = Σ_j A[i][j] (x_j - 1)`, with `A[i][j] = k`
/// and `A[j][i] = -k` for the exponent `k` of `[x_i, x_j]`.
pub fn weight2_matrix(spec: &CommutatorProductSpec) -> IntMatrix {
    let n = spec.rank.get();
    let mut a = vec![vec![0i64; n]; n];
    for ((i, j), &k) in CommutatorProductSpec::pairs(spec.rank).into_iter().zip(&spec.exponents) {
        a[i - 1][j - 1] += k;
        a[j - 1][i - 1] -= k;
    }
    IntMatrix::from_i64(a)
}

/// For odd `n`, confirms that `w ∈ F_n'` fails the linear necessary condition:
/// its linearized matrix is antisymmetric with zero diagonal, hence singular.
pub fn odd_rank_obstruction(w: &Word, rank: Rank) -> Result<bool> {
    if rank.get().is_multiple_of(2) {
        return Err(Error::Precondition(format!("odd-rank obstruction needs odd rank, got {rank}")));
    }
    let a = linearized_matrix(w, rank)?;
    if !a.is_antisymmetric_zero_diagonal() {
        return Err(Error::TheoryViolation(format!("linearized matrix of {w} is not antisymmetric: {a}")));
    }
    let det = a.det()?;
    if !Zero::is_zero(&det) {
        return Err(Error::TheoryViolation(format!("odd-rank antisymmetric matrix has determinant {det}")));
    }
    Ok(true)
}

/// Necessary condition for Δ-primitivity: the linearized matrix is unimodular.
pub fn delta_primitive_necessary(w: &Word, rank: Rank) -> Result<bool> {
    Ok(linearized_matrix(w, rank)?.det()?.abs().is_one())
}

/// Matrix `(d'_k(d_i(u)))` indexed `(k, i)`: column `i` expresses `d_i(u)` in
/// the right basis `x_k - 1` of `Δ`. This is the transpose of `D_u`, and it is
/// the matrix whose invertibility is equivalent to the `d_i(u)` generating
/// `Δ` as a right ideal.
pub fn generation_matrix(u: &Word, rank: Rank) -> Result<RingMatrix> {
    Ok(double_jacobian(u, rank)?.transpose())
}

/// `G m = m G = I` for `G = generation_matrix(u)`, exact. A true result
/// certifies that `u` is Δ-primitive.
pub fn verify_inverse_certificate(u: &Word, m: &RingMatrix, rank: Rank) -> Result<bool> {
    let ab = u.abelianization(rank);
    if ab.iter().any(|&e| e != 0) {
        return Err(Error::NotInDerivedSubgroup(ab));
    }
    let n = rank.get();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!("expected {n}x{n} matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    let g = generation_matrix(u, rank)?;
    Ok(g.mul(m)?.is_identity() && m.mul(&g)?.is_identity())
}

/// `F_2` elements that are Δ-primitive: conjugates of `[x1,x2]^{±1}`.
pub fn classify_delta_primitive_f2(u: &Word, rank: Rank) -> Result<bool> {
    if rank.get() != 2 {
        return Err(Error::Precondition(format!("F2 classification needs rank 2, got {rank}")));
    }
    u.check_rank(rank)?;
    let core = u.cyclic_reduce().core;
    if core.len() != 4 {
        return Ok(false);
    }
    let c = Word::gen(1).commutator(&Word::gen(2));
    let targets = [c.clone(), c.inverse()];
    Ok((0..4).any(|k| targets.contains(&core.rotate(k))))
}

// ---------------------------------------------------------------------------
// Inverse search
// ---------------------------------------------------------------------------

/// Sparse row echelon form over `Q`, built one equation at a time.
struct Echelon {
    pivots: BTreeMap<usize, usize>,
    rows: Vec<(BTreeMap<usize, BigRational>, BigRational)>,
    inconsistent: bool,
}

impl Echelon {
    fn new() -> Self {
        Echelon { pivots: BTreeMap::new(), rows: Vec::new(), inconsistent: false }
    }

    fn add(&mut self, mut row: BTreeMap<usize, BigRational>, mut rhs: BigRational) {
        loop {
            let hit = row.keys().find(|v| self.pivots.contains_key(v)).copied();
            let Some(v) = hit else { break };
            let (prow, prhs) = &self.rows[self.pivots[&v]];
            let f = row[&v].clone();
            for (k, c) in prow {
                let e = row.entry(*k).or_insert_with(BigRational::zero);
                *e -= &f * c;
                if e.is_zero() {
                    row.remove(k);
                }
            }
            rhs -= &f * prhs;
        }
        match row.keys().next().copied() {
            None => {
                if !rhs.is_zero() {
                    self.inconsistent = true;
                }
            }
            Some(v) => {
                let inv = row[&v].recip();
                for c in row.values_mut() {
                    *c *= &inv;
                }
                rhs *= &inv;
                self.pivots.insert(v, self.rows.len());
                self.rows.push((row, rhs));
            }
        }
    }

    /// One solution with free variables set to zero.
    fn solve(&self, nvars: usize) -> Option<Vec<BigRational>> {
        if self.inconsistent {
            return None;
        }
        let mut x = vec![BigRational::zero(); nvars];
        let mut order: Vec<(usize, usize)> = self.pivots.iter().map(|(&v, &r)| (r, v)).collect();
        order.sort_unstable();
        for (r, v) in order.into_iter().rev() {
            let (row, rhs) = &self.rows[r];
            let mut val = rhs.clone();
            for (k, c) in row {
                if *k != v {
                    val -= c * &x[*k];
                }
            }
            x[v] = val;
        }
        Some(x)
    }
}

/// Best-effort search for a two-sided inverse of the generation matrix of `u` whose entries are
/// supported on reduced words of length at most `max_word_len`.
///
/// Solves the linear system `D m = I`, `m D = I` over `Q` in the unknown
/// coefficients and keeps the solution only if it is integral and verifies.
/// `None` says nothing about invertibility.
pub fn search_inverse(u: &Word, rank: Rank, max_word_len: usize) -> Result<Option<RingMatrix>> {
    let d = generation_matrix(u, rank)?;
    match search_matrix_inverse(&d, rank, max_word_len)? {
        Some(m) if verify_inverse_certificate(u, &m, rank)? => Ok(Some(m)),
        _ => Ok(None),
    }
}

/// Verified inverse of the generation matrix of `[x1, x2]`, row by row.
pub const COMMUTATOR_INVERSE: [[&str; 2]; 2] = [["-1 + a", "-1 + b - ab"], ["b", "b - bb"]];

pub fn commutator_inverse() -> RingMatrix {
    let rank = rank_two();
    let rows = COMMUTATOR_INVERSE
        .iter()
        .map(|row| row.iter().map(|e| RingElement::parse(e, rank).expect("fixture parses")).collect())
        .collect();
    RingMatrix::from_rows(rows).expect("2x2")
}

/// Outcome of the linear solve behind [`search_matrix_inverse`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InverseSearch {
    Found(RingMatrix),
    /// No inverse with this support exists.
    Inconsistent,
    /// A rational solution exists but the chosen one is not integral.
    NonIntegral,
}

/// Searches for a two-sided inverse of a square matrix over `ZF` supported
/// on reduced words of length at most `max_word_len`.
pub fn search_matrix_inverse(d: &RingMatrix, rank: Rank, max_word_len: usize) -> Result<Option<RingMatrix>> {
    Ok(match solve_inverse(d, rank, max_word_len)? {
        InverseSearch::Found(m) => Some(m),
        _ => None,
    })
}

pub fn solve_inverse(d: &RingMatrix, rank: Rank, max_word_len: usize) -> Result<InverseSearch> {
    let n = d.nrows();
    if !d.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", d.nrows(), d.ncols())));
    }
    let support: Vec<Word> = ReducedWords::new(rank, max_word_len).collect();
    let s = support.len();
    let var = |row: usize, col: usize, k: usize| (row * n + col) * s + k;
    let nvars = n * n * s;
    // (side, i, k, word) -> equation
    let mut eqs: BTreeMap<(u8, usize, usize, Word), BTreeMap<usize, BigRational>> = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            for (dw, dc) in d.get(i, j).terms() {
                let dc = BigRational::from_integer(dc.clone());
                for k in 0..n {
                    for (idx, w) in support.iter().enumerate() {
                        // (D m)[i][k] gets D[i][j] m[j][k]
                        *eqs.entry((0, i, k, dw.multiply(w))).or_default().entry(var(j, k, idx)).or_insert_with(BigRational::zero) += &dc;
                        // (m D)[k][j] gets m[k][i] D[i][j]
                        *eqs.entry((1, k, j, w.multiply(dw))).or_default().entry(var(k, i, idx)).or_insert_with(BigRational::zero) += &dc;
                    }
                }
            }
        }
    }
    for side in 0..2u8 {
        for i in 0..n {
            eqs.entry((side, i, i, Word::identity())).or_default();
        }
    }
    let mut ech = Echelon::new();
    for ((_, i, k, w), mut row) in eqs {
        row.retain(|_, c| !c.is_zero());
        let rhs = if i == k && w.is_identity() { BigRational::one() } else { BigRational::zero() };
        ech.add(row, rhs);
        if ech.inconsistent {
            return Ok(InverseSearch::Inconsistent);
        }
    }
    let Some(x) = ech.solve(nvars) else { return Ok(InverseSearch::Inconsistent) };
    if x.iter().any(|c| !c.is_integer()) {
        return Ok(InverseSearch::NonIntegral);
    }
    let mut rows = vec![vec![RingElement::zero(); n]; n];
    for (r, row) in rows.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            for (k, w) in support.iter().enumerate() {
                let coeff: BigInt = x[var(r, c, k)].to_integer();
                if !Zero::is_zero(&coeff) {
                    entry.add_term(w.clone(), &coeff);
                }
            }
        }
    }
    let m = RingMatrix::from_rows(rows)?;
    let two_sided = d.mul(&m)?.is_identity() && m.mul(d)?.is_identity();
    Ok(if two_sided { InverseSearch::Found(m) } else { InverseSearch::NonIntegral })
}

/// Inverse of the generation matrix of `u = u_{2m}`, assembled from the
/// rank-2 inverse.
///
/// The matrix is block upper triangular, its diagonal blocks being the
/// rank-2 matrix relabelled to `x_{2t-1}, x_{2t}`, so block back
/// substitution only needs the known diagonal inverses.
pub fn symplectic_inverse(rank: Rank, base_inverse: &RingMatrix) -> Result<RingMatrix> {
    let n = rank.get();
    if !n.is_multiple_of(2) {
        return Err(Error::Precondition(format!("u_2m needs even rank, got {rank}")));
    }
    let u = CommutatorProductSpec::symplectic(rank).word();
    let d = generation_matrix(&u, rank)?;
    let m = n / 2;
    // diagonal block inverses: relabel x1, x2 -> x_{2t+1}, x_{2t+2}
    let block_inv: Vec<RingMatrix> = (0..m)
        .map(|t| {
            base_inverse.map(|e| {
                e.map_words(|w| {
                    Word::from_letters(w.letters().iter().map(|l| crate::words::Letter::new(l.generator() + 2 * t, l.is_inverse())))
                })
            })
        })
        .collect();
    let block = |mat: &RingMatrix, bi: usize, bj: usize| -> RingMatrix {
        RingMatrix::from_rows((0..2).map(|r| (0..2).map(|c| mat.get(2 * bi + r, 2 * bj + c).clone()).collect()).collect())
            .expect("2x2")
    };
    // X[i][j] = G_ii^{-1} (δ_ij I - Σ_{k>i} G[i][k] X[k][j])
    let mut x: Vec<Vec<RingMatrix>> = vec![vec![RingMatrix::zeros(2, 2); m]; m];
    for i in (0..m).rev() {
        for j in 0..m {
            let mut acc = if i == j { RingMatrix::identity(2) } else { RingMatrix::zeros(2, 2) };
            for (k, xk) in x.iter().enumerate().skip(i + 1) {
                let prod = block(&d, i, k).mul(&xk[j])?;
                acc = RingMatrix::from_rows(
                    (0..2).map(|r| (0..2).map(|c| acc.get(r, c).ring_sub(prod.get(r, c))).collect()).collect(),
                )?;
            }
            x[i][j] = block_inv[i].mul(&acc)?;
        }
    }
    let rows = (0..n).map(|r| (0..n).map(|c| x[r / 2][c / 2].get(r % 2, c % 2).clone()).collect()).collect();
    RingMatrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupring::Matrix;
    use crate::words::parse_unranked;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        parse_unranked(s).unwrap()
    }
    fn r(n: usize) -> Rank {
        Rank::new(n).unwrap()
    }
    fn lp(terms: &[(i64, i64, i64)]) -> LaurentElement {
        terms.iter().fold(LaurentElement::zero(), |acc, &(c, e1, e2)| acc.ring_add(&LaurentElement::monomial(vec![e1, e2], c)))
    }

    #[test]
    fn projection_examples() {
        let c = project_to_metabelian(&w("abAB"), r(2)).unwrap();
        assert_eq!(c.abelianization, vec![0, 0]);
        assert_eq!(c.derivatives, vec![lp(&[(1, 0, 0), (-1, 0, 1)]), lp(&[(1, 1, 0), (-1, 0, 0)])]);
        let a = project_to_metabelian(&w("a"), r(2)).unwrap();
        assert_eq!(a.derivatives, vec![LaurentElement::one(), LaurentElement::zero()]);
        assert!(project_to_metabelian(&w("abAB").multiply(&w("baBA")), r(2)).unwrap().is_identity());
        assert!(c.magnus_identity_holds() && a.magnus_identity_holds());
    }

    #[test]
    fn metabelian_law_kills_double_commutators() {
        // [[a,b],[A,B]] lies in F'' so it is trivial in M_2
        let x = w("abAB").commutator(&w("ABab"));
        assert!(!x.is_identity());
        assert!(project_to_metabelian(&x, r(2)).unwrap().is_identity());
    }

    #[test]
    fn m2_examples() {
        assert_eq!(delta_primitive_m2(&w("abAB"), r(2)).unwrap(), DeltaM2::DeltaPrimitive { sign: 1, conjugator: vec![0, 0] });
        assert_eq!(
            delta_primitive_m2(&w("abAB").conjugate_by(&w("a")), r(2)).unwrap(),
            DeltaM2::DeltaPrimitive { sign: 1, conjugator: vec![1, 0] }
        );
        assert_eq!(delta_primitive_m2(&w("abAB").pow(2), r(2)).unwrap(), DeltaM2::NotDeltaPrimitive);
        assert_eq!(delta_primitive_m2(&w("ab"), r(2)).unwrap(), DeltaM2::NotInDerivedSubgroup);
        assert_eq!(delta_primitive_m2(&w("baBA"), r(2)).unwrap(), DeltaM2::DeltaPrimitive { sign: -1, conjugator: vec![0, 0] });
        assert!(delta_primitive_m2(&w("a"), r(3)).is_err());
    }

    #[test]
    fn weight2_examples() {
        let m = weight2_matrix(&CommutatorProductSpec::new(r(3), vec![1, 1, 0]).unwrap());
        assert_eq!(m.to_i64().unwrap(), vec![vec![0, 1, 1], vec![-1, 0, 0], vec![-1, 0, 0]]);
        let m = weight2_matrix(&CommutatorProductSpec::new(r(2), vec![1]).unwrap());
        assert_eq!(m.to_i64().unwrap(), vec![vec![0, 1], vec![-1, 0]]);
        let u4 = CommutatorProductSpec::symplectic(r(4));
        assert_eq!(u4.exponents, vec![1, 0, 0, 0, 0, 1]);
        assert_eq!(u4.word(), w("abAB").multiply(&w("cdCD")));
        assert_eq!(weight2_matrix(&u4).det().unwrap(), BigInt::from(1));
        assert!(CommutatorProductSpec::new(r(3), vec![1]).is_err());
    }

    #[test]
    fn weight2_agrees_with_linearization_up_to_sign() {
        let spec = CommutatorProductSpec::new(r(4), vec![2, -1, 0, 3, 1, -2]).unwrap();
        let lin = linearized_matrix(&spec.word(), r(4)).unwrap();
        let neg = weight2_matrix(&spec).map(|c| -c);
        assert_eq!(lin, neg);
    }

    #[test]
    fn odd_rank_examples() {
        assert!(odd_rank_obstruction(&w("abAB").multiply(&w("acAC")), r(3)).unwrap());
        let weight3 = w("a").commutator(&w("b").commutator(&w("c")));
        assert!(linearized_matrix(&weight3, r(3)).unwrap().is_zero());
        assert!(odd_rank_obstruction(&weight3, r(3)).unwrap());
        assert!(odd_rank_obstruction(&w("abAB"), r(2)).is_err());
        assert!(matches!(odd_rank_obstruction(&w("ab"), r(3)), Err(Error::NotInDerivedSubgroup(_))));
    }

    #[test]
    fn necessary_condition_examples() {
        assert!(delta_primitive_necessary(&w("abAB").multiply(&w("cdCD")), r(4)).unwrap());
        assert!(!delta_primitive_necessary(&w("abAB").pow(2), r(2)).unwrap());
        assert_eq!(linearized_matrix(&w("abAB").pow(2), r(2)).unwrap().det().unwrap(), BigInt::from(4));
        let v = w("abAB").multiply(&w("bcBC")).multiply(&w("cdCD"));
        assert!(delta_primitive_necessary(&v, r(4)).unwrap());
    }

    #[test]
    fn classification_examples() {
        assert!(classify_delta_primitive_f2(&w("abAB").conjugate_by(&w("A")), r(2)).unwrap());
        assert!(classify_delta_primitive_f2(&w("baBA"), r(2)).unwrap());
        assert!(!classify_delta_primitive_f2(&w("abAB").pow(2), r(2)).unwrap());
        assert!(!classify_delta_primitive_f2(&w("aabb"), r(2)).unwrap());
    }

    #[test]
    fn trivial_certificates_fail() {
        assert!(!verify_inverse_certificate(&w("abAB"), &RingMatrix::identity(2), r(2)).unwrap());
        assert!(!verify_inverse_certificate(&Word::identity(), &RingMatrix::identity(2), r(2)).unwrap());
        assert!(verify_inverse_certificate(&w("abAB"), &RingMatrix::identity(3), r(2)).is_err());
    }

    #[test]
    fn inverse_found_for_rank_two_commutator() {
        let u = w("abAB");
        let inv = (1..=3).find_map(|l| search_inverse(&u, r(2), l).unwrap()).expect("short inverse");
        assert!(verify_inverse_certificate(&u, &inv, r(2)).unwrap());
        assert!(delta_primitive_necessary(&u, r(2)).unwrap());
        let u4 = CommutatorProductSpec::symplectic(r(4)).word();
        let big = symplectic_inverse(r(4), &inv).unwrap();
        assert!(verify_inverse_certificate(&u4, &big, r(4)).unwrap());
        let abel: Matrix<LaurentElement> = big.abelianize();
        assert_eq!(abel.det().unwrap().is_unit().map(|(s, _)| s.abs()), Some(1));
    }

    #[test]
    fn fixture_inverse_verifies() {
        assert!(verify_inverse_certificate(&w("abAB"), &commutator_inverse(), r(2)).unwrap());
        // the untransposed double Jacobian has no inverse of comparable support
        let d = double_jacobian(&w("abAB"), r(2)).unwrap();
        assert_eq!(solve_inverse(&d, r(2), 4).unwrap(), InverseSearch::Inconsistent);
    }

    #[test]
    fn no_inverse_for_square() {
        assert_eq!(search_inverse(&w("abAB").pow(2), r(2), 1).unwrap(), None);
    }

    fn word_strategy(n: usize, max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(0..2 * n, 0..=max)
            .prop_map(|codes| Word::from_letters(codes.into_iter().map(crate::words::Letter::from_code)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn magnus_identity_for_random_words(x in word_strategy(3, 16)) {
            prop_assert!(project_to_metabelian(&x, r(3)).unwrap().magnus_identity_holds());
        }

        #[test]
        fn projection_is_a_homomorphism(x in word_strategy(2, 10), y in word_strategy(2, 10)) {
            let px = project_to_metabelian(&x, r(2)).unwrap();
            let py = project_to_metabelian(&y, r(2)).unwrap();
            prop_assert_eq!(px.multiply(&py), project_to_metabelian(&x.multiply(&y), r(2)).unwrap());
        }

        #[test]
        fn conjugates_of_commutator_decide_positive(g in word_strategy(2, 8), inv in any::<bool>()) {
            let c = w("abAB").pow(if inv { -1 } else { 1 });
            let h = c.conjugate_by(&g);
            let expected = DeltaM2::DeltaPrimitive { sign: if inv { -1 } else { 1 }, conjugator: g.abelianization(r(2)) };
            prop_assert_eq!(delta_primitive_m2(&h, r(2)).unwrap(), expected);
            prop_assert!(classify_delta_primitive_f2(&h, r(2)).unwrap());
        }

        #[test]
        fn weight2_is_antisymmetric(exps in prop::collection::vec(-3i64..=3, 10)) {
            let spec = CommutatorProductSpec::new(r(5), exps).unwrap();
            let a = weight2_matrix(&spec);
            prop_assert!(a.is_antisymmetric_zero_diagonal());
            prop_assert!(Zero::is_zero(&a.det().unwrap()));
        }

        #[test]
        fn even_rank_determinant_is_square(exps in prop::collection::vec(-3i64..=3, 6)) {
            let det = weight2_matrix(&CommutatorProductSpec::new(r(4), exps).unwrap()).det().unwrap();
            let root = det.sqrt();
            prop_assert_eq!(&root * &root, det);
        }
    }
}
