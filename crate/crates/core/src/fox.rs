//! Left and right Fox derivatives, Jacobians, double Jacobians and the
//! linearized coefficient matrix modulo `Δ²`.
//!
//! Left derivatives are the coefficients in `a - ε(a) = Σ d_i(a)(x_i - 1)`,
//! right derivatives those in `a - ε(a) = Σ (x_i - 1) d'_i(a)`. On a word
//! both are read off a single scan over its prefixes or suffixes.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::groupring::{IntMatrix, LaurentElement, Matrix, Ring, RingElement, RingMatrix};
use crate::maps::Endomorphism;
use crate::words::{Rank, Word};

/// `(d_1(a), ..., d_n(a))`, either left or right derivatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivativeVector {
    entries: Vec<RingElement>,
}

impl DerivativeVector {
    pub fn entries(&self) -> &[RingElement] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &RingElement {
        &self.entries[i - 1]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn abelianize(&self) -> Vec<LaurentElement> {
        self.entries.iter().map(RingElement::abelianize).collect()
    }

    /// The vector as a `1 x n` matrix.
    pub fn as_row(&self) -> RingMatrix {
        Matrix::from_rows(vec![self.entries.clone()]).expect("single row")
    }
}

fn check_index(i: usize, rank: Rank) -> Result<()> {
    if i == 0 || i > rank.get() {
        Err(Error::GeneratorOutOfRank { generator: i, rank: rank.get() })
    } else {
        Ok(())
    }
}

fn left_word_into(out: &mut [RingElement], w: &Word, c: &BigInt, only: Option<usize>) {
    let letters = w.letters();
    for (k, l) in letters.iter().enumerate() {
        let g = l.generator();
        if g > out.len() || only.is_some_and(|i| i != g) {
            continue;
        }
        let slot = &mut out[g - 1];
        if l.is_inverse() {
            slot.add_term(w.prefix(k + 1), &-c);
        } else {
            slot.add_term(w.prefix(k), c);
        }
    }
}

fn right_word_into(out: &mut [RingElement], w: &Word, c: &BigInt, only: Option<usize>) {
    let letters = w.letters();
    for (k, l) in letters.iter().enumerate() {
        let g = l.generator();
        if g > out.len() || only.is_some_and(|i| i != g) {
            continue;
        }
        let slot = &mut out[g - 1];
        if l.is_inverse() {
            slot.add_term(w.suffix_from(k), &-c);
        } else {
            slot.add_term(w.suffix_from(k + 1), c);
        }
    }
}

/// Left Fox derivative `d_i(a)` (1-based `i`), extended linearly; constants map to 0.
pub fn left_derivative(a: &RingElement, i: usize) -> RingElement {
    assert!(i >= 1, "generator indices start at 1");
    let mut out = vec![RingElement::zero(); i];
    for (w, c) in a.terms() {
        left_word_into(&mut out, w, c, Some(i));
    }
    out.pop().expect("nonempty")
}

/// Right Fox derivative `d'_i(a)`.
pub fn right_derivative(a: &RingElement, i: usize) -> RingElement {
    assert!(i >= 1, "generator indices start at 1");
    let mut out = vec![RingElement::zero(); i];
    for (w, c) in a.terms() {
        right_word_into(&mut out, w, c, Some(i));
    }
    out.pop().expect("nonempty")
}

/// Rank-checked `d_i(a)`.
pub fn left_derivative_checked(a: &RingElement, i: usize, rank: Rank) -> Result<RingElement> {
    check_index(i, rank)?;
    a.check_rank(rank)?;
    Ok(left_derivative(a, i))
}

pub fn right_derivative_checked(a: &RingElement, i: usize, rank: Rank) -> Result<RingElement> {
    check_index(i, rank)?;
    a.check_rank(rank)?;
    Ok(right_derivative(a, i))
}

/// All left derivatives in one pass.
pub fn left_derivatives(a: &RingElement, rank: Rank) -> Result<DerivativeVector> {
    a.check_rank(rank)?;
    let mut entries = vec![RingElement::zero(); rank.get()];
    for (w, c) in a.terms() {
        left_word_into(&mut entries, w, c, None);
    }
    Ok(DerivativeVector { entries })
}

pub fn right_derivatives(a: &RingElement, rank: Rank) -> Result<DerivativeVector> {
    a.check_rank(rank)?;
    let mut entries = vec![RingElement::zero(); rank.get()];
    for (w, c) in a.terms() {
        right_word_into(&mut entries, w, c, None);
    }
    Ok(DerivativeVector { entries })
}

pub fn word_left_derivatives(w: &Word, rank: Rank) -> Result<DerivativeVector> {
    left_derivatives(&RingElement::from_word(w.clone()), rank)
}

/// `J_φ` with entry `(i, j) = d_j(φ(x_i))`.
pub fn jacobian(phi: &Endomorphism) -> RingMatrix {
    let rank = phi.rank();
    let rows = phi
        .images()
        .iter()
        .map(|y| word_left_derivatives(y, rank).expect("images lie in the rank").entries)
        .collect();
    Matrix::from_rows(rows).expect("square")
}

/// `D_u` with entry `(i, j) = d'_j(d_i(u))`.
pub fn double_jacobian(u: &Word, rank: Rank) -> Result<RingMatrix> {
    let left = word_left_derivatives(u, rank)?;
    let rows = left
        .entries
        .iter()
        .map(|d| right_derivatives(d, rank).map(|v| v.entries))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(rows)
}

/// Checks `d_j(φ(u)) = Σ_k φ(d_k(u)) d_j(φ(x_k))` for every `j`, both sides
/// computed independently.
pub fn chain_rule_check(phi: &Endomorphism, u: &Word) -> bool {
    let rank = phi.rank();
    let Ok(du) = word_left_derivatives(u, rank) else { return false };
    let Ok(lhs) = word_left_derivatives(&phi.apply(u), rank) else { return false };
    let image_derivs: Vec<DerivativeVector> =
        phi.images().iter().map(|y| word_left_derivatives(y, rank).expect("images in rank")).collect();
    (1..=rank.get()).all(|j| {
        let rhs = (1..=rank.get()).fold(RingElement::zero(), |acc, k| {
            acc.ring_add(&phi.apply_ring(du.get(k)).ring_mul(image_derivs[k - 1].get(j)))
        });
        &rhs == lhs.get(j)
    })
}

/// Checks the row identity `(d_1(h), ..., d_n(h)) = (φ(d_1 g), ..., φ(d_n g)) J_φ`
/// for `h = φ(g)`, using matrix multiplication for the right side.
pub fn derivative_row_identity_check(phi: &Endomorphism, g: &Word) -> bool {
    let rank = phi.rank();
    let Ok(dg) = word_left_derivatives(g, rank) else { return false };
    let Ok(dh) = word_left_derivatives(&phi.apply(g), rank) else { return false };
    let mapped = Matrix::from_rows(vec![dg.entries.iter().map(|d| phi.apply_ring(d)).collect()]).expect("row");
    match mapped.mul(&jacobian(phi)) {
        Ok(prod) => prod == dh.as_row(),
        Err(_) => false,
    }
}

/// Integer matrix `A[i][j] = ε(d'_j(d_i(u)))`: the coefficient of `(x_j - 1)`
/// in `d_i(u)` modulo `Δ²`.
///
/// Computed from running exponent sums over prefixes, without any ring
/// arithmetic, so it can be checked against the augmented double Jacobian.
pub fn linearized_matrix(u: &Word, rank: Rank) -> Result<IntMatrix> {
    u.check_rank(rank)?;
    let ab = u.abelianization(rank);
    if ab.iter().any(|&e| e != 0) {
        return Err(Error::NotInDerivedSubgroup(ab));
    }
    let n = rank.get();
    let mut a = vec![vec![0i64; n]; n];
    let mut running = vec![0i64; n];
    for l in u.letters() {
        let i = l.generator() - 1;
        if l.is_inverse() {
            running[i] -= 1;
            for j in 0..n {
                a[i][j] -= running[j];
            }
        } else {
            for j in 0..n {
                a[i][j] += running[j];
            }
            running[i] += 1;
        }
    }
    Ok(IntMatrix::from_i64(a))
}
