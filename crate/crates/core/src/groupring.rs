//! Exact arithmetic in the integral group ring `ZF_n`, in the Laurent ring
//! `Z[A_n] = Z[x1^±1, ..., xn^±1]`, and in square matrices over either.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::words::{parse_unranked, Rank, Word};

/// Minimal ring interface shared by `Z`, `ZF` and `Z[A]` so matrices can be generic.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn ring_add(&self, rhs: &Self) -> Self;
    fn ring_mul(&self, rhs: &Self) -> Self;
    fn ring_neg(&self) -> Self;

    fn ring_sub(&self, rhs: &Self) -> Self {
        self.ring_add(&rhs.ring_neg())
    }
}

/// Commutative domains where exact division can be decided.
pub trait ExactDiv: Ring {
    /// `Some(w)` with `self = w * rhs`, or `None` if no such `w` exists.
    fn div_exact(&self, rhs: &Self) -> Option<Self>;
}

impl Ring for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn ring_add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn ring_mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn ring_neg(&self) -> Self {
        -self
    }
}

impl ExactDiv for BigInt {
    fn div_exact(&self, rhs: &Self) -> Option<Self> {
        if Zero::is_zero(rhs) {
            return None;
        }
        let (q, r) = self.div_rem(rhs);
        Zero::is_zero(&r).then_some(q)
    }
}

fn coeff_to_json(c: &BigInt) -> Value {
    match c.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(c.to_string()),
    }
}

fn coeff_from_json(v: &Value) -> Result<BigInt> {
    let bad = || Error::Syntax { position: 0, message: format!("bad coefficient {v}") };
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(bad),
        Value::String(s) => s.parse().map_err(|_| bad()),
        _ => Err(bad()),
    }
}

// ---------------------------------------------------------------------------
// ZF
// ---------------------------------------------------------------------------

/// Finite integer combination of reduced words; an element of `ZF`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RingElement {
    terms: BTreeMap<Word, BigInt>,
}

impl RingElement {
    pub fn from_word(w: Word) -> Self {
        Self::term(w, BigInt::from(1))
    }

    pub fn term(w: Word, c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !Zero::is_zero(&c) {
            terms.insert(w, c);
        }
        RingElement { terms }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::term(Word::identity(), c)
    }

    /// `w - 1`.
    pub fn word_minus_one(w: &Word) -> Self {
        let mut r = Self::from_word(w.clone());
        r.add_term(Word::identity(), &BigInt::from(-1));
        r
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, w: &Word) -> BigInt {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, w: Word, c: &BigInt) {
        if Zero::is_zero(c) {
            return;
        }
        let entry = self.terms.entry(w);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if Zero::is_zero(o.get()) {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if Zero::is_zero(c) {
            return Self::default();
        }
        RingElement { terms: self.terms.iter().map(|(w, k)| (w.clone(), k * c)).collect() }
    }

    /// Sum of coefficients: the augmentation `ZF -> Z`.
    pub fn augmentation(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Image in `Z[A]` under `F -> F/F'`.
    pub fn abelianize(&self) -> LaurentElement {
        let mut out = LaurentElement::default();
        for (w, c) in &self.terms {
            let exps: Vec<i64> = (1..=w.max_generator()).map(|i| w.exponent_sum(i)).collect();
            out.add_term(Exponents::new(exps), c);
        }
        out
    }

    /// Linear extension of a word map.
    pub fn map_words(&self, mut f: impl FnMut(&Word) -> Word) -> Self {
        let mut out = Self::default();
        for (w, c) in &self.terms {
            out.add_term(f(w), c);
        }
        out
    }

    /// `self * w` for a single word, without building a ring element for `w`.
    pub fn mul_word_right(&self, w: &Word) -> Self {
        self.map_words(|u| u.multiply(w))
    }

    pub fn mul_word_left(&self, w: &Word) -> Self {
        self.map_words(|u| w.multiply(u))
    }

    pub fn max_generator(&self) -> usize {
        self.terms.keys().map(Word::max_generator).max().unwrap_or(0)
    }

    pub fn check_rank(&self, rank: Rank) -> Result<()> {
        self.terms.keys().try_for_each(|w| w.check_rank(rank))
    }

    /// Parses `"1 - abA + 2*aB"`; words use compact or verbose syntax.
    pub fn parse(text: &str, rank: Rank) -> Result<Self> {
        let r = Self::parse_unranked(text)?;
        r.check_rank(rank)?;
        Ok(r)
    }

    pub fn parse_unranked(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (offset, sign, body) in split_signed_terms(text)? {
            let (coeff, word) = split_coeff(body, offset)?;
            out.add_term(word, &(coeff * sign));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms.iter().map(|(w, c)| Value::Array(vec![coeff_to_json(c), Value::String(w.to_compact())])).collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Syntax { position: 0, message: "ring element JSON must be a list of [coeff, word]".into() };
        let mut out = Self::default();
        for pair in v.as_array().ok_or_else(bad)? {
            let pair = pair.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
            let c = coeff_from_json(&pair[0])?;
            let w = parse_unranked(pair[1].as_str().ok_or_else(bad)?)?;
            out.add_term(w, &c);
        }
        Ok(out)
    }
}

/// Splits `"1 - ab + 2*x1^-1"` into signed term bodies. A `-` directly after
/// `^` belongs to an exponent.
fn split_signed_terms(text: &str) -> Result<Vec<(usize, i64, &str)>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut sign = 1i64;
    let mut start = 0usize;
    let mut prev_nonspace: Option<u8> = None;
    let mut seen_body = false;
    for (i, &b) in bytes.iter().enumerate() {
        if (b == b'+' || b == b'-') && prev_nonspace != Some(b'^') {
            if seen_body {
                out.push((start, sign, &text[start..i]));
            } else if prev_nonspace.is_some() {
                return Err(Error::Syntax { position: i, message: "dangling sign".into() });
            }
            sign = if b == b'-' { -1 } else { 1 };
            start = i + 1;
            seen_body = false;
            prev_nonspace = Some(b);
            continue;
        }
        if !b.is_ascii_whitespace() {
            prev_nonspace = Some(b);
            seen_body = true;
        }
    }
    if seen_body {
        out.push((start, sign, &text[start..]));
    } else if prev_nonspace.is_some() {
        return Err(Error::Syntax { position: text.len(), message: "expected a term".into() });
    }
    Ok(out)
}

fn split_coeff(body: &str, offset: usize) -> Result<(BigInt, Word)> {
    let t = body.trim();
    let digits = t.bytes().take_while(|b| b.is_ascii_digit()).count();
    if digits == 0 {
        return Ok((BigInt::from(1), parse_unranked(t).map_err(|e| shift(e, offset))?));
    }
    let coeff: BigInt = t[..digits].parse().expect("digits");
    let rest = t[digits..].trim_start();
    let rest = rest.strip_prefix('*').unwrap_or(rest);
    Ok((coeff, parse_unranked(rest).map_err(|e| shift(e, offset))?))
}

fn shift(e: Error, offset: usize) -> Error {
    match e {
        Error::Syntax { position, message } => Error::Syntax { position: position + offset, message },
        other => other,
    }
}

fn write_signed_terms<'a, K: 'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a K, &'a BigInt)>,
    is_unit_key: impl Fn(&K) -> bool,
    key_text: impl Fn(&K) -> String,
) -> fmt::Result {
    let mut first = true;
    for (k, c) in terms {
        let neg = c.is_negative();
        let abs = c.abs();
        if first {
            if neg {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if neg { " - " } else { " + " })?;
        }
        first = false;
        if is_unit_key(k) {
            write!(f, "{abs}")?;
        } else if abs.is_one() {
            f.write_str(&key_text(k))?;
        } else {
            write!(f, "{abs}*{}", key_text(k))?;
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_signed_terms(f, self.terms.iter(), Word::is_identity, Word::to_compact)
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingElement({self})")
    }
}

impl Ring for RingElement {
    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self::constant(1)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn ring_add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c);
        }
        out
    }
    fn ring_mul(&self, rhs: &Self) -> Self {
        let mut out = Self::default();
        for (u, a) in &self.terms {
            for (v, b) in &rhs.terms {
                out.add_term(u.multiply(v), &(a * b));
            }
        }
        out
    }
    fn ring_neg(&self) -> Self {
        RingElement { terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect() }
    }
}

macro_rules! ring_ops {
    ($t:ty) => {
        impl std::ops::Add for &$t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                self.ring_add(rhs)
            }
        }
        impl std::ops::Sub for &$t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                self.ring_sub(rhs)
            }
        }
        impl std::ops::Mul for &$t {
            type Output = $t;
            fn mul(self, rhs: &$t) -> $t {
                self.ring_mul(rhs)
            }
        }
        impl std::ops::Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                self.ring_neg()
            }
        }
        impl std::ops::Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                self.ring_add(&rhs)
            }
        }
        impl std::ops::Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                self.ring_sub(&rhs)
            }
        }
        impl std::ops::Mul for $t {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                self.ring_mul(&rhs)
            }
        }
        impl std::ops::Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                self.ring_neg()
            }
        }
    };
}

ring_ops!(RingElement);
ring_ops!(LaurentElement);

impl From<Word> for RingElement {
    fn from(w: Word) -> Self {
        RingElement::from_word(w)
    }
}

// ---------------------------------------------------------------------------
// Z[A]
// ---------------------------------------------------------------------------

/// Exponent vector with trailing zeros trimmed, ordered lexicographically as
/// if padded with zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Exponents(Vec<i64>);

impl Exponents {
    pub fn new(mut v: Vec<i64>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        Exponents(v)
    }

    pub fn get(&self, i: usize) -> i64 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn padded(&self, n: usize) -> Vec<i64> {
        (0..n.max(self.0.len())).map(|i| self.get(i)).collect()
    }

    fn combine(&self, other: &Self, f: impl Fn(i64, i64) -> i64) -> Self {
        let n = self.0.len().max(other.0.len());
        Exponents::new((0..n).map(|i| f(self.get(i), other.get(i))).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        Exponents(self.0.iter().map(|e| -e).collect())
    }

    /// The monomial as a word `x1^e1 x2^e2 ...`.
    pub fn to_word(&self) -> Word {
        let mut w = Word::identity();
        for (i, &e) in self.0.iter().enumerate() {
            w = w.multiply(&Word::power_of_gen(i + 1, e));
        }
        w
    }
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.0.len().max(other.0.len());
        (0..n).map(|i| self.get(i).cmp(&other.get(i))).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Exponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Exponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, e)| **e != 0)
            .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// Integer Laurent polynomial in commuting variables `x1, x2, ...`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentElement {
    terms: BTreeMap<Exponents, BigInt>,
}

impl LaurentElement {
    pub fn monomial(exps: Vec<i64>, c: impl Into<BigInt>) -> Self {
        let mut out = Self::default();
        out.add_term(Exponents::new(exps), &c.into());
        out
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(Vec::new(), c)
    }

    /// The variable `x_i^e` (1-based `i`).
    pub fn var_pow(i: usize, e: i64) -> Self {
        let mut v = vec![0; i];
        v[i - 1] = e;
        Self::monomial(v, 1)
    }

    pub fn var(i: usize) -> Self {
        Self::var_pow(i, 1)
    }

    pub fn add_term(&mut self, e: Exponents, c: &BigInt) {
        if Zero::is_zero(c) {
            return;
        }
        let slot = self.terms.entry(e).or_default();
        *slot += c;
        if Zero::is_zero(slot) {
            self.terms.retain(|_, v| !Zero::is_zero(v));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, e: &Exponents) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    pub fn shift(&self, by: &Exponents) -> Self {
        LaurentElement { terms: self.terms.iter().map(|(e, c)| (e.add(by), c.clone())).collect() }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut out = Self::default();
        for (e, k) in &self.terms {
            out.add_term(e.clone(), &(k * c));
        }
        out
    }

    /// Sum of coefficients (evaluation at all `x_i = 1`).
    pub fn augmentation(&self) -> BigInt {
        self.terms.values().sum()
    }

    pub fn dim(&self) -> usize {
        self.terms.keys().map(Exponents::dim).max().unwrap_or(0)
    }

    /// `Some((±1, exponents))` iff the element is a single term with coefficient ±1.
    pub fn is_unit(&self) -> Option<(i64, Exponents)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (e, c) = self.terms.iter().next()?;
        if c.is_one() {
            Some((1, e.clone()))
        } else if (-c).is_one() {
            Some((-1, e.clone()))
        } else {
            None
        }
    }

    /// Exact quotient `w` with `self = w * q`, or `Ok(None)` if there is none.
    ///
    /// Long division on lexicographically leading terms. Every candidate
    /// quotient exponent must lie in the box `[min(p) - min(q), max(p) - max(q)]`
    /// (per coordinate), which bounds the loop.
    pub fn divide_exact(&self, q: &Self) -> Result<Option<Self>> {
        if q.terms.is_empty() {
            return Err(Error::DivisionByZero);
        }
        if self.terms.is_empty() {
            return Ok(Some(Self::default()));
        }
        let n = self.dim().max(q.dim());
        let range = |p: &Self, i: usize| {
            let vals = p.terms.keys().map(|e| e.get(i));
            (vals.clone().min().unwrap(), vals.max().unwrap())
        };
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for i in 0..n {
            let (pmin, pmax) = range(self, i);
            let (qmin, qmax) = range(q, i);
            if pmin - qmin > pmax - qmax {
                return Ok(None);
            }
            lo.push(pmin - qmin);
            hi.push(pmax - qmax);
        }
        let (lq, cq) = q.terms.iter().next_back().expect("nonzero");
        let mut rem = self.clone();
        let mut quot = Self::default();
        while let Some((lr, cr)) = rem.terms.iter().next_back() {
            let (c, r) = cr.div_rem(cq);
            if !Zero::is_zero(&r) {
                return Ok(None);
            }
            let e = lr.sub(lq);
            if (0..n).any(|i| e.get(i) < lo[i] || e.get(i) > hi[i]) {
                return Ok(None);
            }
            let t = LaurentElement::monomial(e.0.clone(), c);
            rem = rem.ring_sub(&t.ring_mul(q));
            quot = quot.ring_add(&t);
        }
        Ok(Some(quot))
    }

    pub fn to_json(&self, rank: Rank) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(e, c)| Value::Array(vec![coeff_to_json(c), Value::from(e.padded(rank.get()))]))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Syntax { position: 0, message: "Laurent JSON must be a list of [coeff, [e1..en]]".into() };
        let mut out = Self::default();
        for pair in v.as_array().ok_or_else(bad)? {
            let pair = pair.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
            let c = coeff_from_json(&pair[0])?;
            let exps = pair[1]
                .as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|x| x.as_i64().ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?;
            out.add_term(Exponents::new(exps), &c);
        }
        Ok(out)
    }
}

impl fmt::Display for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_signed_terms(f, self.terms.iter(), Exponents::is_zero, |e| e.to_string())
    }
}

impl fmt::Debug for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Laurent({self})")
    }
}

impl Ring for LaurentElement {
    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self::constant(1)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn ring_add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
    fn ring_mul(&self, rhs: &Self) -> Self {
        let mut acc: BTreeMap<Exponents, BigInt> = BTreeMap::new();
        for (e1, a) in &self.terms {
            for (e2, b) in &rhs.terms {
                *acc.entry(e1.add(e2)).or_default() += a * b;
            }
        }
        acc.retain(|_, c| !Zero::is_zero(c));
        LaurentElement { terms: acc }
    }
    fn ring_neg(&self) -> Self {
        LaurentElement { terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
}

impl ExactDiv for LaurentElement {
    fn div_exact(&self, rhs: &Self) -> Option<Self> {
        self.divide_exact(rhs).ok().flatten()
    }
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: Vec<Vec<T>>,
}

pub type RingMatrix = Matrix<RingElement>;
pub type LaurentMatrix = Matrix<LaurentElement>;
pub type IntMatrix = Matrix<BigInt>;

impl<T: Ring> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(Matrix { rows })
    }

    pub fn identity(n: usize) -> Self {
        Matrix { rows: (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect() }
    }

    pub fn zeros(r: usize, c: usize) -> Self {
        Matrix { rows: vec![vec![T::zero(); c]; r] }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.rows[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.rows[i][j] = v;
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<T>> {
        self.rows
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows.iter().map(|r| r.iter().map(&f).collect()).collect() }
    }

    pub fn transpose(&self) -> Self {
        let (r, c) = (self.nrows(), self.ncols());
        Matrix { rows: (0..c).map(|j| (0..r).map(|i| self.rows[i][j].clone()).collect()).collect() }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.nrows())
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(T::is_zero)
    }

    /// Order-sensitive product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.ncols() != rhs.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.nrows(),
                self.ncols(),
                rhs.nrows(),
                rhs.ncols()
            )));
        }
        let rows = (0..self.nrows())
            .map(|i| {
                (0..rhs.ncols())
                    .map(|j| {
                        (0..self.ncols()).fold(T::zero(), |acc, k| {
                            if self.rows[i][k].is_zero() || rhs.rows[k][j].is_zero() {
                                acc
                            } else {
                                acc.ring_add(&self.rows[i][k].ring_mul(&rhs.rows[k][j]))
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(Matrix { rows })
    }

    pub fn is_antisymmetric_zero_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.nrows()).all(|i| {
                self.rows[i][i].is_zero() && (0..i).all(|j| self.rows[i][j] == self.rows[j][i].ring_neg())
            })
    }
}

impl<T: ExactDiv> Matrix<T> {
    /// Determinant by fraction-free (Bareiss) elimination over a commutative domain.
    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.nrows();
        if n == 0 {
            return Ok(T::one());
        }
        let mut m = self.rows.clone();
        let mut negate = false;
        let mut prev = T::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(i, k);
                        negate = !negate;
                    }
                    None => return Ok(T::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = m[i][j].ring_mul(&m[k][k]).ring_sub(&m[i][k].ring_mul(&m[k][j]));
                    m[i][j] = num.div_exact(&prev).expect("Bareiss division is exact over a domain");
                }
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        Ok(if negate { d.ring_neg() } else { d })
    }
}

impl RingMatrix {
    pub fn abelianize(&self) -> LaurentMatrix {
        self.map(RingElement::abelianize)
    }

    pub fn augment(&self) -> IntMatrix {
        self.map(RingElement::augmentation)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.rows.iter().map(|r| Value::Array(r.iter().map(|e| Value::String(e.to_string())).collect())).collect())
    }

    /// Reads a JSON array of arrays of ring-element text forms.
    pub fn from_json(v: &Value, rank: Rank) -> Result<Self> {
        let bad = || Error::Syntax { position: 0, message: "matrix JSON must be an array of arrays of strings".into() };
        let rows = v
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|e| RingElement::parse(e.as_str().ok_or_else(bad)?, rank))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(rows)
    }
}

impl IntMatrix {
    pub fn from_i64(rows: Vec<Vec<i64>>) -> Self {
        Matrix { rows: rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect() }
    }

    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        self.rows.iter().map(|r| r.iter().map(|x| x.to_i64()).collect()).collect()
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            write!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows.iter()).finish()
    }
}
