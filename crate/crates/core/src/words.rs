//! Freely reduced words over `x1..xn` and their inverses.
//!
//! Words are rank-free values: a word only mentions the generators it uses,
//! and [`Rank`] is checked wherever a word enters a context that fixes `n`
//! (parsing, endomorphisms, derivative vectors, enumeration).

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of free generators, always at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Rank(usize);

impl Rank {
    pub const MAX: usize = i16::MAX as usize;

    pub fn new(n: usize) -> Result<Self> {
        if (2..=Self::MAX).contains(&n) {
            Ok(Rank(n))
        } else {
            Err(Error::InvalidRank(n))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// The `2n` letters in canonical order `x1, X1, x2, X2, ...`.
    pub fn letters(self) -> impl Iterator<Item = Letter> + Clone {
        (0..2 * self.0).map(Letter::from_code)
    }
}

impl TryFrom<usize> for Rank {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Rank::new(n)
    }
}

impl From<Rank> for usize {
    fn from(r: Rank) -> usize {
        r.0
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A generator `x_i` (positive) or its inverse (negative), `i` counted from 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter(i16);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        assert!((1..=Rank::MAX).contains(&generator), "generator index {generator} out of range");
        let g = generator as i16;
        Letter(if inverse { -g } else { g })
    }

    pub fn gen(generator: usize) -> Self {
        Letter::new(generator, false)
    }

    pub fn inv_gen(generator: usize) -> Self {
        Letter::new(generator, true)
    }

    /// 1-based generator index.
    pub fn generator(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn sign(self) -> i64 {
        if self.0 > 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// Position in the canonical alphabet order `x1, X1, x2, X2, ...`.
    pub fn code(self) -> usize {
        2 * (self.generator() - 1) + usize::from(self.is_inverse())
    }

    pub fn from_code(code: usize) -> Self {
        Letter::new(code / 2 + 1, code % 2 == 1)
    }

    pub(crate) fn raw(self) -> i16 {
        self.0
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.code().cmp(&other.code())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inverse() {
            write!(f, "x{}^-1", self.generator())
        } else {
            write!(f, "x{}", self.generator())
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.generator();
        if g <= 26 {
            let c = (b'a' + (g - 1) as u8) as char;
            if self.is_inverse() {
                write!(f, "{}", c.to_ascii_uppercase())
            } else {
                write!(f, "{c}")
            }
        } else {
            fmt::Debug::fmt(self, f)
        }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn letter(l: Letter) -> Self {
        Word { letters: vec![l] }
    }

    pub fn gen(i: usize) -> Self {
        Word::letter(Letter::gen(i))
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            push_reduced(&mut out, l);
        }
        Word { letters: out }
    }

    /// Wraps a sequence the caller knows to be freely reduced.
    pub(crate) fn from_reduced_unchecked(letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|p| p[0] != p[1].inverse()));
        Word { letters }
    }

    /// Builds `x_g^e` for a signed exponent.
    pub fn power_of_gen(g: usize, e: i64) -> Self {
        let l = Letter::new(g, e < 0);
        Word { letters: vec![l; e.unsigned_abs() as usize] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// Largest generator index occurring in the word (0 for the identity).
    pub fn max_generator(&self) -> usize {
        self.letters.iter().map(|l| l.generator()).max().unwrap_or(0)
    }

    pub fn check_rank(&self, rank: Rank) -> Result<()> {
        let g = self.max_generator();
        if g > rank.get() {
            Err(Error::GeneratorOutOfRank { generator: g, rank: rank.get() })
        } else {
            Ok(())
        }
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let mut out = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut out, l);
        }
        Word { letters: out }
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    /// `u v u^-1 v^-1`.
    pub fn commutator(&self, other: &Word) -> Word {
        self.multiply(other).multiply(&self.inverse()).multiply(&other.inverse())
    }

    /// `g w g^-1`.
    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.multiply(self).multiply(&g.inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(a), Some(b)) => self.len() == 1 || a != b.inverse(),
            _ => true,
        }
    }

    pub fn cyclic_reduce(&self) -> CyclicReduction {
        let n = self.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.letters[k] == self.letters[n - 1 - k].inverse() {
            k += 1;
        }
        CyclicReduction {
            core: Word { letters: self.letters[k..n - k].to_vec() },
            conjugator: Word { letters: self.letters[..k].to_vec() },
        }
    }

    /// True iff `self = g h` with no cancellation, i.e. `g` is a letter prefix.
    pub fn has_prefix(&self, g: &Word) -> bool {
        self.letters.starts_with(&g.letters)
    }

    /// Signed count of occurrences of `x_i` (1-based).
    pub fn exponent_sum(&self, i: usize) -> i64 {
        self.letters.iter().filter(|l| l.generator() == i).map(|l| l.sign()).sum()
    }

    /// Exponent-sum vector in `Z^n`.
    pub fn abelianization(&self, rank: Rank) -> Vec<i64> {
        let mut v = vec![0i64; rank.get()];
        for l in &self.letters {
            if let Some(slot) = v.get_mut(l.generator() - 1) {
                *slot += l.sign();
            }
        }
        v
    }

    /// Letter prefix of length `k` (already reduced).
    pub fn prefix(&self, k: usize) -> Word {
        Word { letters: self.letters[..k].to_vec() }
    }

    pub fn suffix_from(&self, k: usize) -> Word {
        Word { letters: self.letters[k..].to_vec() }
    }

    /// Cyclic rotation `w[k..] w[..k]`. Only meaningful for cyclically reduced words.
    pub fn rotate(&self, k: usize) -> Word {
        let mut letters = self.letters[k..].to_vec();
        letters.extend_from_slice(&self.letters[..k]);
        Word { letters }
    }

    /// Set of distinct generators occurring, as a sorted list.
    pub fn support(&self) -> Vec<usize> {
        let mut gens: Vec<usize> = self.letters.iter().map(|l| l.generator()).collect();
        gens.sort_unstable();
        gens.dedup();
        gens
    }

    /// Compact form (`a`..`z`, uppercase inverse) when every generator is at
    /// most 26, verbose `x1*x2^-1` otherwise. The identity prints as `1`.
    pub fn to_compact(&self) -> String {
        if self.is_identity() {
            return "1".to_string();
        }
        if self.max_generator() <= 26 {
            self.letters.iter().map(|l| l.to_string()).collect()
        } else {
            self.to_verbose()
        }
    }

    pub fn to_verbose(&self) -> String {
        if self.is_identity() {
            return "1".to_string();
        }
        self.letters.iter().map(|l| format!("{l:?}")).collect::<Vec<_>>().join("*")
    }

    pub fn to_json(&self, rank: Rank) -> WordJson {
        WordJson {
            rank: rank.get(),
            letters: self.letters.iter().map(|l| (l.generator(), l.sign() as i8)).collect(),
        }
    }

    pub fn from_json(json: &WordJson) -> Result<(Word, Rank)> {
        let rank = Rank::new(json.rank)?;
        let mut letters = Vec::with_capacity(json.letters.len());
        for &(g, s) in &json.letters {
            if g == 0 || g > rank.get() {
                return Err(Error::GeneratorOutOfRank { generator: g, rank: rank.get() });
            }
            if s != 1 && s != -1 {
                return Err(Error::Syntax { position: 0, message: format!("letter sign must be 1 or -1, got {s}") });
            }
            letters.push(Letter::new(g, s < 0));
        }
        Ok((Word::from_letters(letters), rank))
    }
}

pub(crate) fn push_reduced(out: &mut Vec<Letter>, l: Letter) {
    if out.last() == Some(&l.inverse()) {
        out.pop();
    } else {
        out.push(l);
    }
}

/// Shortlex: length first, then letters in alphabet order.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self.to_compact())
    }
}

impl std::ops::Mul for &Word {
    type Output = Word;
    fn mul(self, rhs: &Word) -> Word {
        self.multiply(rhs)
    }
}

/// JSON form `{"rank": n, "letters": [[gen, sign], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordJson {
    pub rank: usize,
    pub letters: Vec<(usize, i8)>,
}

/// `original = conjugator * core * conjugator^-1` with `core` cyclically reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicReduction {
    pub core: Word,
    pub conjugator: Word,
}

impl CyclicReduction {
    pub fn reassemble(&self) -> Word {
        self.core.conjugate_by(&self.conjugator)
    }
}

/// Parses compact (`abAB`) or verbose (`x1*x2^-1`) word syntax.
///
/// Whitespace is ignored between letters and factors; `1` or an empty string
/// is the identity. Verbose factors accept any integer exponent.
pub fn parse(text: &str, rank: Rank) -> Result<Word> {
    let w = parse_unranked(text)?;
    w.check_rank(rank)?;
    Ok(w)
}

/// Parses without a rank bound; callers validate against a rank afterwards.
pub fn parse_unranked(text: &str) -> Result<Word> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed == "1" {
        return Ok(Word::identity());
    }
    let bytes = trimmed.as_bytes();
    let mut letters = Vec::new();
    let mut i = 0;
    let syntax = |position: usize, message: &str| Error::Syntax { position, message: message.to_string() };
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'*' | b'.' => i += 1,
            b'x' if i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() => {
                let start = i;
                i += 1;
                let ds = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let g: usize = trimmed[ds..i].parse().map_err(|_| syntax(start, "bad generator index"))?;
                if g == 0 || g > Rank::MAX {
                    return Err(syntax(start, "generator index must be between 1 and 32767"));
                }
                let mut exp: i64 = 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let es = i;
                    if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
                        i += 1;
                    }
                    let dstart = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if dstart == i {
                        return Err(syntax(es, "expected exponent after '^'"));
                    }
                    exp = trimmed[es..i].parse().map_err(|_| syntax(es, "bad exponent"))?;
                }
                let l = Letter::new(g, exp < 0);
                for _ in 0..exp.unsigned_abs() {
                    letters.push(l);
                }
            }
            b'1' if letters.is_empty() && bytes[i + 1..].iter().all(|b| b.is_ascii_whitespace()) => i += 1,
            c if c.is_ascii_lowercase() => {
                letters.push(Letter::gen((c - b'a') as usize + 1));
                i += 1;
            }
            c if c.is_ascii_uppercase() => {
                letters.push(Letter::inv_gen((c - b'A') as usize + 1));
                i += 1;
            }
            _ => return Err(syntax(i, &format!("unexpected character '{}'", c as char))),
        }
    }
    Ok(Word::from_letters(letters))
}

/// Iterator over all freely reduced words of length `<= max_len` in shortlex order.
#[derive(Debug, Clone)]
pub struct ReducedWords {
    alphabet: usize,
    max_len: usize,
    codes: Vec<usize>,
    started: bool,
    pending: bool,
    done: bool,
}

impl ReducedWords {
    pub fn new(rank: Rank, max_len: usize) -> Self {
        ReducedWords { alphabet: 2 * rank.get(), max_len, codes: Vec::new(), started: false, pending: false, done: false }
    }

    /// Starts at the first word of length exactly `len`, ignoring shorter ones.
    pub fn from_length(rank: Rank, len: usize, max_len: usize) -> Self {
        let mut it = ReducedWords::new(rank, max_len);
        if len > 0 {
            it.started = true;
            if len > max_len {
                it.done = true;
            } else {
                it.fill_minimal(len, 0);
                it.pending = true;
            }
        }
        it
    }

    fn cancels(a: usize, b: usize) -> bool {
        a / 2 == b / 2 && a != b
    }

    fn fill_minimal(&mut self, len: usize, from: usize) {
        self.codes.truncate(from);
        while self.codes.len() < len {
            let c = match self.codes.last() {
                Some(&p) if Self::cancels(p, 0) => 1,
                _ => 0,
            };
            self.codes.push(c);
        }
    }

    fn advance(&mut self) -> bool {
        let len = self.codes.len();
        let mut pos = len;
        while pos > 0 {
            pos -= 1;
            let mut c = self.codes[pos] + 1;
            if pos > 0 && c < self.alphabet && Self::cancels(self.codes[pos - 1], c) {
                c += 1;
            }
            if c < self.alphabet {
                self.codes[pos] = c;
                self.fill_minimal(len, pos + 1);
                return true;
            }
        }
        if len + 1 > self.max_len {
            return false;
        }
        self.fill_minimal(len + 1, 0);
        true
    }

    fn current(&self) -> Word {
        Word::from_reduced_unchecked(self.codes.iter().map(|&c| Letter::from_code(c)).collect())
    }
}

impl Iterator for ReducedWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(Word::identity());
        }
        if self.pending {
            self.pending = false;
            return Some(self.current());
        }
        if self.codes.is_empty() {
            if self.max_len == 0 {
                self.done = true;
                return None;
            }
            self.fill_minimal(1, 0);
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        Some(self.current())
    }
}

/// Every freely reduced word of length `<= max_len`, shortlex order.
pub fn enumerate_reduced(rank: Rank, max_len: usize) -> ReducedWords {
    ReducedWords::new(rank, max_len)
}

/// Number of reduced words of length exactly `k`: `2n(2n-1)^(k-1)`.
pub fn reduced_count(rank: Rank, k: usize) -> u128 {
    if k == 0 {
        return 1;
    }
    let n = rank.get() as u128;
    2 * n * (2 * n - 1).pow(k as u32 - 1)
}

/// A uniformly random reduced word of exactly `len` letters.
pub fn random_word_of_length<R: rand::Rng + ?Sized>(rng: &mut R, rank: Rank, len: usize) -> Word {
    let alphabet = 2 * rank.get();
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter::from_code(rng.gen_range(0..alphabet));
        if letters.last() != Some(&l.inverse()) {
            letters.push(l);
        }
    }
    Word { letters }
}

/// A random reduced word whose length is uniform in `0..=max_len`.
pub fn random_word<R: rand::Rng + ?Sized>(rng: &mut R, rank: Rank, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    random_word_of_length(rng, rank, len)
}
