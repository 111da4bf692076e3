//! Endomorphisms of `F_n` and the recognition algorithms built on them:
//! Nielsen reduction (automorphisms), Stallings folding (monomorphisms),
//! Whitehead minimization and peak-reduction search (automorphic orbits).

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::groupring::{IntMatrix, LaurentElement, RingElement};
use crate::words::{parse_unranked, push_reduced, Letter, Rank, ReducedWords, Word};

/// Default node budget for orbit searches.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// `x_i -> images[i-1]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Endomorphism {
    rank: Rank,
    images: Vec<Word>,
}

impl Endomorphism {
    pub fn new(rank: Rank, images: Vec<Word>) -> Result<Self> {
        if images.len() != rank.get() {
            return Err(Error::RankMismatch { expected: rank.get(), found: images.len() });
        }
        for w in &images {
            w.check_rank(rank)?;
        }
        Ok(Endomorphism { rank, images })
    }

    pub fn identity(rank: Rank) -> Self {
        Endomorphism { rank, images: (1..=rank.get()).map(Word::gen).collect() }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &Word {
        &self.images[i - 1]
    }

    pub(crate) fn apply_into(&self, letters: &[Letter], out: &mut Vec<Letter>) {
        out.clear();
        for &l in letters {
            let img = self.images[l.generator() - 1].letters();
            if l.is_inverse() {
                for &x in img.iter().rev() {
                    push_reduced(out, x.inverse());
                }
            } else {
                for &x in img {
                    push_reduced(out, x);
                }
            }
        }
    }

    /// Homomorphic image of a word. Letters beyond the rank are not allowed.
    pub fn apply(&self, w: &Word) -> Word {
        let mut out = Vec::with_capacity(w.len());
        self.apply_into(w.letters(), &mut out);
        Word::from_reduced_unchecked(out)
    }

    pub fn try_apply(&self, w: &Word) -> Result<Word> {
        w.check_rank(self.rank)?;
        Ok(self.apply(w))
    }

    /// Linear extension to `ZF`.
    pub fn apply_ring(&self, a: &RingElement) -> RingElement {
        a.map_words(|w| self.apply(w))
    }

    /// `(self ∘ other)(x_i) = self(other(x_i))`.
    pub fn compose(&self, other: &Endomorphism) -> Result<Endomorphism> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { expected: self.rank.get(), found: other.rank.get() });
        }
        Ok(Endomorphism { rank: self.rank, images: other.images.iter().map(|w| self.apply(w)).collect() })
    }

    /// Integer matrix of exponent sums, row `i` = abelianization of `φ(x_i)`.
    pub fn abelian_matrix(&self) -> IntMatrix {
        IntMatrix::from_i64(self.images.iter().map(|w| w.abelianization(self.rank)).collect())
    }

    /// Determinant of the abelianized Jacobian `J_φ` over `Z[A_n]`.
    pub fn abelianized_jacobian_det(&self) -> LaurentElement {
        crate::fox::jacobian(self).abelianize().det().expect("square")
    }

    pub fn is_automorphism(&self) -> bool {
        is_automorphism(self)
    }

    pub fn is_monomorphism(&self) -> bool {
        is_monomorphism(self)
    }

    /// Parses `"x1->ab; x2->B"`. The rank is the number of entries.
    pub fn parse(text: &str) -> Result<Self> {
        let entries: Vec<&str> = text.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
        let rank = Rank::new(entries.len())?;
        Self::parse_entries(&entries, rank)
    }

    /// Parses with an explicit rank; unlisted generators are fixed.
    pub fn parse_with_rank(text: &str, rank: Rank) -> Result<Self> {
        let entries: Vec<&str> = text.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
        Self::parse_entries(&entries, rank)
    }

    fn parse_entries(entries: &[&str], rank: Rank) -> Result<Self> {
        let mut images: Vec<Option<Word>> = vec![None; rank.get()];
        for e in entries {
            let (lhs, rhs) = e.split_once("->").ok_or_else(|| Error::Syntax {
                position: 0,
                message: format!("expected 'x<i>-><word>' in '{e}'"),
            })?;
            let lhs = lhs.trim();
            let g = lhs
                .strip_prefix('x')
                .and_then(|d| d.parse::<usize>().ok())
                .or_else(|| {
                    let b = lhs.as_bytes();
                    (b.len() == 1 && b[0].is_ascii_lowercase()).then(|| (b[0] - b'a') as usize + 1)
                })
                .ok_or_else(|| Error::Syntax { position: 0, message: format!("bad generator '{lhs}'") })?;
            if g == 0 || g > rank.get() {
                return Err(Error::GeneratorOutOfRank { generator: g, rank: rank.get() });
            }
            if images[g - 1].is_some() {
                return Err(Error::Syntax { position: 0, message: format!("x{g} assigned twice") });
            }
            let w = parse_unranked(rhs)?;
            w.check_rank(rank)?;
            images[g - 1] = Some(w);
        }
        let images = images.into_iter().enumerate().map(|(i, w)| w.unwrap_or_else(|| Word::gen(i + 1))).collect();
        Endomorphism::new(rank, images)
    }
}

impl fmt::Display for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().enumerate().map(|(i, w)| format!("x{}->{}", i + 1, w)).collect();
        f.write_str(&parts.join("; "))
    }
}

impl fmt::Debug for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Endomorphism({self})")
    }
}

// ---------------------------------------------------------------------------
// Nielsen reduction
// ---------------------------------------------------------------------------

/// Elementary Nielsen transformation on a tuple (0-based positions).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NielsenMove {
    Invert(usize),
    Swap(usize, usize),
    /// `u_target <- u_target * u_by^(±1)`
    RightMul { target: usize, by: usize, inverse: bool },
    /// `u_target <- u_by^(±1) * u_target`
    LeftMul { target: usize, by: usize, inverse: bool },
}

impl NielsenMove {
    pub fn apply(&self, tuple: &mut [Word]) {
        match *self {
            NielsenMove::Invert(i) => tuple[i] = tuple[i].inverse(),
            NielsenMove::Swap(i, j) => tuple.swap(i, j),
            NielsenMove::RightMul { target, by, inverse } => {
                let f = if inverse { tuple[by].inverse() } else { tuple[by].clone() };
                tuple[target] = tuple[target].multiply(&f);
            }
            NielsenMove::LeftMul { target, by, inverse } => {
                let f = if inverse { tuple[by].inverse() } else { tuple[by].clone() };
                tuple[target] = f.multiply(&tuple[target]);
            }
        }
    }
}

/// Replays a Nielsen move log.
pub fn replay_nielsen(tuple: &[Word], log: &[NielsenMove]) -> Vec<Word> {
    let mut t = tuple.to_vec();
    for m in log {
        m.apply(&mut t);
    }
    t
}

/// Applies length-reducing elementary Nielsen moves until none remains, then
/// replaces each entry by the shortlex-smaller of itself and its inverse.
///
/// Among reducing moves the one with the largest decrease wins, ties going
/// to the first in (target, by, sign, side) order.
pub fn nielsen_reduce(tuple: &[Word]) -> (Vec<Word>, Vec<NielsenMove>) {
    let mut t = tuple.to_vec();
    let mut log = Vec::new();
    let m = t.len();
    loop {
        let mut best: Option<(usize, NielsenMove)> = None;
        for target in 0..m {
            for by in 0..m {
                if by == target || t[by].is_identity() {
                    continue;
                }
                for inverse in [false, true] {
                    let f = if inverse { t[by].inverse() } else { t[by].clone() };
                    let right = t[target].multiply(&f).len();
                    let left = f.multiply(&t[target]).len();
                    let cur = t[target].len();
                    for (len, mv) in [
                        (right, NielsenMove::RightMul { target, by, inverse }),
                        (left, NielsenMove::LeftMul { target, by, inverse }),
                    ] {
                        if len < cur {
                            let dec = cur - len;
                            if best.is_none_or(|(d, _)| dec > d) {
                                best = Some((dec, mv));
                            }
                        }
                    }
                }
            }
        }
        match best {
            Some((_, mv)) => {
                mv.apply(&mut t);
                log.push(mv);
            }
            None => break,
        }
    }
    for (i, ti) in t.iter_mut().enumerate() {
        let inv = ti.inverse();
        if inv < *ti {
            *ti = inv;
            log.push(NielsenMove::Invert(i));
        }
    }
    (t, log)
}

/// True iff `φ` is an automorphism: the Nielsen-reduced image tuple is a
/// signed permutation of the generators. A unimodular abelianization is
/// checked first.
pub fn is_automorphism(phi: &Endomorphism) -> bool {
    let det = phi.abelian_matrix().det().expect("square");
    if det.abs() != BigInt::from(1) {
        return false;
    }
    let (reduced, _) = nielsen_reduce(phi.images());
    let mut seen = vec![false; phi.rank().get()];
    reduced.iter().all(|w| {
        w.len() == 1 && {
            let g = w.letters()[0].generator();
            !std::mem::replace(&mut seen[g - 1], true)
        }
    })
}

// ---------------------------------------------------------------------------
// Stallings folding
// ---------------------------------------------------------------------------

/// Folded core graph of a finitely generated subgroup, base vertex 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldedGraph {
    pub num_vertices: usize,
    /// `(from, generator, to)` for positively labelled edges.
    pub edges: Vec<(usize, usize, usize)>,
}

impl FoldedGraph {
    /// Rank of the fundamental group, `E - V + 1`.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.num_vertices
    }

    /// The bouquet of `n` loops at the base, i.e. the subgroup is all of `F_n`.
    pub fn is_whole_group(&self, rank: Rank) -> bool {
        self.num_vertices == 1 && {
            let mut gens: Vec<usize> = self.edges.iter().map(|e| e.1).collect();
            gens.sort_unstable();
            gens == (1..=rank.get()).collect::<Vec<_>>()
        }
    }

    /// Reads `w` from the base vertex; true iff it returns to the base.
    pub fn contains(&self, w: &Word) -> bool {
        let mut out: HashMap<(usize, i16), usize> = HashMap::new();
        for &(a, g, b) in &self.edges {
            out.insert((a, g as i16), b);
            out.insert((b, -(g as i16)), a);
        }
        let mut v = 0;
        for l in w.letters() {
            match out.get(&(v, l.raw())) {
                Some(&next) => v = next,
                None => return false,
            }
        }
        v == 0
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Builds the bouquet of generator loops and folds it to an immersion.
pub fn fold(generators: &[Word]) -> FoldedGraph {
    let mut num = 1usize;
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for w in generators {
        let letters = w.letters();
        if letters.is_empty() {
            continue;
        }
        let mut cur = 0;
        for (k, l) in letters.iter().enumerate() {
            let next = if k + 1 == letters.len() {
                0
            } else {
                num += 1;
                num - 1
            };
            if l.is_inverse() {
                edges.push((next, l.generator(), cur));
            } else {
                edges.push((cur, l.generator(), next));
            }
            cur = next;
        }
    }
    let mut parent: Vec<usize> = (0..num).collect();
    loop {
        let mut changed = false;
        let mut seen: HashMap<(usize, i64), usize> = HashMap::new();
        for &(a, g, b) in &edges {
            let (a, b) = (find(&mut parent, a), find(&mut parent, b));
            for (key, target) in [((a, g as i64), b), ((b, -(g as i64)), a)] {
                match seen.entry(key) {
                    Entry::Vacant(v) => {
                        v.insert(target);
                    }
                    Entry::Occupied(o) => {
                        let t = find(&mut parent, *o.get());
                        let u = find(&mut parent, target);
                        if t != u {
                            let (lo, hi) = if t < u { (t, u) } else { (u, t) };
                            parent[hi] = lo;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut canon: Vec<(usize, usize, usize)> =
        edges.iter().map(|&(a, g, b)| (find(&mut parent, a), g, find(&mut parent, b))).collect();
    canon.sort_unstable();
    canon.dedup();
    let mut reps: Vec<usize> = (0..num).map(|v| find(&mut parent, v)).collect();
    reps.sort_unstable();
    reps.dedup();
    let index: HashMap<usize, usize> = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    FoldedGraph {
        num_vertices: reps.len(),
        edges: canon.into_iter().map(|(a, g, b)| (index[&a], g, index[&b])).collect(),
    }
}

/// Rank of the subgroup generated by `generators`.
pub fn subgroup_rank(generators: &[Word]) -> usize {
    fold(generators).rank()
}

/// Injective iff the images generate a free subgroup of rank `n` (free groups are Hopfian).
pub fn is_monomorphism(phi: &Endomorphism) -> bool {
    subgroup_rank(phi.images()) == phi.rank().get()
}

// ---------------------------------------------------------------------------
// Whitehead automorphisms
// ---------------------------------------------------------------------------

/// What a type II Whitehead automorphism with multiplier `a` does to a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WhiteheadAction {
    Fix,
    /// `x -> x a`
    RightMul,
    /// `x -> a^-1 x`
    LeftMulInv,
    /// `x -> a^-1 x a`
    Conjugate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WhiteheadMove {
    /// Type I: `x_i -> images[i-1]`, a signed permutation of the letters.
    Permutation(Vec<Letter>),
    /// Type II: multiplier `a` fixed, every other generator acted on per `actions[i-1]`.
    Multiplier { multiplier: Letter, actions: Vec<WhiteheadAction> },
}

impl WhiteheadMove {
    pub fn to_endomorphism(&self, rank: Rank) -> Endomorphism {
        let images = match self {
            WhiteheadMove::Permutation(p) => p.iter().map(|&l| Word::letter(l)).collect(),
            WhiteheadMove::Multiplier { multiplier, actions } => {
                let a = Word::letter(*multiplier);
                let ai = Word::letter(multiplier.inverse());
                (1..=rank.get())
                    .map(|i| {
                        let x = Word::gen(i);
                        if i == multiplier.generator() {
                            return x;
                        }
                        match actions[i - 1] {
                            WhiteheadAction::Fix => x,
                            WhiteheadAction::RightMul => x.multiply(&a),
                            WhiteheadAction::LeftMulInv => ai.multiply(&x),
                            WhiteheadAction::Conjugate => ai.multiply(&x).multiply(&a),
                        }
                    })
                    .collect()
            }
        };
        Endomorphism { rank, images }
    }

    pub fn inverse(&self) -> WhiteheadMove {
        match self {
            WhiteheadMove::Permutation(p) => {
                let mut inv = vec![Letter::gen(1); p.len()];
                for (i, &l) in p.iter().enumerate() {
                    inv[l.generator() - 1] = Letter::new(i + 1, l.is_inverse());
                }
                WhiteheadMove::Permutation(inv)
            }
            WhiteheadMove::Multiplier { multiplier, actions } => {
                WhiteheadMove::Multiplier { multiplier: multiplier.inverse(), actions: actions.clone() }
            }
        }
    }
}

impl fmt::Display for WhiteheadMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WhiteheadMove::Permutation(p) => {
                let parts: Vec<String> = p.iter().enumerate().map(|(i, l)| format!("x{}->{l}", i + 1)).collect();
                write!(f, "perm({})", parts.join(", "))
            }
            WhiteheadMove::Multiplier { multiplier, actions } => {
                let parts: Vec<String> = actions
                    .iter()
                    .enumerate()
                    .filter(|(i, a)| **a != WhiteheadAction::Fix && i + 1 != multiplier.generator())
                    .map(|(i, a)| format!("x{}:{a:?}", i + 1))
                    .collect();
                write!(f, "whitehead({multiplier}; {})", parts.join(", "))
            }
        }
    }
}

/// All non-identity Whitehead moves of a rank together with their endomorphisms.
#[derive(Debug)]
pub struct WhiteheadTable {
    pub rank: Rank,
    pub type_one: Vec<(WhiteheadMove, Endomorphism)>,
    pub type_two: Vec<(WhiteheadMove, Endomorphism)>,
}

impl WhiteheadTable {
    fn build(rank: Rank) -> Self {
        let n = rank.get();
        let mut type_two = Vec::new();
        let acts = [WhiteheadAction::Fix, WhiteheadAction::RightMul, WhiteheadAction::LeftMulInv, WhiteheadAction::Conjugate];
        for a in rank.letters() {
            let total = 4usize.pow(n as u32 - 1);
            for mut code in 1..total {
                let mut actions = vec![WhiteheadAction::Fix; n];
                for (i, slot) in actions.iter_mut().enumerate() {
                    if i + 1 == a.generator() {
                        continue;
                    }
                    *slot = acts[code % 4];
                    code /= 4;
                }
                let mv = WhiteheadMove::Multiplier { multiplier: a, actions };
                let e = mv.to_endomorphism(rank);
                type_two.push((mv, e));
            }
        }
        let mut type_one = Vec::new();
        for perm in permutations(n) {
            for signs in 0..(1usize << n) {
                let p: Vec<Letter> = perm.iter().enumerate().map(|(i, &g)| Letter::new(g + 1, signs >> i & 1 == 1)).collect();
                if signs == 0 && perm.iter().enumerate().all(|(i, &g)| i == g) {
                    continue;
                }
                let mv = WhiteheadMove::Permutation(p);
                let e = mv.to_endomorphism(rank);
                type_one.push((mv, e));
            }
        }
        WhiteheadTable { rank, type_one, type_two }
    }

    /// Shared table for a rank, built on first use.
    pub fn for_rank(rank: Rank) -> Arc<WhiteheadTable> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<WhiteheadTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("whitehead cache poisoned");
        guard.entry(rank.get()).or_insert_with(|| Arc::new(WhiteheadTable::build(rank))).clone()
    }

    pub fn all_moves(&self) -> impl Iterator<Item = &(WhiteheadMove, Endomorphism)> {
        self.type_one.iter().chain(self.type_two.iter())
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Number of leading letters that cancel cyclically.
fn cyclic_trim(letters: &[Letter]) -> usize {
    let n = letters.len();
    let mut k = 0;
    while 2 * k + 1 < n && letters[k] == letters[n - 1 - k].inverse() {
        k += 1;
    }
    k
}

// ---------------------------------------------------------------------------
// Orbit certificates
// ---------------------------------------------------------------------------

/// One automorphism in a certificate chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitStep {
    Whitehead(WhiteheadMove),
    /// Inner automorphism `w -> g w g^-1`.
    Conjugate(Word),
}

impl OrbitStep {
    pub fn to_endomorphism(&self, rank: Rank) -> Endomorphism {
        match self {
            OrbitStep::Whitehead(m) => m.to_endomorphism(rank),
            OrbitStep::Conjugate(g) => {
                Endomorphism { rank, images: (1..=rank.get()).map(|i| Word::gen(i).conjugate_by(g)).collect() }
            }
        }
    }

    pub fn apply(&self, w: &Word, rank: Rank) -> Word {
        match self {
            OrbitStep::Whitehead(m) => m.to_endomorphism(rank).apply(w),
            OrbitStep::Conjugate(g) => w.conjugate_by(g),
        }
    }

    pub fn inverse(&self) -> OrbitStep {
        match self {
            OrbitStep::Whitehead(m) => OrbitStep::Whitehead(m.inverse()),
            OrbitStep::Conjugate(g) => OrbitStep::Conjugate(g.inverse()),
        }
    }
}

impl fmt::Display for OrbitStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitStep::Whitehead(m) => m.fmt(f),
            OrbitStep::Conjugate(g) => write!(f, "conj({g})"),
        }
    }
}

/// A chain of automorphisms carrying `source` to `target` on linear words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitCertificate {
    pub rank: Rank,
    pub source: Word,
    pub target: Word,
    pub steps: Vec<OrbitStep>,
}

impl OrbitCertificate {
    fn trivial(rank: Rank, w: &Word) -> Self {
        OrbitCertificate { rank, source: w.clone(), target: w.clone(), steps: Vec::new() }
    }

    pub fn replay(&self, w: &Word) -> Word {
        self.steps.iter().fold(w.clone(), |acc, s| s.apply(&acc, self.rank))
    }

    /// Replaying the chain on `source` yields exactly `target`.
    pub fn verify(&self) -> bool {
        self.replay(&self.source) == self.target
    }

    pub fn inverse(&self) -> OrbitCertificate {
        OrbitCertificate {
            rank: self.rank,
            source: self.target.clone(),
            target: self.source.clone(),
            steps: self.steps.iter().rev().map(OrbitStep::inverse).collect(),
        }
    }

    /// Concatenates `self` (a -> b) with `next` (b -> c).
    pub fn then(mut self, next: OrbitCertificate) -> OrbitCertificate {
        debug_assert_eq!(self.target, next.source);
        self.steps.extend(next.steps);
        self.target = next.target;
        self
    }

    /// The composite automorphism `α` with `α(source) = target`.
    pub fn to_automorphism(&self) -> Endomorphism {
        self.steps
            .iter()
            .fold(Endomorphism::identity(self.rank), |acc, s| s.to_endomorphism(self.rank).compose(&acc).expect("same rank"))
    }

    fn push_conjugation(&mut self, g: Word) {
        if !g.is_identity() {
            self.target = self.target.conjugate_by(&g);
            self.steps.push(OrbitStep::Conjugate(g));
        }
    }

    fn push_move(&mut self, m: &WhiteheadMove, e: &Endomorphism) {
        self.target = e.apply(&self.target);
        self.steps.push(OrbitStep::Whitehead(m.clone()));
    }

    /// Conjugates the current target to its cyclic core.
    fn reduce_cyclically(&mut self) {
        let c = self.target.cyclic_reduce();
        self.push_conjugation(c.conjugator.inverse());
    }

    /// Rotates the (cyclically reduced) target left by `k` letters.
    fn rotate(&mut self, k: usize) {
        let p = self.target.prefix(k);
        self.push_conjugation(p.inverse());
    }
}

fn check_rank(w: &Word, rank: Rank) -> Result<()> {
    w.check_rank(rank)
}

/// Minimal cyclic length reachable from `core` by type II moves (no certificate).
/// Stops early once the length is at most `stop_at`.
pub(crate) fn minimize_fast(core: &[Letter], table: &WhiteheadTable, stop_at: usize) -> Vec<Letter> {
    let mut cur = core.to_vec();
    let mut buf = Vec::with_capacity(cur.len() * 2);
    'outer: while cur.len() > stop_at {
        for (_, e) in &table.type_two {
            e.apply_into(&cur, &mut buf);
            let k = cyclic_trim(&buf);
            if buf.len() - 2 * k < cur.len() {
                cur = buf[k..buf.len() - k].to_vec();
                continue 'outer;
            }
        }
        break;
    }
    cur
}

/// Whitehead-minimal cyclic representative of the orbit of `w`, with the
/// certificate carrying `w` to it.
pub fn whitehead_minimize(w: &Word, rank: Rank) -> Result<(Word, OrbitCertificate)> {
    check_rank(w, rank)?;
    let table = WhiteheadTable::for_rank(rank);
    let mut cert = OrbitCertificate::trivial(rank, w);
    cert.reduce_cyclically();
    let mut buf = Vec::new();
    'outer: loop {
        let cur_len = cert.target.len();
        for (m, e) in &table.type_two {
            e.apply_into(cert.target.letters(), &mut buf);
            let k = cyclic_trim(&buf);
            if buf.len() - 2 * k < cur_len {
                cert.push_move(m, e);
                cert.reduce_cyclically();
                continue 'outer;
            }
        }
        break;
    }
    Ok((cert.target.clone(), cert))
}

/// Cyclic length of a Whitehead-minimal element of the orbit.
pub fn minimal_orbit_length(w: &Word, rank: Rank) -> Result<usize> {
    check_rank(w, rank)?;
    let table = WhiteheadTable::for_rank(rank);
    let core = w.cyclic_reduce().core;
    Ok(minimize_fast(core.letters(), &table, 0).len())
}

/// Lexicographically least rotation and the rotation offset producing it.
pub fn canonical_rotation(w: &Word) -> (Word, usize) {
    let n = w.len();
    if n == 0 {
        return (Word::identity(), 0);
    }
    let l = w.letters();
    let mut best = 0;
    for k in 1..n {
        let cmp = (0..n).map(|i| l[(k + i) % n].cmp(&l[(best + i) % n])).find(|o| o.is_ne());
        if cmp == Some(std::cmp::Ordering::Less) {
            best = k;
        }
    }
    (w.rotate(best), best)
}

/// Why two words were shown to lie in different orbits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitDisproof {
    /// Whitehead-minimal lengths differ.
    MinimalLengths { left: usize, right: usize },
    /// The minimal-level component of the first word was exhausted without
    /// meeting the second.
    DistinctComponents { component_size: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitOutcome {
    Same(OrbitCertificate),
    Different(OrbitDisproof),
    BudgetExceeded { explored: usize },
}

impl OrbitOutcome {
    pub fn is_same(&self) -> bool {
        matches!(self, OrbitOutcome::Same(_))
    }
}

/// Breadth-first exploration of the minimal-level component of a
/// canonical cyclic word. Nodes are canonical rotations.
struct Component {
    parents: HashMap<Word, Option<(Word, usize)>>,
    order: Vec<Word>,
}

enum Explore {
    Found(Word),
    Exhausted,
    Budget,
}

fn explore(
    start: &Word,
    table: &WhiteheadTable,
    budget: usize,
    mut stop: impl FnMut(&Word) -> bool,
) -> (Component, Explore) {
    let moves: Vec<&(WhiteheadMove, Endomorphism)> = table.all_moves().collect();
    let mut comp = Component { parents: HashMap::new(), order: Vec::new() };
    comp.parents.insert(start.clone(), None);
    comp.order.push(start.clone());
    if stop(start) {
        return (comp, Explore::Found(start.clone()));
    }
    let mut queue = VecDeque::from([start.clone()]);
    let level = start.len();
    let mut buf = Vec::new();
    while let Some(node) = queue.pop_front() {
        for (idx, (_, e)) in moves.iter().enumerate() {
            e.apply_into(node.letters(), &mut buf);
            let k = cyclic_trim(&buf);
            if buf.len() - 2 * k != level {
                continue;
            }
            let core = Word::from_reduced_unchecked(buf[k..buf.len() - k].to_vec());
            let (canon, _) = canonical_rotation(&core);
            if comp.parents.contains_key(&canon) {
                continue;
            }
            comp.parents.insert(canon.clone(), Some((node.clone(), idx)));
            comp.order.push(canon.clone());
            if stop(&canon) {
                return (comp, Explore::Found(canon));
            }
            if comp.order.len() > budget {
                return (comp, Explore::Budget);
            }
            queue.push_back(canon);
        }
    }
    (comp, Explore::Exhausted)
}

/// Certificate from the canonical root of `comp` to `node`.
fn path_certificate(comp: &Component, table: &WhiteheadTable, root: &Word, node: &Word) -> OrbitCertificate {
    let moves: Vec<&(WhiteheadMove, Endomorphism)> = table.all_moves().collect();
    let mut edges = Vec::new();
    let mut cur = node.clone();
    while let Some(Some((parent, idx))) = comp.parents.get(&cur) {
        edges.push(*idx);
        cur = parent.clone();
    }
    edges.reverse();
    let mut cert = OrbitCertificate::trivial(table.rank, root);
    for idx in edges {
        let (m, e) = moves[idx];
        cert.push_move(m, e);
        cert.reduce_cyclically();
        let (_, k) = canonical_rotation(&cert.target);
        cert.rotate(k);
    }
    debug_assert_eq!(&cert.target, node);
    cert
}

/// Minimizes `w` and rotates it to canonical form, with certificate.
fn to_canonical(w: &Word, rank: Rank) -> Result<OrbitCertificate> {
    let (_, mut cert) = whitehead_minimize(w, rank)?;
    let (_, k) = canonical_rotation(&cert.target);
    cert.rotate(k);
    Ok(cert)
}

/// Decides whether `u` and `v` lie in the same `Aut F_n` orbit, exploring at
/// most `budget` cyclic words at the minimal level.
pub fn same_orbit(u: &Word, v: &Word, rank: Rank, budget: usize) -> Result<OrbitOutcome> {
    check_rank(u, rank)?;
    check_rank(v, rank)?;
    let cu = to_canonical(u, rank)?;
    let cv = to_canonical(v, rank)?;
    if cu.target.len() != cv.target.len() {
        return Ok(OrbitOutcome::Different(OrbitDisproof::MinimalLengths {
            left: cu.target.len(),
            right: cv.target.len(),
        }));
    }
    let table = WhiteheadTable::for_rank(rank);
    let goal = cv.target.clone();
    let (comp, result) = explore(&cu.target, &table, budget, |w| *w == goal);
    match result {
        Explore::Found(node) => {
            let mid = path_certificate(&comp, &table, &cu.target, &node);
            let cert = cu.then(mid).then(cv.inverse());
            debug_assert!(cert.verify());
            Ok(OrbitOutcome::Same(cert))
        }
        Explore::Exhausted => {
            Ok(OrbitOutcome::Different(OrbitDisproof::DistinctComponents { component_size: comp.order.len() }))
        }
        Explore::Budget => Ok(OrbitOutcome::BudgetExceeded { explored: comp.order.len() }),
    }
}

/// Bound on outer rank: fewest distinct generators among minimal-level orbit elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportBound {
    pub support: usize,
    /// True when the whole minimal-level component was explored.
    pub exact: bool,
    pub witness: Word,
    pub explored: usize,
}

pub fn min_generator_support(w: &Word, rank: Rank, budget: usize) -> Result<SupportBound> {
    let cert = to_canonical(w, rank)?;
    let table = WhiteheadTable::for_rank(rank);
    let mut best = (cert.target.support().len(), cert.target.clone());
    let (comp, result) = explore(&cert.target, &table, budget, |x| {
        let s = x.support().len();
        if s < best.0 {
            best = (s, x.clone());
        }
        false
    });
    Ok(SupportBound {
        support: best.0,
        exact: matches!(result, Explore::Exhausted),
        witness: best.1,
        explored: comp.order.len(),
    })
}

/// Searches for `v` in the orbit of `u` with `|v| <= max_len` whose image
/// `φ(v)` leaves the orbit. `None` means no witness up to the bound.
pub fn orbit_violation_witness(phi: &Endomorphism, u: &Word, max_len: usize, budget: usize) -> Result<Option<Word>> {
    let rank = phi.rank();
    if rank.get() != 2 {
        return Err(Error::Precondition(format!("orbit witness search needs rank 2, got {rank}")));
    }
    check_rank(u, rank)?;
    let level = minimal_orbit_length(u, rank)?;
    let in_orbit = |x: &Word| -> Result<bool> {
        if minimal_orbit_length(x, rank)? != level {
            return Ok(false);
        }
        match same_orbit(x, u, rank, budget)? {
            OrbitOutcome::Same(_) => Ok(true),
            OrbitOutcome::Different(_) => Ok(false),
            OrbitOutcome::BudgetExceeded { .. } => Err(Error::BudgetExhausted(budget)),
        }
    };
    for v in ReducedWords::new(rank, max_len) {
        if v.len() < level || !in_orbit(&v)? {
            continue;
        }
        if !in_orbit(&phi.apply(&v))? {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        parse_unranked(s).unwrap()
    }
    fn r(n: usize) -> Rank {
        Rank::new(n).unwrap()
    }
    fn map(s: &str) -> Endomorphism {
        Endomorphism::parse(s).unwrap()
    }

    fn example_32() -> Endomorphism {
        map("x1->aC; x2->cbC; x3->c; x4->d")
    }

    #[test]
    fn parse_and_display_maps() {
        let m = map("x1->a b; x2->B");
        assert_eq!(m.to_string(), "x1->ab; x2->B");
        assert_eq!(Endomorphism::parse(&m.to_string()).unwrap(), m);
        assert!(Endomorphism::parse("x1->a; x1->b").is_err());
        assert!(Endomorphism::parse("x1->c; x2->b").is_err());
        assert!(Endomorphism::parse("x1 a; x2->b").is_err());
        let partial = Endomorphism::parse_with_rank("x1->aa", r(3)).unwrap();
        assert_eq!(partial.images(), &[w("aa"), w("b"), w("c")]);
    }

    #[test]
    fn apply_examples() {
        let u = w("abAB").multiply(&w("cdCD"));
        let v = w("abAB").multiply(&w("bcBC")).multiply(&w("cdCD"));
        assert_eq!(example_32().apply(&u), v);
        assert_eq!(Endomorphism::identity(r(2)).apply(&w("abAAB")), w("abAAB"));
        assert_eq!(map("x1->aa; x2->b").apply(&w("ab")), w("aab"));
    }

    #[test]
    fn compose_examples() {
        let phi = map("x1->ab; x2->B");
        assert_eq!(phi.compose(&Endomorphism::identity(r(2))).unwrap(), phi);
        let t = map("x1->ab; x2->b");
        assert_eq!(t.compose(&t).unwrap(), map("x1->abb; x2->b"));
        let t_inv = map("x1->aB; x2->b");
        assert_eq!(t.compose(&t_inv).unwrap(), Endomorphism::identity(r(2)));
        assert!(t.compose(&Endomorphism::identity(r(3))).is_err());
    }

    #[test]
    fn nielsen_examples() {
        let (t, log) = nielsen_reduce(&[w("ab"), w("b")]);
        assert_eq!(t, vec![w("a"), w("b")]);
        assert_eq!(replay_nielsen(&[w("ab"), w("b")], &log), t);
        let (t, _) = nielsen_reduce(&[w("aa"), w("b")]);
        assert_eq!(t, vec![w("aa"), w("b")]);
        let (t, log) = nielsen_reduce(&[w("abA"), w("a")]);
        assert_eq!(t, vec![w("b"), w("a")]);
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn automorphism_examples() {
        assert!(is_automorphism(&example_32()));
        assert!(!is_automorphism(&map("x1->aa; x2->b")));
        assert!(is_automorphism(&Endomorphism::identity(r(3))));
        assert!(!is_automorphism(&map("x1->abAB; x2->b")));
    }

    #[test]
    fn folding_examples() {
        assert_eq!(subgroup_rank(&[w("a"), w("b")]), 2);
        assert_eq!(subgroup_rank(&[w("aa"), w("aaa")]), 1);
        assert_eq!(subgroup_rank(&[w("aa"), w("b"), w("abA")]), 3);
        assert_eq!(subgroup_rank(&[Word::identity(), w("ab")]), 1);
        let g = fold(&[w("ab"), w("b")]);
        assert!(g.is_whole_group(r(2)));
        assert!(g.contains(&w("aBBa")));
        let h = fold(&[w("aa"), w("b")]);
        assert!(!h.contains(&w("a")));
        assert!(h.contains(&w("aabAA")));
    }

    #[test]
    fn monomorphism_examples() {
        assert!(is_monomorphism(&map("x1->aa; x2->b")));
        assert!(!is_monomorphism(&map("x1->a; x2->a")));
        assert!(is_monomorphism(&example_32()));
    }

    #[test]
    fn minimize_examples() {
        let (m, cert) = whitehead_minimize(&w("abA"), r(2)).unwrap();
        assert_eq!(m.len(), 1);
        assert!(cert.verify());
        let (m, cert) = whitehead_minimize(&w("aabbb"), r(2)).unwrap();
        assert_eq!(m.len(), 5);
        assert!(cert.verify());
        assert_eq!(minimal_orbit_length(&w("abAB"), r(2)).unwrap(), 4);
        let long = w("abAB").conjugate_by(&w("ba"));
        let (m, cert) = whitehead_minimize(&example_32().apply(&long), r(4)).unwrap();
        assert_eq!(m.len(), 4);
        assert!(cert.verify());
        assert_eq!(cert.to_automorphism().apply(&cert.source), cert.target);
    }

    #[test]
    fn same_orbit_examples() {
        let u = w("abAB").multiply(&w("cdCD"));
        let v = w("abAB").multiply(&w("bcBC")).multiply(&w("cdCD"));
        match same_orbit(&u, &v, r(4), DEFAULT_BUDGET).unwrap() {
            OrbitOutcome::Same(cert) => {
                assert!(cert.verify());
                let alpha = cert.to_automorphism();
                assert!(is_automorphism(&alpha));
                assert_eq!(alpha.apply(&u), v);
            }
            other => panic!("expected same orbit, got {other:?}"),
        }
        assert!(same_orbit(&w("a"), &w("ab"), r(2), 100).unwrap().is_same());
        assert_eq!(
            same_orbit(&w("a"), &w("aa"), r(2), 100).unwrap(),
            OrbitOutcome::Different(OrbitDisproof::MinimalLengths { left: 1, right: 2 })
        );
        // [a,b] and a^2 b^2: both minimal at length 4
        assert!(matches!(
            same_orbit(&w("abAB"), &w("aabb"), r(2), DEFAULT_BUDGET).unwrap(),
            OrbitOutcome::Different(OrbitDisproof::DistinctComponents { .. })
        ));
        assert!(matches!(
            same_orbit(&w("abAB"), &w("aabb"), r(2), 1).unwrap(),
            OrbitOutcome::BudgetExceeded { .. } | OrbitOutcome::Different(_)
        ));
    }

    #[test]
    fn support_examples() {
        let s = min_generator_support(&w("abA"), r(2), DEFAULT_BUDGET).unwrap();
        assert_eq!((s.support, s.exact), (1, true));
        let s = min_generator_support(&w("abAB"), r(2), DEFAULT_BUDGET).unwrap();
        assert_eq!((s.support, s.exact), (2, true));
        let u4 = w("abAB").multiply(&w("cdCD"));
        let s = min_generator_support(&u4, r(4), DEFAULT_BUDGET).unwrap();
        assert_eq!((s.support, s.exact), (4, true));
    }

    #[test]
    fn witness_examples() {
        let sq = map("x1->aa; x2->b");
        assert_eq!(orbit_violation_witness(&sq, &w("a"), 4, DEFAULT_BUDGET).unwrap(), Some(w("a")));
        let into_derived = map("x1->abAB; x2->b");
        assert_eq!(orbit_violation_witness(&into_derived, &w("a"), 4, DEFAULT_BUDGET).unwrap(), Some(w("a")));
        let aut = map("x1->ab; x2->b");
        assert_eq!(orbit_violation_witness(&aut, &w("a"), 5, DEFAULT_BUDGET).unwrap(), None);
        assert!(orbit_violation_witness(&example_32(), &w("a"), 2, 10).is_err());
    }

    fn elementary(rank: Rank, kind: usize, i: usize, j: usize) -> Endomorphism {
        let n = rank.get();
        let mut images: Vec<Word> = (1..=n).map(Word::gen).collect();
        let (i, j) = (i % n, j % n);
        let j = if j == i { (j + 1) % n } else { j };
        match kind % 4 {
            0 => images[i] = images[i].multiply(&Word::gen(j + 1)),
            1 => images[i] = Word::gen(j + 1).inverse().multiply(&images[i]),
            2 => images[i] = images[i].inverse(),
            _ => images.swap(i, j),
        }
        Endomorphism::new(rank, images).unwrap()
    }

    fn random_aut(rank: Rank) -> impl Strategy<Value = Endomorphism> {
        prop::collection::vec((0usize..4, 0usize..8, 0usize..8), 1..7).prop_map(move |steps| {
            steps
                .into_iter()
                .fold(Endomorphism::identity(rank), |acc, (k, i, j)| elementary(rank, k, i, j).compose(&acc).unwrap())
        })
    }

    fn word_strategy(n: usize, max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(0..2 * n, 0..=max).prop_map(|codes| Word::from_letters(codes.into_iter().map(Letter::from_code)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn automorphisms_are_recognized(phi in random_aut(r(3))) {
            prop_assert!(is_automorphism(&phi));
            prop_assert!(is_monomorphism(&phi));
            prop_assert!(fold(phi.images()).is_whole_group(r(3)));
            prop_assert!(phi.abelianized_jacobian_det().is_unit().is_some());
        }

        #[test]
        fn nielsen_agrees_with_folding(images in prop::collection::vec(word_strategy(2, 4), 2)) {
            let phi = Endomorphism::new(r(2), images).unwrap();
            prop_assert_eq!(is_automorphism(&phi), fold(phi.images()).is_whole_group(r(2)));
        }

        #[test]
        fn minimal_length_is_orbit_invariant(phi in random_aut(r(2)), x in word_strategy(2, 8)) {
            let a = minimal_orbit_length(&x, r(2)).unwrap();
            let b = minimal_orbit_length(&phi.apply(&x), r(2)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn minimize_certificate_replays(x in word_strategy(3, 10)) {
            let (m, cert) = whitehead_minimize(&x, r(3)).unwrap();
            prop_assert!(cert.verify());
            prop_assert_eq!(&cert.target, &m);
            prop_assert_eq!(cert.to_automorphism().apply(&x), m);
        }

        #[test]
        fn subgroup_rank_invariant_under_nielsen(
            gens in prop::collection::vec(word_strategy(2, 4), 3),
            moves in prop::collection::vec((0usize..3, 0usize..3, any::<bool>(), any::<bool>()), 0..5),
        ) {
            let before = subgroup_rank(&gens);
            let mut t = gens.clone();
            for (target, by, inverse, right) in moves {
                if target == by { continue; }
                let mv = if right {
                    NielsenMove::RightMul { target, by, inverse }
                } else {
                    NielsenMove::LeftMul { target, by, inverse }
                };
                mv.apply(&mut t);
            }
            prop_assert_eq!(subgroup_rank(&t), before);
        }

        #[test]
        fn no_automorphism_sends_word_to_proper_power(phi in random_aut(r(2)), s in word_strategy(2, 6)) {
            let core = s.cyclic_reduce().core;
            prop_assume!(!core.is_identity());
            let is_proper_power = (1..core.len()).any(|d| core.len() % d == 0 && core.prefix(d).pow((core.len() / d) as i64) == core);
            prop_assume!(!is_proper_power);
            let image = phi.apply(&s);
            for k in 2..=4 {
                prop_assert_ne!(&image, &s.pow(k));
            }
        }
    }
}
