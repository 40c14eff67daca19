//! The group side: lattice elements of Z^n, symmetric generating sets,
//! word length on the Cayley graph, and the group algebra with
//! noncommutative coefficients in which images of the coaction live.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::ncalg::{NcPolynomial, SymbolId};

/// Upper bound on the number of lattice points a single word-length search
/// may visit before giving up.
pub const DEFAULT_SEARCH_LIMIT: usize = 4_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("generator {0} has length {1}, expected rank {2}")]
    RankMismatch(String, usize, usize),
    #[error("generating set is empty")]
    Empty,
    #[error("generating set contains the identity")]
    ContainsIdentity,
    #[error("generator {0} appears more than once")]
    Duplicate(String),
    #[error("generating set is not symmetric: {0} is present but {1} is not")]
    NotSymmetric(String, String),
    #[error("generators do not generate Z^{rank} (Smith invariants {invariants:?})")]
    NotGenerating { rank: usize, invariants: Vec<i64> },
    #[error("{0} is not a member of the generating set")]
    NotAGenerator(String),
    #[error("word length search for {0} exceeded {1} visited points")]
    SearchExhausted(String, usize),
    #[error("words have different sums: {0} vs {1}")]
    UnequalSums(String, String),
}

/// An element of the lattice Z^n.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(SmallVec<[i64; 4]>);

impl GroupElement {
    pub fn new(coords: &[i64]) -> Self {
        GroupElement(SmallVec::from_slice(coords))
    }

    pub fn zero(rank: usize) -> Self {
        GroupElement(SmallVec::from_elem(0, rank))
    }

    /// The i-th standard basis vector.
    pub fn basis(rank: usize, i: usize) -> Self {
        let mut e = Self::zero(rank);
        e.0[i] = 1;
        e
    }

    pub fn scalar(v: i64) -> Self {
        Self::new(&[v])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> Self {
        GroupElement(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.rank(), other.rank());
        GroupElement(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.rank(), other.rank());
        GroupElement(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> Self {
        GroupElement(self.0.iter().map(|c| c * k).collect())
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn max_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// True when the first nonzero coordinate is positive.
    pub fn is_positive(&self) -> bool {
        self.0.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
    }

    /// Number of nonzero coordinates.
    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|&&c| c != 0).count()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            write!(f, "(")?;
            for (i, c) in self.0.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite symmetric generating set of Z^n.
///
/// Generators are stored in a canonical order: positive representatives
/// sorted by l1 norm (ties broken by descending lexicographic order), each
/// followed by its negative. For Z this is a1, -a1, a2, -a2, ... with
/// 0 < a1 < a2 < ...
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSet {
    rank: usize,
    gens: Vec<GroupElement>,
}

impl GenSet {
    pub fn new(rank: usize, gens: Vec<GroupElement>) -> Result<Self, GroupError> {
        if rank == 0 {
            return Err(GroupError::ZeroRank);
        }
        if gens.is_empty() {
            return Err(GroupError::Empty);
        }
        for g in &gens {
            if g.rank() != rank {
                return Err(GroupError::RankMismatch(g.to_string(), g.rank(), rank));
            }
            if g.is_zero() {
                return Err(GroupError::ContainsIdentity);
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for g in &gens {
            if !seen.insert(g.clone()) {
                return Err(GroupError::Duplicate(g.to_string()));
            }
        }
        for g in &gens {
            if !seen.contains(&g.neg()) {
                return Err(GroupError::NotSymmetric(g.to_string(), g.neg().to_string()));
            }
        }
        let invariants = smith_invariants(&gens, rank);
        if invariants.len() != rank || invariants.iter().any(|&d| d != 1) {
            return Err(GroupError::NotGenerating { rank, invariants });
        }
        let mut positives: Vec<GroupElement> = gens.into_iter().filter(|g| g.is_positive()).collect();
        positives.sort_by(|a, b| a.l1_norm().cmp(&b.l1_norm()).then_with(|| b.cmp(a)));
        let ordered = positives.iter().flat_map(|g| [g.clone(), g.neg()]).collect();
        Ok(GenSet { rank, gens: ordered })
    }

    /// Builds a generating set of Z from positive integers, adding negatives.
    pub fn integers(positives: &[i64]) -> Result<Self, GroupError> {
        let gens = positives.iter().flat_map(|&a| [GroupElement::scalar(a), GroupElement::scalar(-a)]).collect();
        Self::new(1, gens)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gens(&self) -> &[GroupElement] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.gens.contains(g)
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.gens.iter().position(|x| x == g)
    }

    /// Positive representatives a1, a2, ..., in canonical order.
    pub fn positives(&self) -> Vec<GroupElement> {
        self.gens.iter().step_by(2).cloned().collect()
    }

    pub fn max_norm(&self) -> i64 {
        self.gens.iter().map(|g| g.max_norm()).max().unwrap_or(0)
    }

    /// Every generator has exactly one nonzero coordinate.
    pub fn is_axis_aligned(&self) -> bool {
        self.gens.iter().all(|g| g.support_size() == 1)
    }
}

/// Smith normal form invariants (nonzero diagonal entries, made positive) of
/// the integer matrix whose rows are the given vectors.
pub fn smith_invariants(rows: &[GroupElement], rank: usize) -> Vec<i64> {
    let mut m: Vec<Vec<i64>> = rows.iter().map(|r| r.coords().to_vec()).collect();
    let nrows = m.len();
    let mut diag = Vec::new();
    let mut top = 0;
    for col in 0..rank {
        if top >= nrows {
            break;
        }
        // Find a pivot anywhere in the remaining block.
        let pivot = (top..nrows)
            .flat_map(|r| (col..rank).map(move |c| (r, c)))
            .filter(|&(r, c)| m[r][c] != 0)
            .min_by_key(|&(r, c)| m[r][c].abs());
        let Some((pr, pc)) = pivot else { break };
        m.swap(top, pr);
        for row in m.iter_mut() {
            row.swap(col, pc);
        }
        loop {
            let mut done = true;
            let pivot = m[top].clone();
            for row in m.iter_mut().skip(top + 1) {
                let q = row[col] / pivot[col];
                if q != 0 {
                    for (x, p) in row.iter_mut().zip(&pivot).skip(col) {
                        *x -= q * p;
                    }
                }
                if row[col] != 0 {
                    done = false;
                }
            }
            for c in col + 1..rank {
                let q = m[top][c] / m[top][col];
                if q != 0 {
                    for row in m.iter_mut().skip(top) {
                        row[c] -= q * row[col];
                    }
                }
                if m[top][c] != 0 {
                    done = false;
                }
            }
            if done {
                // Enforce divisibility of the remaining block.
                let p = m[top][col];
                let bad = (top + 1..nrows)
                    .flat_map(|r| (col + 1..rank).map(move |c| (r, c)))
                    .find(|&(r, c)| m[r][c] % p != 0);
                match bad {
                    Some((r, _)) => {
                        let extra = m[r].clone();
                        for (x, v) in m[top].iter_mut().zip(&extra).skip(col) {
                            *x += v;
                        }
                        continue;
                    }
                    None => break,
                }
            }
            // Move the smallest nonzero entry of the pivot row/column to the pivot.
            let best_r = (top..nrows).filter(|&r| m[r][col] != 0).min_by_key(|&r| m[r][col].abs());
            let best_c = (col..rank).filter(|&c| m[top][c] != 0).min_by_key(|&c| m[top][c].abs());
            let (br, bc) = (best_r.unwrap_or(top), best_c.unwrap_or(col));
            if m[br][col].abs() <= m[top][bc].abs() {
                m.swap(top, br);
            } else {
                for row in m.iter_mut() {
                    row.swap(col, bc);
                }
            }
        }
        diag.push(m[top][col].abs());
        top += 1;
    }
    diag
}

/// Breadth-first word length of `g`.
pub fn word_length(g: &GroupElement, s: &GenSet) -> Result<usize, GroupError> {
    word_length_bounded(g, s, DEFAULT_SEARCH_LIMIT)
}

pub fn word_length_bounded(g: &GroupElement, s: &GenSet, limit: usize) -> Result<usize, GroupError> {
    if g.rank() != s.rank() {
        return Err(GroupError::RankMismatch(g.to_string(), g.rank(), s.rank()));
    }
    if g.is_zero() {
        return Ok(0);
    }
    let mut dist: HashMap<GroupElement, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let origin = GroupElement::zero(s.rank());
    dist.insert(origin.clone(), 0);
    queue.push_back(origin);
    while let Some(h) = queue.pop_front() {
        let d = dist[&h];
        for gen in s.gens() {
            let next = h.add(gen);
            if dist.contains_key(&next) {
                continue;
            }
            if &next == g {
                return Ok(d + 1);
            }
            if dist.len() >= limit {
                return Err(GroupError::SearchExhausted(g.to_string(), limit));
            }
            dist.insert(next.clone(), d + 1);
            queue.push_back(next);
        }
    }
    unreachable!("Z^n Cayley graph is infinite")
}

/// All lattice points of word length at most `radius`, with their lengths,
/// found by breadth-first search from the identity.
pub fn word_ball(s: &GenSet, radius: usize) -> BTreeMap<GroupElement, usize> {
    let mut dist = BTreeMap::new();
    let origin = GroupElement::zero(s.rank());
    dist.insert(origin.clone(), 0);
    let mut frontier = vec![origin];
    for d in 1..=radius {
        let mut next_frontier = Vec::new();
        for h in &frontier {
            for gen in s.gens() {
                let next = h.add(gen);
                if !dist.contains_key(&next) {
                    dist.insert(next.clone(), d);
                    next_frontier.push(next);
                }
            }
        }
        frontier = next_frontier;
    }
    dist
}

/// A word over the generating set with its cached sum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupWord {
    letters: Vec<GroupElement>,
    sum: GroupElement,
}

impl GroupWord {
    pub fn new(rank: usize, letters: Vec<GroupElement>) -> Self {
        let sum = letters.iter().fold(GroupElement::zero(rank), |acc, l| acc.add(l));
        GroupWord { letters, sum }
    }

    pub fn empty(rank: usize) -> Self {
        Self::new(rank, Vec::new())
    }

    pub fn letters(&self) -> &[GroupElement] {
        &self.letters
    }

    pub fn sum(&self) -> &GroupElement {
        &self.sum
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

/// A finitely supported map Z^n -> NcPolynomial, i.e. an element of
/// C[Z^n] ⊗ (free *-algebra), written as Σ λ_g ⊗ p_g.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionElement {
    rank: usize,
    support: BTreeMap<GroupElement, NcPolynomial>,
}

impl ActionElement {
    pub fn zero(rank: usize) -> Self {
        ActionElement { rank, support: BTreeMap::new() }
    }

    /// λ_0 ⊗ 1.
    pub fn unit(rank: usize) -> Self {
        Self::monomial(GroupElement::zero(rank), NcPolynomial::one())
    }

    pub fn monomial(g: GroupElement, p: NcPolynomial) -> Self {
        let rank = g.rank();
        let mut support = BTreeMap::new();
        if !p.is_zero() {
            support.insert(g, p);
        }
        ActionElement { rank, support }
    }

    pub fn from_map(rank: usize, map: BTreeMap<GroupElement, NcPolynomial>) -> Self {
        let support = map.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        ActionElement { rank, support }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn support(&self) -> &BTreeMap<GroupElement, NcPolynomial> {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut map = self.support.clone();
        for (g, p) in &other.support {
            let entry = map.entry(g.clone()).or_insert_with(NcPolynomial::zero);
            *entry = &*entry + p;
        }
        Self::from_map(self.rank, map)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut map = self.support.clone();
        for (g, p) in &other.support {
            let entry = map.entry(g.clone()).or_insert_with(NcPolynomial::zero);
            *entry = &*entry - p;
        }
        Self::from_map(self.rank, map)
    }

    /// Applies `f` to every coefficient, dropping those that vanish.
    pub fn map_coefficients(&self, mut f: impl FnMut(&NcPolynomial) -> NcPolynomial) -> Self {
        let map = self.support.iter().map(|(g, p)| (g.clone(), f(p))).collect();
        Self::from_map(self.rank, map)
    }
}

/// α(λ_γ) = Σ_{γ'∈S} λ_{γ'} ⊗ q[γ|γ'].
pub fn generator_action(gamma: &GroupElement, s: &GenSet) -> Result<ActionElement, GroupError> {
    if !s.contains(gamma) {
        return Err(GroupError::NotAGenerator(gamma.to_string()));
    }
    let map =
        s.gens().iter().map(|c| (c.clone(), NcPolynomial::symbol(SymbolId::new(gamma.clone(), c.clone())))).collect();
    Ok(ActionElement::from_map(s.rank(), map))
}

/// Product in C[Z^n] ⊗ free algebra: coefficient at g is Σ_h x[h]·y[g−h].
pub fn convolve(x: &ActionElement, y: &ActionElement) -> Result<ActionElement, GroupError> {
    if x.rank != y.rank {
        return Err(GroupError::RankMismatch("convolution operand".into(), y.rank, x.rank));
    }
    let mut map: BTreeMap<GroupElement, NcPolynomial> = BTreeMap::new();
    for (h, p) in &x.support {
        for (k, q) in &y.support {
            let g = h.add(k);
            let prod = p * q;
            let entry = map.entry(g).or_insert_with(NcPolynomial::zero);
            *entry = &*entry + &prod;
        }
    }
    Ok(ActionElement::from_map(x.rank, map))
}

/// The coefficient of λ_g; at g = 0 this is the canonical trace.
pub fn coefficient(x: &ActionElement, g: &GroupElement) -> Result<NcPolynomial, GroupError> {
    if g.rank() != x.rank {
        return Err(GroupError::RankMismatch(g.to_string(), g.rank(), x.rank));
    }
    Ok(x.support.get(g).cloned().unwrap_or_else(NcPolynomial::zero))
}

/// α(λ_{w}) as the ordered product of generator actions; the empty word gives
/// the unit.
pub fn word_action(w: &GroupWord, s: &GenSet) -> Result<ActionElement, GroupError> {
    let mut acc = ActionElement::unit(s.rank());
    for letter in w.letters() {
        acc = convolve(&acc, &generator_action(letter, s)?)?;
    }
    Ok(acc)
}

/// Words over S up to length `max_len` with letters in canonical order
/// (multisets), including the empty word, in (length, letters) order.
pub fn sorted_words(s: &GenSet, max_len: usize) -> Vec<GroupWord> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    fn rec(s: &GenSet, max_len: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(current.clone());
        if current.len() == max_len {
            return;
        }
        for i in start..s.len() {
            current.push(i);
            rec(s, max_len, i, current, out);
            current.pop();
        }
    }
    let mut idx = Vec::new();
    rec(s, max_len, 0, &mut current, &mut idx);
    idx.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    for w in idx {
        out.push(GroupWord::new(s.rank(), w.into_iter().map(|i| s.gens()[i].clone()).collect()));
    }
    out
}

fn word_key(s: &GenSet, w: &GroupWord) -> (usize, Vec<usize>) {
    (w.len(), w.letters().iter().map(|l| s.index_of(l).unwrap_or(usize::MAX)).collect())
}

/// All unordered pairs of distinct letter-sorted words of length ≤ L with
/// equal sums. Each pair is ordered (shorter/lexicographically smaller
/// first) and the list is sorted.
pub fn enumerate_identity_pairs(s: &GenSet, max_len: usize) -> Vec<(GroupWord, GroupWord)> {
    let mut buckets: BTreeMap<GroupElement, Vec<GroupWord>> = BTreeMap::new();
    for w in sorted_words(s, max_len) {
        buckets.entry(w.sum().clone()).or_default().push(w);
    }
    let mut pairs = Vec::new();
    for words in buckets.values() {
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                pairs.push((words[i].clone(), words[j].clone()));
            }
        }
    }
    pairs.sort_by(|a, b| {
        word_key(s, &a.0).cmp(&word_key(s, &b.0)).then_with(|| word_key(s, &a.1).cmp(&word_key(s, &b.1)))
    });
    pairs
}
