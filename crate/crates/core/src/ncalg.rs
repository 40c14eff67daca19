//! Exact free *-algebra on the entries q[r|c] of a fundamental unitary.
//!
//! Adjoints are not separate generators: q[r|c]* is the symbol q[−r|−c].
//! The involution and the antipode are therefore index maps composed with
//! word reversal. Words are ordered degree-first, then lexicographically on
//! the (row, col) index vectors, which is a monomial order compatible with
//! concatenation; a [`RewriteSystem`] oriented by it always terminates.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grpalg::GroupElement;

pub type Coeff = Rational64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NcError {
    #[error("relation set is inconsistent: derived 1 = 0")]
    Inconsistent,
    #[error("normal form exceeded fuel budget of {0} rewrite steps")]
    OutOfFuel(usize),
}

/// The generator q[row|col] of the fundamental unitary.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolId {
    pub row: GroupElement,
    pub col: GroupElement,
}

impl SymbolId {
    pub fn new(row: GroupElement, col: GroupElement) -> Self {
        SymbolId { row, col }
    }

    /// q[r|c]* = q[−r|−c].
    pub fn adjoint(&self) -> Self {
        SymbolId::new(self.row.neg(), self.col.neg())
    }

    /// κ(q[r|c]) = q[c|r]* = q[−c|−r].
    pub fn antipode(&self) -> Self {
        SymbolId::new(self.col.neg(), self.row.neg())
    }

    /// q[r|c] ↦ q[c|r]; the composite of antipode and involution.
    pub fn transpose(&self) -> Self {
        SymbolId::new(self.col.clone(), self.row.clone())
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q[{}|{}]", self.row, self.col)
    }
}

impl fmt::Debug for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A word in the symbols, ordered degree-first then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NcWord(Vec<SymbolId>);

impl NcWord {
    pub fn new(symbols: Vec<SymbolId>) -> Self {
        NcWord(symbols)
    }

    pub fn empty() -> Self {
        NcWord(Vec::new())
    }

    pub fn symbols(&self) -> &[SymbolId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &NcWord) -> NcWord {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        NcWord(v)
    }

    /// Position of the first occurrence of `sub` as a contiguous subword.
    pub fn find(&self, sub: &NcWord) -> Option<usize> {
        if sub.len() > self.len() {
            return None;
        }
        if sub.is_empty() {
            return Some(0);
        }
        (0..=self.len() - sub.len()).find(|&i| self.0[i..i + sub.len()] == sub.0[..])
    }

    pub fn contains(&self, sub: &NcWord) -> bool {
        self.find(sub).is_some()
    }

    pub fn adjoint(&self) -> NcWord {
        NcWord(self.0.iter().rev().map(SymbolId::adjoint).collect())
    }

    pub fn antipode(&self) -> NcWord {
        NcWord(self.0.iter().rev().map(SymbolId::antipode).collect())
    }

    pub fn transpose(&self) -> NcWord {
        NcWord(self.0.iter().map(SymbolId::transpose).collect())
    }

    pub fn slice(&self, start: usize, end: usize) -> NcWord {
        NcWord(self.0[start..end].to_vec())
    }
}

impl Ord for NcWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for NcWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NcWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for NcWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NcMonomial {
    pub coeff: Coeff,
    pub word: NcWord,
}

/// A finite formal sum of words with nonzero rational coefficients, kept in
/// ascending monomial order with no repeated words.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct NcPolynomial {
    terms: Vec<NcMonomial>,
}

impl NcPolynomial {
    pub fn zero() -> Self {
        NcPolynomial { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        Self::term(c, NcWord::empty())
    }

    pub fn symbol(s: SymbolId) -> Self {
        Self::term(Coeff::one(), NcWord::new(vec![s]))
    }

    pub fn word(w: NcWord) -> Self {
        Self::term(Coeff::one(), w)
    }

    pub fn term(c: Coeff, w: NcWord) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            NcPolynomial { terms: vec![NcMonomial { coeff: c, word: w }] }
        }
    }

    /// Canonicalizes an arbitrary list of terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (Coeff, NcWord)>) -> Self {
        let mut map: BTreeMap<NcWord, Coeff> = BTreeMap::new();
        for (c, w) in terms {
            *map.entry(w).or_insert_with(Coeff::zero) += c;
        }
        Self::from_map(map)
    }

    pub fn from_map(map: BTreeMap<NcWord, Coeff>) -> Self {
        NcPolynomial {
            terms: map
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(word, coeff)| NcMonomial { coeff, word })
                .collect(),
        }
    }

    pub fn terms(&self) -> &[NcMonomial] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient of the empty word.
    pub fn constant_term(&self) -> Coeff {
        self.terms.first().filter(|t| t.word.is_empty()).map(|t| t.coeff).unwrap_or_else(Coeff::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.word.is_empty())
    }

    pub fn leading(&self) -> Option<&NcMonomial> {
        self.terms.last()
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.word.len()).max().unwrap_or(0)
    }

    pub fn coefficient_of(&self, w: &NcWord) -> Coeff {
        self.terms.binary_search_by(|t| t.word.cmp(w)).map(|i| self.terms[i].coeff).unwrap_or_else(|_| Coeff::zero())
    }

    /// If this is a single word with coefficient 1, that word.
    pub fn as_word(&self) -> Option<&NcWord> {
        match self.terms.as_slice() {
            [t] if t.coeff.is_one() => Some(&t.word),
            _ => None,
        }
    }

    pub fn symbols(&self) -> BTreeSet<SymbolId> {
        self.terms.iter().flat_map(|t| t.word.symbols().iter().cloned()).collect()
    }

    pub fn scale(&self, c: Coeff) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        NcPolynomial {
            terms: self.terms.iter().map(|t| NcMonomial { coeff: t.coeff * c, word: t.word.clone() }).collect(),
        }
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(t) => self.scale(t.coeff.recip()),
            None => Self::zero(),
        }
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Multiplies on the left and right by words.
    pub fn sandwich(&self, left: &NcWord, right: &NcWord) -> Self {
        NcPolynomial {
            terms: self
                .terms
                .iter()
                .map(|t| NcMonomial { coeff: t.coeff, word: left.concat(&t.word).concat(right) })
                .collect(),
        }
        .recanonicalized()
    }

    fn recanonicalized(self) -> Self {
        let sorted = self.terms.windows(2).all(|w| w[0].word < w[1].word);
        if sorted {
            self
        } else {
            Self::from_terms(self.terms.into_iter().map(|t| (t.coeff, t.word)))
        }
    }

    fn map_words(&self, f: impl Fn(&NcWord) -> NcWord) -> Self {
        Self::from_terms(self.terms.iter().map(|t| (t.coeff, f(&t.word))))
    }

    /// The involution: reverses words and negates indices. Coefficients are
    /// rational, so conjugation is the identity.
    pub fn adjoint(&self) -> Self {
        self.map_words(NcWord::adjoint)
    }

    /// The antipode κ(q[r|c]) = q[−c|−r], extended as a linear
    /// anti-homomorphism.
    pub fn antipode(&self) -> Self {
        self.map_words(NcWord::antipode)
    }

    pub fn transpose(&self) -> Self {
        self.map_words(NcWord::transpose)
    }

    /// All coefficients share one sign.
    pub fn is_sign_definite(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_positive()) || self.terms.iter().all(|t| t.coeff.is_negative())
    }
}

impl fmt::Display for NcPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if t.word.is_empty() {
                write!(f, "{}", t.coeff)?;
            } else {
                write!(f, "{}·{}", t.coeff, t.word)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for NcPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn merge(a: &NcPolynomial, b: &NcPolynomial, sign: Coeff) -> NcPolynomial {
    let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
    let (mut i, mut j) = (0, 0);
    while i < a.terms.len() || j < b.terms.len() {
        let ord = match (a.terms.get(i), b.terms.get(j)) {
            (Some(x), Some(y)) => x.word.cmp(&y.word),
            (Some(_), None) => Ordering::Less,
            (None, _) => Ordering::Greater,
        };
        match ord {
            Ordering::Less => {
                out.push(a.terms[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                let t = &b.terms[j];
                out.push(NcMonomial { coeff: t.coeff * sign, word: t.word.clone() });
                j += 1;
            }
            Ordering::Equal => {
                let c = a.terms[i].coeff + b.terms[j].coeff * sign;
                if !c.is_zero() {
                    out.push(NcMonomial { coeff: c, word: a.terms[i].word.clone() });
                }
                i += 1;
                j += 1;
            }
        }
    }
    NcPolynomial { terms: out }
}

impl Add for &NcPolynomial {
    type Output = NcPolynomial;
    fn add(self, rhs: &NcPolynomial) -> NcPolynomial {
        merge(self, rhs, Coeff::one())
    }
}

impl Sub for &NcPolynomial {
    type Output = NcPolynomial;
    fn sub(self, rhs: &NcPolynomial) -> NcPolynomial {
        merge(self, rhs, -Coeff::one())
    }
}

impl Neg for &NcPolynomial {
    type Output = NcPolynomial;
    fn neg(self) -> NcPolynomial {
        self.scale(-Coeff::one())
    }
}

impl Mul for &NcPolynomial {
    type Output = NcPolynomial;
    fn mul(self, rhs: &NcPolynomial) -> NcPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return NcPolynomial::zero();
        }
        NcPolynomial::from_terms(
            self.terms.iter().flat_map(|a| rhs.terms.iter().map(move |b| (a.coeff * b.coeff, a.word.concat(&b.word)))),
        )
    }
}

impl Add for NcPolynomial {
    type Output = NcPolynomial;
    fn add(self, rhs: NcPolynomial) -> NcPolynomial {
        &self + &rhs
    }
}

impl Sub for NcPolynomial {
    type Output = NcPolynomial;
    fn sub(self, rhs: NcPolynomial) -> NcPolynomial {
        &self - &rhs
    }
}

impl Mul for NcPolynomial {
    type Output = NcPolynomial;
    fn mul(self, rhs: NcPolynomial) -> NcPolynomial {
        &self * &rhs
    }
}

/// The free-algebra product.
pub fn mul(p: &NcPolynomial, q: &NcPolynomial) -> NcPolynomial {
    p * q
}

pub fn adjoint(p: &NcPolynomial) -> NcPolynomial {
    p.adjoint()
}

pub fn antipode(p: &NcPolynomial) -> NcPolynomial {
    p.antipode()
}

/// Per-symbol facts recorded alongside the rewrite rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fact {
    Zero,
    Normal,
    /// x·x* is a projection.
    Projection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub lhs: NcWord,
    pub rhs: NcPolynomial,
}

impl Rule {
    /// The relation lhs − rhs = 0 this rule encodes.
    pub fn relation(&self) -> NcPolynomial {
        &NcPolynomial::word(self.lhs.clone()) - &self.rhs
    }
}

/// What happened when a relation was added.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AddOutcome {
    /// Left-hand sides of rules inserted (including re-oriented ones).
    pub inserted: Vec<NcWord>,
    /// Number of pre-existing rules that became reducible and were re-added.
    pub displaced: usize,
}

impl AddOutcome {
    pub fn changed(&self) -> bool {
        !self.inserted.is_empty()
    }
}

/// An oriented, interreduced set of rules `word → polynomial` with every
/// right-hand side term strictly smaller than its left-hand side.
#[derive(Clone, Debug, Default)]
pub struct RewriteSystem {
    rules: BTreeMap<NcWord, NcPolynomial>,
    by_first: HashMap<SymbolId, Vec<NcWord>>,
    facts: BTreeMap<SymbolId, BTreeSet<Fact>>,
}

impl RewriteSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> impl Iterator<Item = Rule> + '_ {
        self.rules.iter().map(|(l, r)| Rule { lhs: l.clone(), rhs: r.clone() })
    }

    pub fn rule_for(&self, lhs: &NcWord) -> Option<&NcPolynomial> {
        self.rules.get(lhs)
    }

    pub fn facts(&self) -> &BTreeMap<SymbolId, BTreeSet<Fact>> {
        &self.facts
    }

    pub fn has_fact(&self, s: &SymbolId, fact: Fact) -> bool {
        self.facts.get(s).is_some_and(|f| f.contains(&fact))
    }

    pub fn record_fact(&mut self, s: &SymbolId, fact: Fact) -> bool {
        self.facts.entry(s.clone()).or_default().insert(fact)
    }

    /// Finds the leftmost redex, preferring the shortest rule at a position.
    fn find_redex(&self, w: &NcWord) -> Option<(usize, &NcWord)> {
        let syms = w.symbols();
        for i in 0..syms.len() {
            if let Some(cands) = self.by_first.get(&syms[i]) {
                for lhs in cands {
                    let n = lhs.len();
                    if i + n <= syms.len() && syms[i..i + n] == lhs.symbols()[..] {
                        return Some((i, lhs));
                    }
                }
            }
        }
        None
    }

    pub fn is_reducible(&self, w: &NcWord) -> bool {
        self.find_redex(w).is_some()
    }

    /// Fully reduces `p` with leftmost-innermost rewriting.
    pub fn normal_form(&self, p: &NcPolynomial) -> NcPolynomial {
        self.normal_form_counted(p, None).expect("unbounded normal form cannot run out of fuel").0
    }

    /// Like [`normal_form`](Self::normal_form) but also returns the number of
    /// rewrite steps, failing if `fuel` steps are exceeded.
    pub fn normal_form_counted(&self, p: &NcPolynomial, fuel: Option<usize>) -> Result<(NcPolynomial, usize), NcError> {
        if self.rules.is_empty() {
            return Ok((p.clone(), 0));
        }
        let mut work: BTreeMap<NcWord, Coeff> = p.terms.iter().map(|t| (t.word.clone(), t.coeff)).collect();
        let mut done: Vec<NcMonomial> = Vec::new();
        let mut steps = 0usize;
        // Rewriting only produces smaller words, so the largest pending word
        // never reappears once it is settled.
        while let Some((w, c)) = work.pop_last() {
            match self.find_redex(&w) {
                None => done.push(NcMonomial { coeff: c, word: w }),
                Some((pos, lhs)) => {
                    steps += 1;
                    if let Some(limit) = fuel {
                        if steps > limit {
                            return Err(NcError::OutOfFuel(limit));
                        }
                    }
                    let syms = w.symbols();
                    let prefix = &syms[..pos];
                    let suffix = &syms[pos + lhs.len()..];
                    for t in self.rules[lhs].terms() {
                        let mut v = Vec::with_capacity(prefix.len() + t.word.len() + suffix.len());
                        v.extend_from_slice(prefix);
                        v.extend_from_slice(t.word.symbols());
                        v.extend_from_slice(suffix);
                        let nw = NcWord(v);
                        let coeff = c * t.coeff;
                        match work.entry(nw) {
                            std::collections::btree_map::Entry::Vacant(e) => {
                                e.insert(coeff);
                            }
                            std::collections::btree_map::Entry::Occupied(mut e) => {
                                *e.get_mut() += coeff;
                                if e.get().is_zero() {
                                    e.remove();
                                }
                            }
                        }
                    }
                }
            }
        }
        done.reverse();
        Ok((NcPolynomial { terms: done }, steps))
    }

    fn insert_rule(&mut self, lhs: NcWord, rhs: NcPolynomial) {
        let first = lhs.symbols()[0].clone();
        let list = self.by_first.entry(first).or_default();
        let pos = list.binary_search(&lhs).unwrap_or_else(|e| e);
        list.insert(pos, lhs.clone());
        if rhs.is_zero() && lhs.len() == 1 {
            self.facts.entry(lhs.symbols()[0].clone()).or_default().insert(Fact::Zero);
        }
        self.rules.insert(lhs, rhs);
    }

    fn remove_rule(&mut self, lhs: &NcWord) -> Option<NcPolynomial> {
        let rhs = self.rules.remove(lhs)?;
        if let Some(list) = self.by_first.get_mut(&lhs.symbols()[0]) {
            list.retain(|l| l != lhs);
        }
        Some(rhs)
    }

    /// Adds the relation `rel = 0`, orienting it by its leading word and
    /// interreducing. Pre-existing rules whose left-hand side becomes
    /// reducible are removed and re-added as relations.
    pub fn add_relation(&mut self, rel: &NcPolynomial) -> Result<AddOutcome, NcError> {
        let mut outcome = AddOutcome::default();
        let mut queue: VecDeque<NcPolynomial> = VecDeque::new();
        queue.push_back(rel.clone());
        while let Some(r) = queue.pop_front() {
            let r = self.normal_form(&r);
            if r.is_zero() {
                continue;
            }
            if r.is_constant() {
                return Err(NcError::Inconsistent);
            }
            let r = r.monic();
            let lead = r.leading().expect("nonzero").word.clone();
            let rhs = -&(&r - &NcPolynomial::word(lead.clone()));
            let displaced: Vec<NcWord> = self.rules.keys().filter(|l| l.contains(&lead)).cloned().collect();
            for l in displaced {
                let old = self.remove_rule(&l).expect("present");
                queue.push_back(&NcPolynomial::word(l) - &old);
                outcome.displaced += 1;
            }
            self.insert_rule(lead.clone(), rhs);
            outcome.inserted.push(lead);
        }
        Ok(outcome)
    }

    /// Re-normalizes every right-hand side.
    pub fn reduce_rhs(&mut self) {
        let keys: Vec<NcWord> = self.rules.keys().cloned().collect();
        for k in keys {
            let rhs = self.rules[&k].clone();
            if rhs.terms().iter().any(|t| self.is_reducible(&t.word)) {
                let nf = self.normal_form(&rhs);
                self.rules.insert(k, nf);
            }
        }
    }

    /// Symbols currently rewritten to zero.
    pub fn zero_symbols(&self) -> BTreeSet<SymbolId> {
        self.rules.iter().filter(|(l, r)| l.len() == 1 && r.is_zero()).map(|(l, _)| l.symbols()[0].clone()).collect()
    }

    pub fn is_zero_symbol(&self, s: &SymbolId) -> bool {
        self.rules.get(&NcWord::new(vec![s.clone()])).is_some_and(|r| r.is_zero())
    }

    /// Checks the structural invariants: orientation and interreduction.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (lhs, rhs) in &self.rules {
            if let Some(t) = rhs.terms().iter().find(|t| t.word >= *lhs) {
                return Err(format!("rule {lhs} → {rhs} is not oriented ({} ≥ lhs)", t.word));
            }
            for other in self.rules.keys() {
                if other != lhs && lhs.contains(other) {
                    return Err(format!("rule lhs {lhs} is reducible by {other}"));
                }
            }
        }
        Ok(())
    }
}

/// Functional form of [`RewriteSystem::normal_form`].
pub fn normal_form(p: &NcPolynomial, system: &RewriteSystem) -> NcPolynomial {
    system.normal_form(p)
}

/// Functional form of [`RewriteSystem::add_relation`].
pub fn add_relation(system: &RewriteSystem, rel: &NcPolynomial) -> Result<RewriteSystem, NcError> {
    let mut next = system.clone();
    next.add_relation(rel)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(r: i64, c: i64) -> SymbolId {
        SymbolId::new(GroupElement::scalar(r), GroupElement::scalar(c))
    }

    fn p(r: i64, c: i64) -> NcPolynomial {
        NcPolynomial::symbol(q(r, c))
    }

    #[test]
    fn unit_is_identity() {
        let x = &(&p(1, 1) * &p(2, -1)) + &p(1, 2).scale(Coeff::from_integer(3));
        assert_eq!(&NcPolynomial::one() * &x, x);
        assert_eq!(&x * &NcPolynomial::one(), x);
    }

    #[test]
    fn product_is_concatenation() {
        let k = 3;
        let prod = &p(1, k) * &p(-1, k);
        assert_eq!(prod.len(), 1);
        assert_eq!(prod.terms()[0].word, NcWord::new(vec![q(1, k), q(-1, k)]));
    }

    #[test]
    fn adjoint_of_symbol() {
        assert_eq!(p(1, 1).adjoint(), p(-1, -1));
        let w = &p(1, 2) * &p(2, -1);
        assert_eq!(w.adjoint(), &p(-2, 1) * &p(-1, -2));
    }

    #[test]
    fn antipode_matches_inverse_pair_usage() {
        let k = 2;
        let x = &p(1, k) * &p(-1, k);
        assert_eq!(x.antipode(), &p(-k, 1) * &p(-k, -1));
        assert_eq!(NcPolynomial::one().antipode(), NcPolynomial::one());
        assert_eq!(q(3, -2).antipode().antipode(), q(3, -2));
    }

    #[test]
    fn monomial_order_is_degree_first() {
        let short = NcWord::new(vec![q(5, 5)]);
        let long = NcWord::new(vec![q(-5, -5), q(-5, -5)]);
        assert!(short < long);
        assert!(NcWord::new(vec![q(-1, 1)]) < NcWord::new(vec![q(1, -1)]));
    }

    #[test]
    fn display_is_coefficient_then_symbols() {
        let x = &(&p(1, 1) * &p(-1, -1)) - &NcPolynomial::one();
        assert_eq!(x.to_string(), "1·q[1|1]·q[-1|-1] + -1");
        assert_eq!(NcPolynomial::zero().to_string(), "0");
    }

    #[test]
    fn scalar_relation_becomes_zero_rule() {
        let mut sys = RewriteSystem::new();
        sys.add_relation(&p(1, 2).scale(Coeff::from_integer(2))).unwrap();
        assert!(sys.is_zero_symbol(&q(1, 2)));
        assert!(sys.has_fact(&q(1, 2), Fact::Zero));
        assert!(sys.normal_form(&(&p(1, 1) * &p(1, 2))).is_zero());
    }

    #[test]
    fn binomial_orients_to_larger_word() {
        // A_{k(2p-1)}A_{k(2q-1)} = A_{k(2l-1)}A_{k(2m-1)} with k=3 and 1+4 = 2+3.
        let lhs = &p(4, 1) * &p(4, 4);
        let rhs = &p(4, 2) * &p(4, 3);
        let mut sys = RewriteSystem::new();
        sys.add_relation(&(&lhs - &rhs)).unwrap();
        let rules: Vec<Rule> = sys.rules().collect();
        assert_eq!(rules.len(), 1);
        let big = lhs.leading().unwrap().word.clone().max(rhs.leading().unwrap().word.clone());
        assert_eq!(rules[0].lhs, big);
        assert_eq!(sys.normal_form(&lhs), sys.normal_form(&rhs));
    }

    #[test]
    fn contradiction_is_rejected() {
        let mut sys = RewriteSystem::new();
        assert_eq!(sys.add_relation(&NcPolynomial::one()), Err(NcError::Inconsistent));
        let mut sys = RewriteSystem::new();
        sys.add_relation(&(&p(1, 1) - &NcPolynomial::one())).unwrap();
        assert_eq!(sys.add_relation(&p(1, 1)), Err(NcError::Inconsistent));
    }

    #[test]
    fn row_products_vanish() {
        let k = 2;
        let mut sys = RewriteSystem::new();
        sys.add_relation(&(&p(k, 1) * &p(k, 2))).unwrap();
        assert!(sys.normal_form(&(&p(k, 1) * &p(k, 2))).is_zero());
        assert_eq!(sys.normal_form(&p(k, 1)), p(k, 1));
    }

    #[test]
    fn cubic_rule_collapses_xxxstar() {
        let x = p(1, 1);
        let xxs = &(&x * &x) * &x.adjoint();
        let mut sys = RewriteSystem::new();
        sys.add_relation(&(&xxs - &x)).unwrap();
        assert_eq!(sys.normal_form(&xxs), x);
    }

    #[test]
    fn empty_system_is_identity() {
        let x = &p(1, 1) + &(&p(2, 2) * &p(-1, 1));
        assert_eq!(RewriteSystem::new().normal_form(&x), x);
    }

    #[test]
    fn interreduction_displaces_rules() {
        let mut sys = RewriteSystem::new();
        sys.add_relation(&(&(&p(1, 1) * &p(2, 2)) - &p(1, 2))).unwrap();
        let out = sys.add_relation(&p(2, 2)).unwrap();
        assert_eq!(out.displaced, 1);
        assert!(sys.is_zero_symbol(&q(1, 2)));
        sys.check_invariants().unwrap();
    }
}
