//! The deduction engine.
//!
//! Relations of the fundamental unitary come from two sources: the
//! homomorphism property of the coaction (α(λ_{w1}) = α(λ_{w2}) whenever two
//! words over S have the same sum, compared coefficient by coefficient) and
//! unitarity of U. They are closed under the involution and the antipode and
//! fed into a [`RewriteSystem`]. On top of the free-algebra consequences the
//! engine applies a small set of C*-algebraic inference rules:
//!
//! * positivity split: Σ c_t y_t y_t* = 0 with all c_t > 0 forces y_t = 0,
//!   optionally after sandwiching a quadratic relation between the adjoints
//!   of one of its terms;
//! * products of unitarity relations with a single symbol, which expose
//!   x²x* = x and x*x² = x;
//! * normality: x²x* = x and x*x² = x give xx* = x*x;
//! * nilpotent-normal cancellation: for normal y, y^m = 0 gives y = 0 and
//!   u·y^m = 0 (or y^m·u = 0) gives u·y = 0.
//!
//! Saturation repeats generation, inference and absorption until a round
//! produces nothing new or the round budget runs out.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grpalg::{self, ActionElement, GenSet, GroupElement, GroupError, GroupWord};
use crate::ncalg::{Coeff, Fact, NcError, NcPolynomial, NcWord, RewriteSystem, Rule, SymbolId};

#[derive(Debug, Error)]
pub enum DeriveError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("derived 1 = 0 after {} deductions (last: {})", log.len(), log.last().map(|d| d.relation.to_string()).unwrap_or_default())]
    Inconsistent { log: Vec<Deduction> },
    #[error("invalid engine configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InferenceRule {
    Homomorphism,
    Unitarity,
    InvolutionClosure,
    AntipodeClosure,
    /// Product of a unitarity relation with a single symbol.
    UnitaryProduct,
    /// Two-sided product of a quadratic relation with adjoints of its own
    /// factors, kept when it splits as a positive sum.
    Sandwich,
    PositivitySplit,
    XxStarZero,
    NormalityTactic,
    NilpotentNormalZero,
}

impl InferenceRule {
    pub const ALL: [InferenceRule; 10] = [
        InferenceRule::Homomorphism,
        InferenceRule::Unitarity,
        InferenceRule::InvolutionClosure,
        InferenceRule::AntipodeClosure,
        InferenceRule::UnitaryProduct,
        InferenceRule::Sandwich,
        InferenceRule::PositivitySplit,
        InferenceRule::XxStarZero,
        InferenceRule::NormalityTactic,
        InferenceRule::NilpotentNormalZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InferenceRule::Homomorphism => "homomorphism",
            InferenceRule::Unitarity => "unitarity",
            InferenceRule::InvolutionClosure => "involution-closure",
            InferenceRule::AntipodeClosure => "antipode-closure",
            InferenceRule::UnitaryProduct => "unitary-product",
            InferenceRule::Sandwich => "sandwich",
            InferenceRule::PositivitySplit => "positivity-split",
            InferenceRule::XxStarZero => "xx*-zero",
            InferenceRule::NormalityTactic => "normality-tactic",
            InferenceRule::NilpotentNormalZero => "nilpotent-normal-zero",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }

    fn is_closure(self) -> bool {
        matches!(self, InferenceRule::InvolutionClosure | InferenceRule::AntipodeClosure)
    }
}

impl fmt::Display for InferenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One logged relation with its provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deduction {
    pub id: usize,
    pub relation: NcPolynomial,
    pub rule: InferenceRule,
    pub sources: Vec<usize>,
    pub note: String,
}

/// A deduction proposed by [`DerivationState::apply_inference`], not yet logged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub relation: NcPolynomial,
    pub rule: InferenceRule,
    pub sources: Vec<usize>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Identity pairs use words of length at most this.
    pub max_word_len: usize,
    pub max_rounds: usize,
    /// Coefficients of word actions with more terms than this are deferred
    /// until more symbols are known to vanish.
    pub coefficient_cap: usize,
    /// Largest exponent tried by nilpotent-normal cancellation.
    pub max_power: usize,
    /// Absorb only short relations (at most two terms, no constant) until
    /// the restricted system is saturated, then everything else.
    pub staged: bool,
    #[serde(default)]
    pub disabled_rules: BTreeSet<InferenceRule>,
}

impl EngineConfig {
    /// For Z: max(4, max over i<j of lcm(a_i, a_j)/a_i). For n > 1: 4.
    pub fn default_word_len(s: &GenSet) -> usize {
        if s.rank() != 1 {
            return 4;
        }
        let pos: Vec<i64> = s.positives().iter().map(|g| g.coords()[0]).collect();
        let mut best = 4usize;
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                let lcm = num_integer::lcm(pos[i], pos[j]);
                best = best.max((lcm / pos[i].min(pos[j])) as usize);
            }
        }
        best
    }

    pub fn for_genset(s: &GenSet) -> Self {
        let l = Self::default_word_len(s);
        EngineConfig {
            max_word_len: l,
            max_rounds: 64,
            coefficient_cap: 32,
            max_power: l,
            staged: true,
            disabled_rules: BTreeSet::new(),
        }
    }

    pub fn with_word_len(mut self, l: usize) -> Self {
        self.max_word_len = l;
        self.max_power = self.max_power.max(l);
        self
    }

    pub fn enabled(&self, rule: InferenceRule) -> bool {
        !self.disabled_rules.contains(&rule)
    }

    pub fn validate(&self) -> Result<(), DeriveError> {
        if self.max_word_len < 2 {
            return Err(DeriveError::Config(format!("max word length must be ≥ 2, got {}", self.max_word_len)));
        }
        if self.max_rounds < 1 {
            return Err(DeriveError::Config("max rounds must be ≥ 1".into()));
        }
        if self.coefficient_cap < 1 {
            return Err(DeriveError::Config("coefficient cap must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// The matrix [q[r|c]] indexed by S in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FundamentalUnitary {
    pub index: Vec<GroupElement>,
    pub entries: Vec<Vec<NcPolynomial>>,
}

impl FundamentalUnitary {
    pub fn initial(s: &GenSet) -> Self {
        let index = s.gens().to_vec();
        let entries = index
            .iter()
            .map(|r| index.iter().map(|c| NcPolynomial::symbol(SymbolId::new(r.clone(), c.clone()))).collect())
            .collect();
        FundamentalUnitary { index, entries }
    }

    pub fn size(&self) -> usize {
        self.index.len()
    }

    pub fn entry(&self, r: &GroupElement, c: &GroupElement) -> Option<&NcPolynomial> {
        let i = self.index.iter().position(|x| x == r)?;
        let j = self.index.iter().position(|x| x == c)?;
        Some(&self.entries[i][j])
    }

    /// Entry (−r, −c) is the adjoint of entry (r, c).
    pub fn check_adjoint_pairing(&self) -> bool {
        self.index.iter().all(|r| {
            self.index.iter().all(|c| self.entry(&r.neg(), &c.neg()).cloned() == self.entry(r, c).map(|p| p.adjoint()))
        })
    }

    /// Boolean pattern of entries that are zero.
    pub fn zero_pattern(&self) -> Vec<Vec<bool>> {
        self.entries.iter().map(|row| row.iter().map(NcPolynomial::is_zero).collect()).collect()
    }

    pub fn map_entries(&self, f: impl Fn(&NcPolynomial) -> NcPolynomial) -> Self {
        FundamentalUnitary {
            index: self.index.clone(),
            entries: self.entries.iter().map(|row| row.iter().map(&f).collect()).collect(),
        }
    }

    /// Renders the matrix with A_{ij} names.
    pub fn render(&self, names: &SymbolNames) -> String {
        let cells: Vec<Vec<String>> =
            self.entries.iter().map(|row| row.iter().map(|p| names.polynomial(p)).collect()).collect();
        let width = cells.iter().flatten().map(|c| c.chars().count()).max().unwrap_or(1);
        let mut out = String::new();
        for row in cells {
            out.push_str("[ ");
            for (j, c) in row.iter().enumerate() {
                if j > 0 {
                    out.push_str("  ");
                }
                out.push_str(&format!("{c:<width$}"));
            }
            out.push_str(" ]\n");
        }
        out
    }
}

/// Symbol names: A_{ij} over Z (row a_i, column index 2j−1 for
/// a_j and 2j for −a_j), letters A, B, C, ... in row-major order over Z^n.
/// Symbols in rows −a_i render as adjoints.
#[derive(Clone, Debug)]
pub struct SymbolNames {
    rank: usize,
    positives: Vec<GroupElement>,
    index: Vec<GroupElement>,
}

impl SymbolNames {
    pub fn new(s: &GenSet) -> Self {
        SymbolNames { rank: s.rank(), positives: s.positives(), index: s.gens().to_vec() }
    }

    pub fn symbol(&self, sym: &SymbolId) -> String {
        let (base, star) = match self.positives.iter().position(|p| *p == sym.row) {
            Some(_) => (sym.clone(), ""),
            None => (sym.adjoint(), "*"),
        };
        let Some(i) = self.positives.iter().position(|p| *p == base.row) else {
            return sym.to_string();
        };
        let Some(j) = self.index.iter().position(|c| *c == base.col) else {
            return sym.to_string();
        };
        if self.rank == 1 {
            let (ri, cj) = (i + 1, j + 1);
            let ri = if ri < 10 { ri.to_string() } else { format!("({ri})") };
            let cj = if cj < 10 { cj.to_string() } else { format!("({cj})") };
            format!("A_{{{ri}{cj}}}{star}")
        } else {
            let k = i * self.index.len() + j;
            if k < 26 {
                format!("{}{star}", (b'A' + k as u8) as char)
            } else {
                sym.to_string()
            }
        }
    }

    pub fn word(&self, w: &NcWord) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.symbols().iter().map(|s| self.symbol(s)).collect::<Vec<_>>().join("")
    }

    pub fn polynomial(&self, p: &NcPolynomial) -> String {
        if p.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, t) in p.terms().iter().rev().enumerate() {
            let neg = t.coeff < Coeff::from_integer(0);
            let mag = if neg { -t.coeff } else { t.coeff };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let one = Coeff::from_integer(1);
            if t.word.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag == one {
                out.push_str(&self.word(&t.word));
            } else {
                out.push_str(&format!("{mag}{}", self.word(&t.word)));
            }
        }
        out
    }
}

/// Coefficient-wise differences α(λ_{w1}) − α(λ_{w2}), fully expanded.
pub fn homomorphism_relations(pair: &(GroupWord, GroupWord), s: &GenSet) -> Result<Vec<NcPolynomial>, DeriveError> {
    let (w1, w2) = pair;
    if w1.sum() != w2.sum() {
        return Err(GroupError::UnequalSums(w1.to_string(), w2.to_string()).into());
    }
    let a = grpalg::word_action(w1, s)?;
    let b = grpalg::word_action(w2, s)?;
    let diff = a.sub(&b);
    Ok(diff.support().values().cloned().collect())
}

/// Row relations Σ_c q[r|c]·q[r'|c]* − δ and column relations
/// Σ_r q[r|c]*·q[r|c'] − δ, for all index pairs.
pub fn unitarity_relations(s: &GenSet) -> Vec<NcPolynomial> {
    let q = |r: &GroupElement, c: &GroupElement| NcPolynomial::symbol(SymbolId::new(r.clone(), c.clone()));
    let mut out = Vec::new();
    for r in s.gens() {
        for r2 in s.gens() {
            let mut sum = NcPolynomial::zero();
            for c in s.gens() {
                sum = &sum + &(&q(r, c) * &q(r2, c).adjoint());
            }
            if r == r2 {
                sum = &sum - &NcPolynomial::one();
            }
            out.push(sum);
        }
    }
    for c in s.gens() {
        for c2 in s.gens() {
            let mut sum = NcPolynomial::zero();
            for r in s.gens() {
                sum = &sum + &(&q(r, c).adjoint() * &q(r, c2));
            }
            if c == c2 {
                sum = &sum - &NcPolynomial::one();
            }
            out.push(sum);
        }
    }
    out
}

/// At most two terms and no constant term.
fn is_short(rel: &NcPolynomial) -> bool {
    rel.len() <= 2 && rel.constant_term().is_zero()
}

/// A word action with some coefficients left unexpanded because they are
/// too large.
#[derive(Clone, Debug, Default)]
struct PartialAction {
    known: BTreeMap<GroupElement, NcPolynomial>,
    overflow: BTreeSet<GroupElement>,
}

impl PartialAction {
    fn unit(rank: usize) -> Self {
        let mut known = BTreeMap::new();
        known.insert(GroupElement::zero(rank), NcPolynomial::one());
        PartialAction { known, overflow: BTreeSet::new() }
    }

    fn times(&self, gen: &ActionElement, cap: usize) -> Self {
        let mut overflow = BTreeSet::new();
        for h in &self.overflow {
            for s in gen.support().keys() {
                overflow.insert(h.add(s));
            }
        }
        let mut acc: BTreeMap<GroupElement, Vec<(Coeff, NcWord)>> = BTreeMap::new();
        for (h, p) in &self.known {
            for (s, q) in gen.support() {
                let g = h.add(s);
                if overflow.contains(&g) {
                    continue;
                }
                let entry = acc.entry(g).or_default();
                for a in p.terms() {
                    for b in q.terms() {
                        entry.push((a.coeff * b.coeff, a.word.concat(&b.word)));
                    }
                }
            }
        }
        let mut known = BTreeMap::new();
        for (g, terms) in acc {
            if overflow.contains(&g) {
                continue;
            }
            let poly = NcPolynomial::from_terms(terms);
            if poly.len() > cap {
                overflow.insert(g);
            } else if !poly.is_zero() {
                known.insert(g, poly);
            }
        }
        PartialAction { known, overflow }
    }

    fn coefficient(&self, g: &GroupElement) -> Option<NcPolynomial> {
        if self.overflow.contains(g) {
            None
        } else {
            Some(self.known.get(g).cloned().unwrap_or_else(NcPolynomial::zero))
        }
    }
}

/// The engine's working memory.
#[derive(Clone, Debug)]
pub struct DerivationState {
    gens: GenSet,
    config: EngineConfig,
    system: RewriteSystem,
    log: Vec<Deduction>,
    seen: HashSet<NcPolynomial>,
    pending: Vec<usize>,
    unitarity_ids: Vec<usize>,
    round: usize,
    zero_history: Vec<usize>,
    /// Word length used by the current generation stage.
    stage_len: usize,
    restricted: bool,
    deferred: Vec<usize>,
    generated_at: Option<(usize, usize)>,
}

impl DerivationState {
    pub fn new(gens: GenSet, config: EngineConfig) -> Result<Self, DeriveError> {
        config.validate()?;
        Ok(DerivationState {
            gens,
            system: RewriteSystem::new(),
            log: Vec::new(),
            seen: HashSet::new(),
            pending: Vec::new(),
            unitarity_ids: Vec::new(),
            round: 0,
            zero_history: Vec::new(),
            stage_len: 2,
            restricted: config.staged,
            deferred: Vec::new(),
            generated_at: None,
            config,
        })
    }

    pub fn system(&self) -> &RewriteSystem {
        &self.system
    }

    pub fn log(&self) -> &[Deduction] {
        &self.log
    }

    pub fn gens(&self) -> &GenSet {
        &self.gens
    }

    pub fn all_symbols(&self) -> Vec<SymbolId> {
        let g = self.gens.gens();
        g.iter().flat_map(|r| g.iter().map(move |c| SymbolId::new(r.clone(), c.clone()))).collect()
    }

    pub fn nonzero_symbols(&self) -> Vec<SymbolId> {
        self.all_symbols().into_iter().filter(|s| !self.system.is_zero_symbol(s)).collect()
    }

    pub fn nf(&self, p: &NcPolynomial) -> NcPolynomial {
        self.system.normal_form(p)
    }

    fn nf_word(&self, w: &NcWord) -> NcPolynomial {
        self.system.normal_form(&NcPolynomial::word(w.clone()))
    }

    /// Logs a relation unless it is zero or already known (up to scalar);
    /// non-closure deductions also log their involution, antipode and
    /// transposed images.
    pub fn record(
        &mut self,
        relation: NcPolynomial,
        rule: InferenceRule,
        sources: Vec<usize>,
        note: String,
    ) -> Option<usize> {
        if relation.is_zero() {
            return None;
        }
        let key = relation.monic();
        if !self.seen.insert(key) {
            return None;
        }
        let id = self.log.len();
        self.log.push(Deduction { id, relation: relation.clone(), rule, sources, note });
        self.pending.push(id);
        if !rule.is_closure() {
            if self.config.enabled(InferenceRule::InvolutionClosure) {
                self.record(relation.adjoint(), InferenceRule::InvolutionClosure, vec![id], "involution".into());
            }
            if self.config.enabled(InferenceRule::AntipodeClosure) {
                self.record(relation.antipode(), InferenceRule::AntipodeClosure, vec![id], "antipode".into());
                if self.config.enabled(InferenceRule::InvolutionClosure) {
                    self.record(
                        relation.transpose(),
                        InferenceRule::AntipodeClosure,
                        vec![id],
                        "antipode then involution".into(),
                    );
                }
            }
        }
        Some(id)
    }

    fn record_candidate(&mut self, c: Candidate) -> Option<usize> {
        self.record(c.relation, c.rule, c.sources, c.note)
    }

    /// Moves pending relations into the rewrite system.
    pub fn absorb(&mut self) -> Result<bool, DeriveError> {
        let pending = std::mem::take(&mut self.pending);
        let mut changed = false;
        for id in pending {
            if self.restricted && !is_short(&self.log[id].relation) {
                self.deferred.push(id);
                continue;
            }
            match self.system.add_relation(&self.log[id].relation) {
                Ok(out) => changed |= out.changed(),
                Err(NcError::Inconsistent) | Err(NcError::OutOfFuel(_)) => {
                    return Err(DeriveError::Inconsistent { log: self.log.clone() });
                }
            }
        }
        Ok(changed)
    }

    fn seed_unitarity(&mut self) {
        if !self.config.enabled(InferenceRule::Unitarity) {
            return;
        }
        let gens = self.gens.gens().to_vec();
        let n = gens.len();
        for (k, rel) in unitarity_relations(&self.gens).into_iter().enumerate() {
            let note = if k < n * n {
                format!("row {} · row {}*", gens[k / n], gens[k % n])
            } else {
                let k = k - n * n;
                format!("column {}* · column {}", gens[k / n], gens[k % n])
            };
            let start = self.log.len();
            self.record(rel, InferenceRule::Unitarity, vec![], note);
            self.unitarity_ids.extend(start..self.log.len());
        }
    }

    /// Generator actions with entries known to vanish removed.
    fn reduced_generator_actions(&self) -> Vec<ActionElement> {
        self.gens
            .gens()
            .iter()
            .map(|g| {
                let map = self
                    .gens
                    .gens()
                    .iter()
                    .filter_map(|c| {
                        let s = SymbolId::new(g.clone(), c.clone());
                        (!self.system.is_zero_symbol(&s)).then(|| (c.clone(), NcPolynomial::symbol(s)))
                    })
                    .collect();
                ActionElement::from_map(self.gens.rank(), map)
            })
            .collect()
    }

    /// Homomorphism relations from identity pairs. Words are letter-sorted
    /// multisets; within each sum class every word is compared with the
    /// class representative, and words of length ≤ 2 with every other word.
    /// Adjacent transpositions [x,y] vs [y,x] supply the reorderings.
    fn generate_homomorphism(&mut self) -> Result<usize, DeriveError> {
        if !self.config.enabled(InferenceRule::Homomorphism) {
            return Ok(0);
        }
        let key = (self.stage_len, self.system.zero_symbols().len());
        if self.generated_at == Some(key) {
            return Ok(0);
        }
        self.generated_at = Some(key);
        let rank = self.gens.rank();
        let cap = self.config.coefficient_cap;
        let gen_actions = self.reduced_generator_actions();
        let n = self.gens.len();

        // Letter-sorted index words, prefix-shared.
        let mut words: Vec<Vec<usize>> = vec![vec![]];
        let mut frontier: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..self.stage_len {
            let mut next = Vec::new();
            for w in &frontier {
                let start = w.last().copied().unwrap_or(0);
                for i in start..n {
                    let mut v = w.clone();
                    v.push(i);
                    next.push(v);
                }
            }
            words.extend(next.iter().cloned());
            frontier = next;
        }
        let mut actions: HashMap<Vec<usize>, PartialAction> = HashMap::new();
        actions.insert(vec![], PartialAction::unit(rank));
        for w in &words[1..] {
            let prefix = &w[..w.len() - 1];
            let act = actions[prefix].times(&gen_actions[*w.last().expect("nonempty")], cap);
            actions.insert(w.clone(), act);
        }
        let sum_of = |w: &[usize]| w.iter().fold(GroupElement::zero(rank), |acc, &i| acc.add(&self.gens.gens()[i]));
        let mut buckets: BTreeMap<GroupElement, Vec<Vec<usize>>> = BTreeMap::new();
        for w in &words {
            buckets.entry(sum_of(w)).or_default().push(w.clone());
        }
        let mut pairs: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for members in buckets.values() {
            for (i, a) in members.iter().enumerate() {
                for b in &members[i + 1..] {
                    if i == 0 || (a.len() <= 2 && b.len() <= 2) {
                        pairs.push((a.clone(), b.clone()));
                    }
                }
            }
        }
        // Reorderings, expanded exactly.
        let mut extra: Vec<(Vec<usize>, Vec<usize>, PartialAction, PartialAction)> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let ab = actions[&vec![i, j]].clone();
                let ba = PartialAction::unit(rank).times(&gen_actions[j], cap).times(&gen_actions[i], cap);
                extra.push((vec![i, j], vec![j, i], ab, ba));
            }
        }
        let render =
            |w: &[usize]| GroupWord::new(rank, w.iter().map(|&i| self.gens.gens()[i].clone()).collect()).to_string();
        let mut found: Vec<(NcPolynomial, String)> = Vec::new();
        let mut compare = |a: &PartialAction, b: &PartialAction, label: String| {
            let keys: BTreeSet<&GroupElement> = a.known.keys().chain(b.known.keys()).collect();
            for g in keys {
                if let (Some(x), Some(y)) = (a.coefficient(g), b.coefficient(g)) {
                    let rel = &x - &y;
                    if !rel.is_zero() {
                        found.push((rel, format!("{label} at λ_{g}")));
                    }
                }
            }
        };
        for (a, b) in &pairs {
            compare(&actions[a], &actions[b], format!("α{} = α{}", render(a), render(b)));
        }
        for (a, b, pa, pb) in &extra {
            compare(pa, pb, format!("α{} = α{} (reordered)", render(a), render(b)));
        }
        found.sort_by_key(|(rel, _)| (rel.degree(), rel.len()));
        let mut count = 0;
        for (rel, note) in found {
            if self.nf(&rel).is_zero() {
                continue;
            }
            if self.record(rel, InferenceRule::Homomorphism, vec![], note).is_some() {
                count += 1;
                self.absorb()?;
            }
        }
        Ok(count)
    }

    /// Splits a sign-definite relation Σ c_t w_t = 0 into y_t = 0, where
    /// each surviving w_t is congruent to y_t·y_t* modulo the current rules.
    fn positive_split(&self, rel: &NcPolynomial) -> Option<Vec<NcWord>> {
        if !rel.constant_term().is_zero() || !rel.is_sign_definite() {
            return None;
        }
        let mut ys = BTreeSet::new();
        for t in rel.terms() {
            let reduced = self.nf_word(&t.word);
            if reduced.is_zero() {
                continue;
            }
            let mut candidates = Vec::new();
            if t.word.len() % 2 == 0 {
                candidates.push(t.word.slice(0, t.word.len() / 2));
            }
            if let Some(lead) = reduced.leading() {
                if lead.word.len() % 2 == 0 && !lead.word.is_empty() {
                    candidates.push(lead.word.slice(0, lead.word.len() / 2));
                }
            }
            let y = candidates.into_iter().find(|y| {
                let yy = NcPolynomial::word(y.concat(&y.adjoint()));
                self.nf(&yy) == reduced
            })?;
            ys.insert(y);
        }
        if ys.is_empty() {
            None
        } else {
            Some(ys.into_iter().collect())
        }
    }

    /// One application of every enabled inference rule to the current state.
    pub fn apply_inference(&self) -> Vec<Candidate> {
        let mut out: Vec<Candidate> = Vec::new();
        let nonzero = self.nonzero_symbols();

        if self.config.enabled(InferenceRule::UnitaryProduct) {
            for &uid in &self.unitarity_ids {
                let u = &self.log[uid].relation;
                for x in &nonzero {
                    let xw = NcWord::new(vec![x.clone()]);
                    for (left, right, side) in [(&xw, &NcWord::empty(), "left"), (&NcWord::empty(), &xw, "right")] {
                        let r = self.nf(&u.sandwich(left, right));
                        if !r.is_zero() && r.len() <= 2 {
                            out.push(Candidate {
                                relation: r,
                                rule: InferenceRule::UnitaryProduct,
                                sources: vec![uid],
                                note: format!("{side} product with {x}"),
                            });
                        }
                    }
                }
            }
        }

        let split_enabled =
            self.config.enabled(InferenceRule::PositivitySplit) || self.config.enabled(InferenceRule::XxStarZero);
        if split_enabled {
            for d in &self.log {
                let rel = &d.relation;
                if !rel.constant_term().is_zero() || !rel.is_sign_definite() {
                    continue;
                }
                if let Some(ys) = self.positive_split(rel) {
                    self.push_split(&mut out, ys, d.id, None);
                }
                let quadratic = rel.terms().iter().all(|t| t.word.len() == 2);
                if quadratic && self.config.enabled(InferenceRule::Sandwich) {
                    for t in rel.terms() {
                        let syms = t.word.symbols();
                        let left = NcWord::new(vec![syms[1].adjoint()]);
                        let right = NcWord::new(vec![syms[0].adjoint()]);
                        let sandwiched = rel.sandwich(&left, &right);
                        if let Some(ys) = self.positive_split(&sandwiched) {
                            let note = format!("{left} · ({}) · {right}", d.id);
                            self.push_split(&mut out, ys, d.id, Some((sandwiched, note)));
                        }
                    }
                }
            }
        }

        if self.config.enabled(InferenceRule::NormalityTactic) {
            for x in &nonzero {
                let xs = x.adjoint();
                let w = |v: Vec<&SymbolId>| NcWord::new(v.into_iter().cloned().collect());
                let nx = self.nf_word(&w(vec![x]));
                if self.nf_word(&w(vec![x, x, &xs])) == nx && self.nf_word(&w(vec![&xs, x, x])) == nx {
                    let rel = &NcPolynomial::word(w(vec![x, &xs])) - &NcPolynomial::word(w(vec![&xs, x]));
                    let r = self.nf(&rel);
                    if !r.is_zero() {
                        out.push(Candidate {
                            relation: rel,
                            rule: InferenceRule::NormalityTactic,
                            sources: vec![],
                            note: format!("{x}²{x}* = {x} = {x}*{x}²"),
                        });
                    }
                }
            }
        }

        if self.config.enabled(InferenceRule::NilpotentNormalZero) {
            let normal: Vec<&SymbolId> = nonzero.iter().filter(|x| self.is_normal(x)).collect();
            for y in &normal {
                for m in 2..=self.config.max_power {
                    let ym = NcWord::new(vec![(*y).clone(); m]);
                    if self.nf_word(&ym).is_zero() {
                        out.push(Candidate {
                            relation: NcPolynomial::symbol((*y).clone()),
                            rule: InferenceRule::NilpotentNormalZero,
                            sources: vec![],
                            note: format!("{y}^{m} = 0 and {y} normal"),
                        });
                        break;
                    }
                }
                for u in &nonzero {
                    if u == *y {
                        continue;
                    }
                    let uw = NcWord::new(vec![u.clone()]);
                    let yw = NcWord::new(vec![(*y).clone()]);
                    for (prod, name) in [(yw.concat(&uw), "left"), (uw.concat(&yw), "right")] {
                        if self.nf_word(&prod).is_zero() {
                            continue;
                        }
                        for m in 2..=self.config.max_power {
                            let ym = NcWord::new(vec![(*y).clone(); m]);
                            let longer = if name == "left" { ym.concat(&uw) } else { uw.concat(&ym) };
                            if self.nf_word(&longer).is_zero() {
                                out.push(Candidate {
                                    relation: NcPolynomial::word(prod.clone()),
                                    rule: InferenceRule::NilpotentNormalZero,
                                    sources: vec![],
                                    note: format!("{longer} = 0 and {y} normal"),
                                });
                                break;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn push_split(
        &self,
        out: &mut Vec<Candidate>,
        ys: Vec<NcWord>,
        source: usize,
        sandwich: Option<(NcPolynomial, String)>,
    ) {
        let fresh: Vec<NcWord> = ys.into_iter().filter(|y| !self.nf_word(y).is_zero()).collect();
        if fresh.is_empty() {
            return;
        }
        let single = fresh.len() == 1 && sandwich.is_none();
        let rule = if single { InferenceRule::XxStarZero } else { InferenceRule::PositivitySplit };
        if !self.config.enabled(rule) {
            return;
        }
        let note_src = match &sandwich {
            Some((rel, note)) => {
                out.push(Candidate {
                    relation: rel.clone(),
                    rule: InferenceRule::Sandwich,
                    sources: vec![source],
                    note: note.clone(),
                });
                format!("sandwich of {source}")
            }
            None => format!("{source}"),
        };
        for y in fresh {
            out.push(Candidate {
                relation: NcPolynomial::word(y.clone()),
                rule,
                sources: vec![source],
                note: format!("{y}·({y})* summand of {note_src}"),
            });
        }
    }

    pub fn is_normal(&self, x: &SymbolId) -> bool {
        let xs = x.adjoint();
        let a = NcWord::new(vec![x.clone(), xs.clone()]);
        let b = NcWord::new(vec![xs, x.clone()]);
        self.nf_word(&a) == self.nf_word(&b)
    }

    fn update_facts(&mut self) {
        let nonzero = self.nonzero_symbols();
        for x in nonzero {
            if self.is_normal(&x) {
                self.system.record_fact(&x, Fact::Normal);
            }
            let p = NcPolynomial::word(NcWord::new(vec![x.clone(), x.adjoint()]));
            let np = self.nf(&p);
            if !np.is_zero() && self.nf(&(&p * &p)) == np {
                self.system.record_fact(&x, Fact::Projection);
            }
        }
    }

    /// Runs one saturation round. Returns the number of new deductions; a
    /// round with none moves on to the next word length, and only a quiet
    /// round at the full length is final.
    pub fn step(&mut self) -> Result<StepOutcome, DeriveError> {
        let before = self.log.len();
        if self.round == 0 {
            self.seed_unitarity();
        }
        self.generate_homomorphism()?;
        self.absorb()?;
        let candidates = self.apply_inference();
        for c in candidates {
            self.record_candidate(c);
        }
        self.absorb()?;
        self.system.reduce_rhs();
        self.update_facts();
        self.round += 1;
        self.zero_history.push(self.system.zero_symbols().len());
        let new = self.log.len() - before;
        if new > 0 {
            Ok(StepOutcome::Progress(new))
        } else if self.stage_len < self.config.max_word_len {
            self.stage_len += 1;
            Ok(StepOutcome::Lengthened(self.stage_len))
        } else if self.restricted {
            self.restricted = false;
            self.pending.append(&mut self.deferred);
            self.generated_at = None;
            Ok(StepOutcome::Widened)
        } else {
            Ok(StepOutcome::Fixpoint)
        }
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn into_report(self, fixpoint: bool) -> DerivationReport {
        let zero_symbols: BTreeSet<SymbolId> = self.system.zero_symbols();
        let surviving: BTreeSet<SymbolId> =
            self.all_symbols().into_iter().filter(|s| !zero_symbols.contains(s)).collect();
        let survivor_relations: Vec<Rule> = self
            .system
            .rules()
            .filter(|r| !(r.lhs.len() == 1 && r.rhs.is_zero()))
            .filter(|r| r.relation().symbols().iter().all(|s| surviving.contains(s)))
            .collect();
        let initial = FundamentalUnitary::initial(&self.gens);
        let reduced = initial.map_entries(|p| self.system.normal_form(p));
        DerivationReport {
            rank: self.gens.rank(),
            generators: self.gens.gens().to_vec(),
            config: self.config.clone(),
            deductions: self.log,
            zero_symbols,
            surviving_symbols: surviving,
            survivor_relations,
            reduced,
            fixpoint,
            rounds: self.round,
            zero_history: self.zero_history,
            facts: self.system.facts().clone(),
            gens: self.gens,
            system: self.system,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Progress(usize),
    /// Nothing new at the current word length; the next stage uses this one.
    Lengthened(usize),
    /// The restricted phase is saturated; deferred relations are released.
    Widened,
    Fixpoint,
}

/// The output of [`saturate`].
#[derive(Clone, Debug)]
pub struct DerivationReport {
    pub rank: usize,
    pub generators: Vec<GroupElement>,
    pub config: EngineConfig,
    pub deductions: Vec<Deduction>,
    pub zero_symbols: BTreeSet<SymbolId>,
    pub surviving_symbols: BTreeSet<SymbolId>,
    /// Rules of the final system that involve only surviving symbols.
    pub survivor_relations: Vec<Rule>,
    pub reduced: FundamentalUnitary,
    pub fixpoint: bool,
    pub rounds: usize,
    /// Number of zero symbols after each round.
    pub zero_history: Vec<usize>,
    pub facts: BTreeMap<SymbolId, BTreeSet<Fact>>,
    pub gens: GenSet,
    pub system: RewriteSystem,
}

impl DerivationReport {
    pub fn nf(&self, p: &NcPolynomial) -> NcPolynomial {
        self.system.normal_form(p)
    }

    /// True when `a = b` holds after normalization.
    pub fn proves_equal(&self, a: &NcPolynomial, b: &NcPolynomial) -> bool {
        self.nf(&(a - b)).is_zero()
    }

    pub fn names(&self) -> SymbolNames {
        SymbolNames::new(&self.gens)
    }
}

/// Saturates the relations of Q(Z^n, S) under the enabled inference rules.
pub fn saturate(s: &GenSet, cfg: &EngineConfig) -> Result<DerivationReport, DeriveError> {
    let mut state = DerivationState::new(s.clone(), cfg.clone())?;
    let mut fixpoint = false;
    for _ in 0..cfg.max_rounds {
        if state.step()? == StepOutcome::Fixpoint {
            fixpoint = true;
            break;
        }
    }
    Ok(state.into_report(fixpoint))
}

/// The entrywise normal form of the fundamental unitary.
pub fn reduced_unitary(report: &DerivationReport) -> FundamentalUnitary {
    FundamentalUnitary::initial(&report.gens).map_entries(|p| report.nf(p))
}
