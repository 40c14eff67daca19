//! Exact commutative models: block algebras of Laurent polynomials.
//!
//! A point (z, M) of T^n × G, with G a group of lattice automorphisms
//! preserving S, gives the classical isometry λ_g ↦ z^{Mg} λ_{Mg}. Its
//! coefficient functions send q[r|c] to t^c on component M when Mr = c and
//! to 0 otherwise. With G the diagonal sign group this is the doubling
//! D_θ(C*(Z)) (θ = −id) for n = 1 and its n-fold tensor power for
//! axis-aligned S.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derive::{DerivationReport, FundamentalUnitary, SymbolNames};
use crate::grpalg::{GenSet, GroupElement};
use crate::ncalg::{Coeff, NcPolynomial, NcWord, SymbolId};

pub const TEMPLATE_DOUBLING: &str = "doubling of C*(Z)";
pub const TEMPLATE_TENSOR: &str = "tensor product of doublings of C*(Z)";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("doubling template needs axis-aligned generators; {0} is not")]
    NotAxisAligned(String),
    #[error("symbol {0} has no assigned value")]
    Unassigned(String),
}

/// A Laurent polynomial in n commuting unitaries t₁, …, t_n.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentElem {
    terms: BTreeMap<GroupElement, Coeff>,
}

impl LaurentElem {
    pub fn zero() -> Self {
        LaurentElem::default()
    }

    pub fn one(rank: usize) -> Self {
        Self::monomial(GroupElement::zero(rank), Coeff::one())
    }

    pub fn monomial(exp: GroupElement, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        LaurentElem { terms }
    }

    pub fn t(exp: GroupElement) -> Self {
        Self::monomial(exp, Coeff::one())
    }

    pub fn terms(&self) -> &BTreeMap<GroupElement, Coeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(terms: &mut BTreeMap<GroupElement, Coeff>, exp: GroupElement, c: Coeff) {
        let e = terms.entry(exp).or_insert_with(Coeff::zero);
        *e += c;
        if e.is_zero() {
            terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            Self::accumulate(&mut terms, e.clone(), *c);
        }
        LaurentElem { terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Coeff::one()))
    }

    pub fn scale(&self, c: Coeff) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentElem { terms: self.terms.iter().map(|(e, v)| (e.clone(), *v * c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                Self::accumulate(&mut terms, e1.add(e2), *c1 * *c2);
            }
        }
        LaurentElem { terms }
    }

    /// t^m ↦ t^{−m}; coefficients are real.
    pub fn adjoint(&self) -> Self {
        LaurentElem { terms: self.terms.iter().map(|(e, c)| (e.neg(), *c)).collect() }
    }
}

impl fmt::Display for LaurentElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            let mag = c.abs();
            let mono: Vec<String> = e
                .coords()
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(j, &k)| {
                    let var = if e.rank() == 1 { "t".to_string() } else { format!("t{}", j + 1) };
                    if k == 1 {
                        var
                    } else {
                        format!("{var}^{k}")
                    }
                })
                .collect();
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{}", mono.join(""))?,
                (false, false) => write!(f, "{mag}{}", mono.join(""))?,
            }
        }
        Ok(())
    }
}

/// A function from component indices to Laurent polynomials; absent
/// components are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BlockAlgebraElem {
    comps: BTreeMap<usize, LaurentElem>,
}

impl BlockAlgebraElem {
    pub fn zero() -> Self {
        BlockAlgebraElem::default()
    }

    pub fn unit(components: usize, rank: usize) -> Self {
        Self::from_components((0..components).map(|k| (k, LaurentElem::one(rank))))
    }

    pub fn from_components(it: impl IntoIterator<Item = (usize, LaurentElem)>) -> Self {
        BlockAlgebraElem { comps: it.into_iter().filter(|(_, v)| !v.is_zero()).collect() }
    }

    pub fn component(&self, k: usize) -> LaurentElem {
        self.comps.get(&k).cloned().unwrap_or_default()
    }

    pub fn components(&self) -> &BTreeMap<usize, LaurentElem> {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    fn zip(&self, other: &Self, f: impl Fn(&LaurentElem, &LaurentElem) -> LaurentElem) -> Self {
        let keys: BTreeSet<usize> = self.comps.keys().chain(other.comps.keys()).copied().collect();
        Self::from_components(keys.into_iter().map(|k| (k, f(&self.component(k), &other.component(k)))))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, LaurentElem::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, LaurentElem::sub)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_components(self.comps.iter().filter_map(|(k, v)| other.comps.get(k).map(|w| (*k, v.mul(w)))))
    }

    pub fn scale(&self, c: Coeff) -> Self {
        Self::from_components(self.comps.iter().map(|(k, v)| (*k, v.scale(c))))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_components(self.comps.iter().map(|(k, v)| (*k, v.adjoint())))
    }

    pub fn render(&self, labels: &[String]) -> String {
        if self.comps.is_empty() {
            return "0".into();
        }
        self.comps
            .iter()
            .map(|(k, v)| format!("{}: {v}", labels.get(*k).map(String::as_str).unwrap_or("?")))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// An n×n integer matrix acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntMatrix(pub Vec<Vec<i64>>);

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        IntMatrix((0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect())
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, g: &GroupElement) -> GroupElement {
        let v: Vec<i64> = self.0.iter().map(|row| row.iter().zip(g.coords()).map(|(a, b)| a * b).sum()).collect();
        GroupElement::new(&v)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.size();
        IntMatrix(
            (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| self.0[i][k] * other.0[k][j]).sum()).collect()).collect(),
        )
    }

    pub fn neg(&self) -> Self {
        IntMatrix(self.0.iter().map(|r| r.iter().map(|x| -x).collect()).collect())
    }

    pub fn det(&self) -> i64 {
        let m: Vec<Vec<Coeff>> = self.0.iter().map(|r| r.iter().map(|&x| Coeff::from_integer(x)).collect()).collect();
        let d = rational_det(m);
        *d.numer()
    }

    /// True when the matrix is diagonal with entries ±1.
    pub fn is_sign_diagonal(&self) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().enumerate().all(|(j, &x)| if i == j { x.abs() == 1 } else { x == 0 }))
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.size() == 1 {
            return write!(f, "{}", self.0[0][0]);
        }
        let rows: Vec<String> =
            self.0.iter().map(|r| r.iter().map(i64::to_string).collect::<Vec<_>>().join(",")).collect();
        write!(f, "[{}]", rows.join(";"))
    }
}

fn rational_det(mut m: Vec<Vec<Coeff>>) -> Coeff {
    let n = m.len();
    let mut det = Coeff::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Coeff::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        det *= m[col][col];
        let pivot = m[col].clone();
        for row in m.iter_mut().skip(col + 1) {
            let factor = row[col] / pivot[col];
            for (x, p) in row.iter_mut().zip(&pivot).skip(col) {
                *x -= *p * factor;
            }
        }
    }
    det
}

/// Inverse over the rationals, or `None` when singular.
fn rational_inverse(m: &[Vec<Coeff>]) -> Option<Vec<Vec<Coeff>>> {
    let n = m.len();
    let mut a: Vec<Vec<Coeff>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Coeff::one() } else { Coeff::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        let piv = a[col][col];
        for x in a[col].iter_mut() {
            *x /= piv;
        }
        let pivot = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col];
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= *p * f;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Lattice automorphisms of Z^n mapping S onto itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricAutGroup {
    pub rank: usize,
    pub elements: Vec<IntMatrix>,
}

impl MetricAutGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, m: &IntMatrix) -> bool {
        self.elements.binary_search(m).is_ok()
    }

    /// Closed under products and contains the identity (inverses follow
    /// for a finite set).
    pub fn is_group(&self) -> bool {
        self.contains(&IntMatrix::identity(self.rank))
            && self.elements.iter().all(|a| self.elements.iter().all(|b| self.contains(&a.mul(b))))
    }

    /// The diagonal sign matrices that preserve S.
    pub fn sign_subgroup(&self) -> MetricAutGroup {
        MetricAutGroup {
            rank: self.rank,
            elements: self.elements.iter().filter(|m| m.is_sign_diagonal()).cloned().collect(),
        }
    }
}

pub fn metric_aut_group(s: &GenSet) -> MetricAutGroup {
    let n = s.rank();
    // Greedy basis of n independent generators.
    let mut basis: Vec<GroupElement> = Vec::new();
    for g in s.gens() {
        let mut trial = basis.clone();
        trial.push(g.clone());
        if rank_of(&trial) == trial.len() {
            basis = trial;
        }
        if basis.len() == n {
            break;
        }
    }
    // Columns of B are the basis vectors.
    let b: Vec<Vec<Coeff>> =
        (0..n).map(|i| basis.iter().map(|v| Coeff::from_integer(v.coords()[i])).collect()).collect();
    let b_inv = rational_inverse(&b).expect("generating set spans Z^n");
    let gens: BTreeSet<&GroupElement> = s.gens().iter().collect();
    let mut found = BTreeSet::new();
    let mut idx = vec![0usize; n];
    loop {
        let images: Vec<&GroupElement> = idx.iter().map(|&k| &s.gens()[k]).collect();
        // M = Img · B⁻¹ with Img's columns the chosen images.
        let mut m = vec![vec![0i64; n]; n];
        let mut integral = true;
        'outer: for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let v: Coeff = (0..n).map(|k| Coeff::from_integer(images[k].coords()[i]) * b_inv[k][j]).sum();
                if !v.is_integer() {
                    integral = false;
                    break 'outer;
                }
                *entry = v.to_integer();
            }
        }
        if integral {
            let m = IntMatrix(m);
            if m.det().abs() == 1 && s.gens().iter().all(|g| gens.contains(&m.apply(g))) {
                found.insert(m);
            }
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < s.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    MetricAutGroup { rank: n, elements: found.into_iter().collect() }
}

fn rank_of(vs: &[GroupElement]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    let n = vs[0].rank();
    let mut rows: Vec<Vec<Coeff>> =
        vs.iter().map(|v| v.coords().iter().map(|&x| Coeff::from_integer(x)).collect()).collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(p, rank);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = row[col] / pivot[col];
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= *p * f;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Values of every symbol in a block algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelAssignment {
    pub name: String,
    pub rank: usize,
    pub labels: Vec<String>,
    pub images: BTreeMap<SymbolId, BlockAlgebraElem>,
    /// The automorphism twisting the doubling.
    pub theta: String,
}

impl ModelAssignment {
    /// q[r|c] ↦ Σ_{M ∈ G, Mr = c} t^c e_M.
    pub fn classical(s: &GenSet, group: &MetricAutGroup, name: &str) -> Self {
        let labels: Vec<String> = group.elements.iter().map(label_for).collect();
        let mut images = BTreeMap::new();
        for r in s.gens() {
            for c in s.gens() {
                let v = BlockAlgebraElem::from_components(
                    group
                        .elements
                        .iter()
                        .enumerate()
                        .filter(|(_, m)| m.apply(r) == *c)
                        .map(|(k, _)| (k, LaurentElem::t(c.clone()))),
                );
                images.insert(SymbolId::new(r.clone(), c.clone()), v);
            }
        }
        ModelAssignment { name: name.into(), rank: s.rank(), labels, images, theta: "x ↦ -x".into() }
    }

    pub fn components(&self) -> usize {
        self.labels.len()
    }

    pub fn unit(&self) -> BlockAlgebraElem {
        BlockAlgebraElem::unit(self.components(), self.rank)
    }

    pub fn image(&self, s: &SymbolId) -> Result<&BlockAlgebraElem, ModelError> {
        self.images.get(s).ok_or_else(|| ModelError::Unassigned(s.to_string()))
    }

    /// Assignment(−r, −c) is the adjoint of assignment(r, c).
    pub fn respects_adjoints(&self) -> bool {
        self.images.iter().all(|(s, v)| self.images.get(&s.adjoint()).is_some_and(|w| *w == v.adjoint()))
    }

    /// Boolean zero pattern in the order of `index`.
    pub fn zero_pattern(&self, index: &[GroupElement]) -> Vec<Vec<bool>> {
        index
            .iter()
            .map(|r| {
                index
                    .iter()
                    .map(|c| self.images.get(&SymbolId::new(r.clone(), c.clone())).is_none_or(|v| v.is_zero()))
                    .collect()
            })
            .collect()
    }

    /// Both unitarity sums of the assigned matrix equal δ.
    pub fn is_unitary(&self, s: &GenSet) -> bool {
        let unit = self.unit();
        let q = |r: &GroupElement, c: &GroupElement| self.images[&SymbolId::new(r.clone(), c.clone())].clone();
        for a in s.gens() {
            for b in s.gens() {
                let mut row = BlockAlgebraElem::zero();
                let mut col = BlockAlgebraElem::zero();
                for k in s.gens() {
                    row = row.add(&q(a, k).mul(&q(b, k).adjoint()));
                    col = col.add(&q(k, a).adjoint().mul(&q(k, b)));
                }
                let expected = if a == b { unit.clone() } else { BlockAlgebraElem::zero() };
                if row != expected || col != expected {
                    return false;
                }
            }
        }
        true
    }
}

fn label_for(m: &IntMatrix) -> String {
    if m.is_sign_diagonal() {
        let signs: Vec<&str> = (0..m.size()).map(|i| if m.0[i][i] > 0 { "+" } else { "-" }).collect();
        if signs.len() == 1 {
            signs[0].to_string()
        } else {
            format!("({})", signs.join(","))
        }
    } else {
        m.to_string()
    }
}

/// The doubling (n = 1) or tensor of doublings (axis-aligned S) model.
pub fn doubling_assignment(s: &GenSet) -> Result<ModelAssignment, ModelError> {
    if let Some(g) = s.gens().iter().find(|g| g.support_size() != 1) {
        return Err(ModelError::NotAxisAligned(g.to_string()));
    }
    let n = s.rank();
    // All sign vectors, "+" before "-" in each slot.
    let mut elements: Vec<IntMatrix> = Vec::new();
    for mask in 0..(1usize << n) {
        let mut m = IntMatrix::identity(n);
        for i in 0..n {
            if mask >> (n - 1 - i) & 1 == 1 {
                m.0[i][i] = -1;
            }
        }
        elements.push(m);
    }
    let group = MetricAutGroup { rank: n, elements };
    let name = if n == 1 { TEMPLATE_DOUBLING } else { TEMPLATE_TENSOR };
    Ok(ModelAssignment::classical(s, &group, name))
}

pub fn evaluate(p: &NcPolynomial, m: &ModelAssignment) -> Result<BlockAlgebraElem, ModelError> {
    let mut out = BlockAlgebraElem::zero();
    for t in p.terms() {
        let mut v = m.unit();
        for s in t.word.symbols() {
            v = v.mul(m.image(s)?);
            if v.is_zero() {
                break;
            }
        }
        out = out.add(&v.scale(t.coeff));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub source: String,
    pub relation: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundnessVerdict {
    pub model: String,
    pub checked: usize,
    pub violations: Vec<Violation>,
    pub unitary: bool,
}

impl SoundnessVerdict {
    pub fn is_sound(&self) -> bool {
        self.violations.is_empty() && self.unitary
    }
}

/// Evaluates every logged deduction and every final rewrite rule.
pub fn verify_soundness(report: &DerivationReport, m: &ModelAssignment) -> SoundnessVerdict {
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut check = |source: String, rel: &NcPolynomial| {
        checked += 1;
        let value = match evaluate(rel, m) {
            Ok(v) if v.is_zero() => return,
            Ok(v) => v.render(&m.labels),
            Err(e) => e.to_string(),
        };
        violations.push(Violation { source, relation: rel.to_string(), value });
    };
    for d in &report.deductions {
        check(format!("deduction #{} ({})", d.id, d.rule), &d.relation);
    }
    for r in report.system.rules() {
        check(format!("rule {}", r.lhs), &r.relation());
    }
    SoundnessVerdict { model: m.name.clone(), checked, violations, unitary: m.is_unitary(&report.gens) }
}

/// Checks a list of relations, e.g. a deliberately corrupted one.
pub fn verify_relations(rels: &[NcPolynomial], m: &ModelAssignment, s: &GenSet) -> SoundnessVerdict {
    let mut violations = Vec::new();
    for (i, rel) in rels.iter().enumerate() {
        match evaluate(rel, m) {
            Ok(v) if v.is_zero() => {}
            Ok(v) => violations.push(Violation {
                source: format!("relation {i}"),
                relation: rel.to_string(),
                value: v.render(&m.labels),
            }),
            Err(e) => violations.push(Violation {
                source: format!("relation {i}"),
                relation: rel.to_string(),
                value: e.to_string(),
            }),
        }
    }
    SoundnessVerdict { model: m.name.clone(), checked: rels.len(), violations, unitary: m.is_unitary(s) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Commutativity {
    /// Every commutator of surviving symbols rewrites to zero.
    Yes,
    /// Some commutator does not reduce; the system need not be complete.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invariants {
    /// Sizes of the blocks of the surviving pattern of U (connected
    /// components of the nonzero entries), deduplicated.
    pub block_sizes: Vec<usize>,
    pub commutativity: Commutativity,
    pub aut_order: usize,
}

/// An integer combination Σ x_i a_i = e_axis lifted to a word in diagonal
/// symbols, with its exact image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurjectivityWitness {
    pub axis: usize,
    pub combination: Vec<(GroupElement, i64)>,
    pub word: NcWord,
    pub rendered: String,
    pub image: String,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub template: Option<String>,
    pub invariants: Invariants,
    pub zero_pattern: Vec<Vec<bool>>,
    pub witnesses: Vec<SurjectivityWitness>,
    pub soundness: Vec<SoundnessVerdict>,
    pub notes: Vec<String>,
}

impl Classification {
    pub fn is_sound(&self) -> bool {
        self.soundness.iter().all(SoundnessVerdict::is_sound)
    }
}

/// Extended Euclid over several integers: coefficients x with Σ x_i v_i = gcd.
pub fn bezout(values: &[i64]) -> (i64, Vec<i64>) {
    let mut g = 0i64;
    let mut coeffs: Vec<i64> = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        if i == 0 {
            g = v.abs();
            coeffs.push(v.signum());
            continue;
        }
        let ext = num_integer::Integer::extended_gcd(&g, &v);
        let (x, y) = (ext.x, ext.y);
        for c in coeffs.iter_mut() {
            *c *= x;
        }
        coeffs.push(y);
        g = ext.gcd;
    }
    if g < 0 {
        g = -g;
        for c in coeffs.iter_mut() {
            *c = -*c;
        }
    }
    // Shift the first pair so its leading coefficient is the least positive one.
    if values.len() >= 2 && values[0] != 0 && values[1] != 0 {
        let d = num_integer::Integer::gcd(&values[0], &values[1]);
        let (step0, step1) = (values[1] / d, -values[0] / d);
        let period = step0.abs();
        let k = (coeffs[0] - 1).div_euclid(period) * step0.signum();
        coeffs[0] -= k * step0;
        coeffs[1] -= k * step1;
    }
    (g, coeffs)
}

fn block_sizes(pattern: &[Vec<bool>]) -> Vec<usize> {
    let n = pattern.len();
    // Union-find over rows (0..n) and columns (n..2n).
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (i, row) in pattern.iter().enumerate() {
        for (j, &zero) in row.iter().enumerate() {
            if !zero {
                let (a, b) = (find(&mut parent, i), find(&mut parent, n + j));
                parent[a] = b;
            }
        }
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        *sizes.entry(r).or_default() += 1;
    }
    let set: BTreeSet<usize> = sizes.values().copied().collect();
    set.into_iter().collect()
}

fn commutativity(report: &DerivationReport) -> Commutativity {
    let survivors: Vec<&SymbolId> = report.surviving_symbols.iter().collect();
    for (i, x) in survivors.iter().enumerate() {
        for y in &survivors[i + 1..] {
            let xy = NcPolynomial::word(NcWord::new(vec![(*x).clone(), (*y).clone()]));
            let yx = NcPolynomial::word(NcWord::new(vec![(*y).clone(), (*x).clone()]));
            if !report.proves_equal(&xy, &yx) {
                return Commutativity::Unknown;
            }
        }
    }
    Commutativity::Yes
}

fn witnesses(s: &GenSet, m: &ModelAssignment) -> Vec<SurjectivityWitness> {
    let names = SymbolNames::new(s);
    (0..s.rank())
        .map(|axis| {
            let along: Vec<GroupElement> =
                s.positives().into_iter().filter(|g| g.coords()[axis] != 0 && g.support_size() == 1).collect();
            let values: Vec<i64> = along.iter().map(|g| g.coords()[axis]).collect();
            let (gcd, coeffs) = if values.is_empty() { (0, vec![]) } else { bezout(&values) };
            let mut syms = Vec::new();
            let combination: Vec<(GroupElement, i64)> =
                along.iter().cloned().zip(coeffs.iter().copied()).filter(|(_, x)| *x != 0).collect();
            // Adjoint factors first, then positive powers.
            for (g, x) in combination.iter().filter(|(_, x)| *x < 0) {
                let sym = SymbolId::new(g.clone(), g.clone()).adjoint();
                syms.extend(std::iter::repeat_n(sym, x.unsigned_abs() as usize));
            }
            for (g, x) in combination.iter().filter(|(_, x)| *x > 0) {
                syms.extend(std::iter::repeat_n(SymbolId::new(g.clone(), g.clone()), *x as usize));
            }
            let word = NcWord::new(syms);
            let image = evaluate(&NcPolynomial::word(word.clone()), m).unwrap_or_default();
            let target = BlockAlgebraElem::from_components(
                m.labels
                    .iter()
                    .enumerate()
                    .filter(|(_, label)| if s.rank() == 1 { label.starts_with('+') } else { axis_sign(label, axis) })
                    .map(|(k, _)| (k, LaurentElem::t(GroupElement::basis(s.rank(), axis)))),
            );
            let valid = gcd == 1 && !word.is_empty() && image == target;
            SurjectivityWitness {
                axis,
                combination,
                rendered: format!("{} = {}", word, names.word(&word)),
                image: image.render(&m.labels),
                word,
                valid,
            }
        })
        .collect()
}

/// Sign of `axis` in a label "(+,-,…)".
fn axis_sign(label: &str, axis: usize) -> bool {
    label.trim_matches(|c| c == '(' || c == ')').split(',').nth(axis) == Some("+")
}

/// Matches a report against the doubling templates and computes invariants.
pub fn classify(report: &DerivationReport, s: &GenSet) -> Classification {
    let mut notes = Vec::new();
    let zero_pattern = report.reduced.zero_pattern();
    let aut = metric_aut_group(s);
    let invariants = Invariants {
        block_sizes: block_sizes(&zero_pattern),
        commutativity: commutativity(report),
        aut_order: aut.order(),
    };
    let mut soundness = vec![verify_soundness(
        report,
        &ModelAssignment::classical(s, &aut, "classical isometries C(T^n ⋊ Aut(Z^n,S))"),
    )];
    let mut template = None;
    let mut witness_list = Vec::new();
    match doubling_assignment(s) {
        Err(e) => notes.push(e.to_string()),
        Ok(m) => {
            let verdict = verify_soundness(report, &m);
            let pattern_ok = m.zero_pattern(&report.reduced.index) == zero_pattern;
            witness_list = witnesses(s, &m);
            if !report.fixpoint {
                notes.push("saturation budget exhausted before fixpoint".into());
            }
            if !pattern_ok {
                notes.push(format!("forced-zero pattern differs from the {} model", m.name));
            }
            if invariants.commutativity != Commutativity::Yes {
                notes.push("commutativity of survivors not established by rewriting".into());
            }
            if !verdict.is_sound() {
                notes.push(format!("{} violations against the {} model", verdict.violations.len(), m.name));
            }
            let ok = report.fixpoint
                && pattern_ok
                && invariants.commutativity == Commutativity::Yes
                && verdict.is_sound()
                && witness_list.iter().all(|w| w.valid);
            if ok {
                template = Some(m.name.clone());
            }
            if aut.elements.iter().any(|g| !g.is_sign_diagonal()) {
                soundness.push(verdict);
            }
        }
    }
    Classification { template, invariants, zero_pattern, witnesses: witness_list, soundness, notes }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub distinguished: bool,
    pub differing: Vec<String>,
    pub left: Invariants,
    pub right: Invariants,
    pub left_template: Option<String>,
    pub right_template: Option<String>,
}

pub fn compare(a: &Classification, b: &Classification) -> Comparison {
    let mut differing = Vec::new();
    if a.invariants.block_sizes != b.invariants.block_sizes {
        differing
            .push(format!("forced-zero block sizes {:?} vs {:?}", a.invariants.block_sizes, b.invariants.block_sizes));
    }
    if a.invariants.commutativity != b.invariants.commutativity {
        differing.push(format!("commutativity {:?} vs {:?}", a.invariants.commutativity, b.invariants.commutativity));
    }
    if a.invariants.aut_order != b.invariants.aut_order {
        differing.push(format!("aut order {} vs {}", a.invariants.aut_order, b.invariants.aut_order));
    }
    Comparison {
        distinguished: !differing.is_empty(),
        differing,
        left: a.invariants.clone(),
        right: b.invariants.clone(),
        left_template: a.template.clone(),
        right_template: b.template.clone(),
    }
}

/// A basis element ξ(λ_m) (component 0) or η(λ_m) (component 1) of the
/// doubling of C*(Z^n).
type DoublingBasis = (usize, GroupElement);

/// Δ̃ξ(λ_m) = ξ_m ⊗ ξ_m + η_m ⊗ η_{θm} and Δ̃η(λ_m) = ξ_m ⊗ η_m + η_m ⊗ ξ_{θm}, θ = −id.
fn doubling_coproduct(x: &DoublingBasis) -> Vec<(DoublingBasis, DoublingBasis)> {
    let (part, m) = x;
    let (xi, eta) = (0usize, 1usize);
    if *part == xi {
        vec![((xi, m.clone()), (xi, m.clone())), ((eta, m.clone()), (eta, m.neg()))]
    } else {
        vec![((xi, m.clone()), (eta, m.clone())), ((eta, m.clone()), (xi, m.neg()))]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoassociativityCase {
    pub generator: String,
    pub terms: usize,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoassociativityVerdict {
    pub rank: usize,
    pub cases: Vec<CoassociativityCase>,
}

impl CoassociativityVerdict {
    pub fn passed(&self) -> bool {
        !self.cases.is_empty() && self.cases.iter().all(|c| c.equal)
    }
}

type Triple = BTreeMap<(DoublingBasis, DoublingBasis, DoublingBasis), i64>;

fn expand_left(x: &DoublingBasis) -> Triple {
    let mut out = Triple::new();
    for (a, b) in doubling_coproduct(x) {
        for (a1, a2) in doubling_coproduct(&a) {
            *out.entry((a1, a2, b.clone())).or_default() += 1;
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

fn expand_right(x: &DoublingBasis) -> Triple {
    let mut out = Triple::new();
    for (a, b) in doubling_coproduct(x) {
        for (b1, b2) in doubling_coproduct(&b) {
            *out.entry((a.clone(), b1, b2)).or_default() += 1;
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

/// Compares (Δ̃⊗id)Δ̃ with (id⊗Δ̃)Δ̃ on ξ(λ_m), η(λ_m) for m ∈ {0, ±e_i}.
pub fn doubling_coassociativity_check(n: usize) -> CoassociativityVerdict {
    let mut ms = vec![GroupElement::zero(n)];
    for i in 0..n {
        ms.push(GroupElement::basis(n, i));
        ms.push(GroupElement::basis(n, i).neg());
    }
    let mut cases = Vec::new();
    for m in &ms {
        for (part, name) in [(0usize, "ξ"), (1usize, "η")] {
            let x = (part, m.clone());
            let (l, r) = (expand_left(&x), expand_right(&x));
            cases.push(CoassociativityCase { generator: format!("{name}(λ_{m})"), terms: l.len(), equal: l == r });
        }
    }
    CoassociativityVerdict { rank: n, cases }
}

/// The reduced matrix with every entry evaluated in the model.
pub fn evaluate_unitary(u: &FundamentalUnitary, m: &ModelAssignment) -> Result<Vec<Vec<BlockAlgebraElem>>, ModelError> {
    u.entries.iter().map(|row| row.iter().map(|p| evaluate(p, m)).collect()).collect()
}
