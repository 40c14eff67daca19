#![allow(dead_code)]

use std::collections::BTreeMap;

use num_rational::Rational64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use qiso_core::cli::ProblemSpec;
use qiso_core::grpalg::{coefficient, convolve, word_action, ActionElement, GenSet, GroupElement, GroupWord};
use qiso_core::models::{
    doubling_assignment, evaluate, metric_aut_group, BlockAlgebraElem, IntMatrix, LaurentElem, ModelAssignment,
};
use qiso_core::ncalg::{NcPolynomial, NcWord, RewriteSystem, SymbolId};
use qiso_core::spectral::{build_dirac, commutation_check, PointIsometry};

pub const CASES: u32 = 256;

pub fn z(v: i64) -> GroupElement {
    GroupElement::scalar(v)
}

pub fn v2(a: i64, b: i64) -> GroupElement {
    GroupElement::new(&[a, b])
}

pub fn plane(positives: &[(i64, i64)]) -> GenSet {
    let gens = positives.iter().flat_map(|&(a, b)| [v2(a, b), v2(-a, -b)]).collect();
    GenSet::new(2, gens).unwrap()
}

pub fn s_prime() -> GenSet {
    plane(&[(1, 0), (0, 1)])
}

pub fn s_double_prime() -> GenSet {
    plane(&[(1, 0), (0, 1), (2, 0)])
}

pub const Z_SETS: [&[i64]; 5] = [&[1], &[1, 2], &[2, 3], &[1, 2, 3], &[2, 3, 7]];

pub fn z_sets() -> Vec<GenSet> {
    Z_SETS.iter().map(|a| GenSet::integers(a).unwrap()).collect()
}

pub fn sym(r: i64, c: i64) -> SymbolId {
    SymbolId::new(z(r), z(c))
}

pub fn word(syms: &[SymbolId]) -> NcPolynomial {
    NcPolynomial::word(NcWord::new(syms.to_vec()))
}

pub fn arb_symbol() -> impl Strategy<Value = SymbolId> {
    let vals = prop::sample::select(vec![1i64, -1, 2, -2]);
    (vals.clone(), vals).prop_map(|(r, c)| sym(r, c))
}

pub fn arb_word(max: usize) -> impl Strategy<Value = NcWord> {
    prop::collection::vec(arb_symbol(), 0..=max).prop_map(NcWord::new)
}

pub fn arb_coeff() -> impl Strategy<Value = Rational64> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| Rational64::new(n, d))
}

pub fn arb_poly() -> impl Strategy<Value = NcPolynomial> {
    prop::collection::vec((arb_coeff(), arb_word(3)), 0..=4).prop_map(NcPolynomial::from_terms)
}

pub fn arb_action() -> impl Strategy<Value = ActionElement> {
    prop::collection::btree_map(-3i64..=3, arb_poly(), 0..=3)
        .prop_map(|m| ActionElement::from_map(1, m.into_iter().map(|(g, p)| (z(g), p)).collect()))
}

pub fn run(name: &str, f: impl Fn(&mut TestRunner) -> Result<(), String>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() });
    f(&mut runner).map_err(|e| format!("{name}: {e}"))
}

fn check<S: Strategy>(
    runner: &mut TestRunner,
    s: S,
    f: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner.run(&s, f).map_err(|e| e.to_string())
}

pub fn ring_associativity(p: NcPolynomial, q: NcPolynomial, r: NcPolynomial) -> Result<(), TestCaseError> {
    prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
    prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
    Ok(())
}

pub fn ring_distributivity(p: NcPolynomial, q: NcPolynomial, r: NcPolynomial) -> Result<(), TestCaseError> {
    prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
    prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
    Ok(())
}

pub fn ring_identities(p: NcPolynomial, q: NcPolynomial) -> Result<(), TestCaseError> {
    prop_assert_eq!(&p + &q, &q + &p);
    prop_assert!((&p + &(-&p)).is_zero());
    prop_assert_eq!(&p * &NcPolynomial::one(), p.clone());
    prop_assert_eq!(&NcPolynomial::one() * &p, p.clone());
    prop_assert!((&p * &NcPolynomial::zero()).is_zero());
    Ok(())
}

pub fn involution_axioms(p: NcPolynomial, q: NcPolynomial, c: Rational64) -> Result<(), TestCaseError> {
    prop_assert_eq!(p.adjoint().adjoint(), p.clone());
    prop_assert_eq!((&p * &q).adjoint(), &q.adjoint() * &p.adjoint());
    prop_assert_eq!((&p + &q).adjoint(), &p.adjoint() + &q.adjoint());
    prop_assert_eq!(p.scale(c).adjoint(), p.adjoint().scale(c));
    Ok(())
}

pub fn antipode_axioms(p: NcPolynomial, q: NcPolynomial) -> Result<(), TestCaseError> {
    prop_assert_eq!((&p * &q).antipode(), &q.antipode() * &p.antipode());
    prop_assert_eq!((&p + &q).antipode(), &p.antipode() + &q.antipode());
    prop_assert_eq!(p.antipode().antipode(), p.clone());
    prop_assert_eq!(p.adjoint().antipode(), p.antipode().adjoint());
    prop_assert_eq!((&p * &q).transpose(), &p.transpose() * &q.transpose());
    prop_assert_eq!(p.transpose(), p.antipode().adjoint());
    Ok(())
}

/// Relations are words or binomials so the system stays small.
pub fn arb_relation() -> impl Strategy<Value = NcPolynomial> {
    (arb_word(3), arb_word(2), arb_coeff()).prop_map(|(a, b, c)| {
        if a.is_empty() {
            NcPolynomial::word(b)
        } else {
            &NcPolynomial::word(a) - &NcPolynomial::term(c, b)
        }
    })
}

pub fn normal_form_idempotent(rels: Vec<NcPolynomial>, p: NcPolynomial) -> Result<(), TestCaseError> {
    let mut sys = RewriteSystem::new();
    for r in &rels {
        if sys.add_relation(r).is_err() {
            return Ok(());
        }
    }
    let n = sys.normal_form(&p);
    prop_assert_eq!(sys.normal_form(&n), n.clone());
    for t in n.terms() {
        prop_assert!(!sys.is_reducible(&t.word));
    }
    for r in &rels {
        prop_assert!(sys.normal_form(r).is_zero(), "relation {} not in the ideal", r);
    }
    Ok(())
}

/// Σ_{h,k} x_h y_k λ_{h+k} computed directly.
pub fn double_sum(x: &ActionElement, y: &ActionElement) -> BTreeMap<GroupElement, NcPolynomial> {
    let mut out: BTreeMap<GroupElement, NcPolynomial> = BTreeMap::new();
    for (h, p) in x.support() {
        for (k, q) in y.support() {
            let g = GroupElement::new(&[h.coords()[0] + k.coords()[0]]);
            let prev = out.remove(&g).unwrap_or_else(NcPolynomial::zero);
            out.insert(g, &prev + &(p * q));
        }
    }
    out.retain(|_, p| !p.is_zero());
    out
}

pub fn convolution_oracle(x: ActionElement, y: ActionElement, w: ActionElement) -> Result<(), TestCaseError> {
    let xy = convolve(&x, &y).unwrap();
    prop_assert_eq!(xy.support(), &double_sum(&x, &y));
    let left = convolve(&xy, &w).unwrap();
    let right = convolve(&x, &convolve(&y, &w).unwrap()).unwrap();
    prop_assert_eq!(left, right);
    Ok(())
}

fn assignment_for(idx: usize) -> (GenSet, ModelAssignment) {
    let s = match idx {
        0 => GenSet::integers(&[1, 2]).unwrap(),
        1 => GenSet::integers(&[2, 3]).unwrap(),
        _ => s_prime(),
    };
    let m = if idx == 2 {
        ModelAssignment::classical(&s, &metric_aut_group(&s), "full")
    } else {
        doubling_assignment(&s).unwrap()
    };
    (s, m)
}

pub fn evaluation_is_star_homomorphism(p: NcPolynomial, q: NcPolynomial) -> Result<(), TestCaseError> {
    let (_, m) = assignment_for(0);
    let ep = evaluate(&p, &m).unwrap();
    let eq = evaluate(&q, &m).unwrap();
    prop_assert_eq!(evaluate(&(&p * &q), &m).unwrap(), ep.mul(&eq));
    prop_assert_eq!(evaluate(&(&p + &q), &m).unwrap(), ep.add(&eq));
    prop_assert_eq!(evaluate(&p.adjoint(), &m).unwrap(), ep.adjoint());
    Ok(())
}

/// The coefficient of λ_h in α(λ_{w}) evaluates to Σ_{M: M(Σw) = h} t^h e_M.
pub fn model_respects_coaction(idx: usize, letters: Vec<usize>, target: usize) -> Result<(), TestCaseError> {
    let (s, m) = assignment_for(idx);
    let group = metric_aut_group(&s);
    // Doubling components are ordered "+" then "-".
    let elements =
        if idx == 2 { group.elements.clone() } else { vec![IntMatrix::identity(1), IntMatrix::identity(1).neg()] };
    let w = GroupWord::new(s.rank(), letters.iter().map(|&i| s.gens()[i % s.len()].clone()).collect());
    let action = word_action(&w, &s).unwrap();
    let sum = w.sum().clone();
    let images: Vec<GroupElement> = elements.iter().map(|g| g.apply(&sum)).collect();
    let h = images[target % images.len()].clone();
    let got = evaluate(&coefficient(&action, &h).unwrap(), &m).unwrap();
    let expected = BlockAlgebraElem::from_components(
        elements.iter().enumerate().filter(|(_, g)| g.apply(&sum) == h).map(|(k, _)| (k, LaurentElem::t(h.clone()))),
    );
    prop_assert_eq!(got, expected);
    Ok(())
}

pub fn non_isometries_fail(a: i64, b: i64, c: i64, flip: bool) -> Result<(), TestCaseError> {
    // Unimodular matrices [[1,a],[0,1]]·[[1,0],[b,1]], optionally sign flipped.
    let mut m = IntMatrix(vec![vec![1 + a * b, a], vec![b, 1]]);
    if flip {
        m = m.neg();
    }
    if c != 0 {
        m = m.mul(&IntMatrix(vec![vec![0, 1], vec![1, 0]]));
    }
    prop_assert_eq!(m.det().abs(), 1);
    for s in [s_prime(), s_double_prime()] {
        let group = metric_aut_group(&s);
        let radius = (s.max_norm() + 1) as usize;
        let t = build_dirac(&s, radius).unwrap();
        let v = commutation_check(&PointIsometry::new(m.clone()), &t).unwrap();
        prop_assert_eq!(v.commutes(), group.contains(&m), "matrix {}", m);
    }
    Ok(())
}

pub fn arb_spec() -> impl Strategy<Value = ProblemSpec> {
    (
        1usize..=3,
        prop::collection::vec(prop::collection::vec(-9i64..=9, 3), 0..6),
        prop::option::of(1usize..8),
        prop::option::of(1usize..100),
        prop::collection::vec(prop::sample::select(vec!["sandwich", "homomorphism", "normality-tactic"]), 0..3),
        any::<bool>(),
    )
        .prop_map(|(rank, vs, l, r, rules, sym)| {
            let mut spec = ProblemSpec::new(rank, vs.into_iter().map(|v| v[..rank].to_vec()).collect());
            spec.options.max_word_len = l;
            spec.options.max_rounds = r;
            spec.options.disabled_rules = rules.into_iter().map(String::from).collect();
            spec.options.symmetrize = sym;
            spec
        })
}

pub fn spec_round_trip(spec: ProblemSpec) -> Result<(), TestCaseError> {
    let back: ProblemSpec = serde_json::from_str(&spec.render()).unwrap();
    prop_assert_eq!(back, spec);
    Ok(())
}

/// Every property suite, each over `CASES` random cases.
pub fn all_properties() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        (
            "ring associativity",
            run("assoc", |r| check(r, (arb_poly(), arb_poly(), arb_poly()), |(p, q, s)| ring_associativity(p, q, s))),
        ),
        (
            "ring distributivity",
            run("distrib", |r| {
                check(r, (arb_poly(), arb_poly(), arb_poly()), |(p, q, s)| ring_distributivity(p, q, s))
            }),
        ),
        ("ring identities", run("identities", |r| check(r, (arb_poly(), arb_poly()), |(p, q)| ring_identities(p, q)))),
        (
            "involution axioms",
            run("involution", |r| {
                check(r, (arb_poly(), arb_poly(), arb_coeff()), |(p, q, c)| involution_axioms(p, q, c))
            }),
        ),
        ("antipode axioms", run("antipode", |r| check(r, (arb_poly(), arb_poly()), |(p, q)| antipode_axioms(p, q)))),
        (
            "normal form idempotence",
            run("nf", |r| {
                check(r, (prop::collection::vec(arb_relation(), 1..4), arb_poly()), |(rels, p)| {
                    normal_form_idempotent(rels, p)
                })
            }),
        ),
        (
            "convolution vs double sum",
            run("convolution", |r| {
                check(r, (arb_action(), arb_action(), arb_action()), |(x, y, w)| convolution_oracle(x, y, w))
            }),
        ),
    ]
}
