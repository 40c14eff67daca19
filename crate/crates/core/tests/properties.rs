mod support;

use proptest::prelude::*;
use support::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, ..ProptestConfig::default() })]

    #[test]
    fn polynomial_multiplication_is_associative(p in arb_poly(), q in arb_poly(), r in arb_poly()) {
        ring_associativity(p, q, r)?;
    }

    #[test]
    fn polynomial_multiplication_distributes(p in arb_poly(), q in arb_poly(), r in arb_poly()) {
        ring_distributivity(p, q, r)?;
    }

    #[test]
    fn polynomial_ring_identities(p in arb_poly(), q in arb_poly()) {
        ring_identities(p, q)?;
    }

    #[test]
    fn adjoint_is_an_involution(p in arb_poly(), q in arb_poly(), c in arb_coeff()) {
        involution_axioms(p, q, c)?;
    }

    #[test]
    fn antipode_is_an_anti_homomorphism(p in arb_poly(), q in arb_poly()) {
        antipode_axioms(p, q)?;
    }

    #[test]
    fn normal_form_is_idempotent(rels in prop::collection::vec(arb_relation(), 1..4), p in arb_poly()) {
        normal_form_idempotent(rels, p)?;
    }

    #[test]
    fn convolution_matches_double_sum(x in arb_action(), y in arb_action(), w in arb_action()) {
        convolution_oracle(x, y, w)?;
    }

    #[test]
    fn evaluation_is_a_star_homomorphism(p in arb_poly(), q in arb_poly()) {
        evaluation_is_star_homomorphism(p, q)?;
    }

    #[test]
    fn models_respect_the_coaction(idx in 0usize..3, letters in prop::collection::vec(0usize..6, 0..4), target in 0usize..8) {
        model_respects_coaction(idx, letters, target)?;
    }

    #[test]
    fn only_metric_automorphisms_commute(a in -2i64..=2, b in -2i64..=2, c in 0i64..2, flip in any::<bool>()) {
        non_isometries_fail(a, b, c, flip)?;
    }

    #[test]
    fn spec_documents_round_trip(spec in arb_spec()) {
        spec_round_trip(spec)?;
    }
}
