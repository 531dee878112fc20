use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use quatgenus_core::arith::{Rational, SquareClass};
use quatgenus_core::forms::{
    evaluate, invariants, is_isotropic, is_isotropic_local, isotropy, witt_decompose, DiagonalForm,
    Isotropy,
};
use quatgenus_core::local::{hilbert_symbol, is_local_square, relevant_places, Place};
use quatgenus_core::oracle;
use quatgenus_core::quaternion::{
    common_subfield_witness, connecting_algebra, distinguishing_witness, is_isomorphic, is_linked,
    QuaternionAlgebra,
};
use quatgenus_core::tower::{
    replay, step_pushing_extension, CertificateSource, Status, TowerState,
};

const SET: [i64; 16] = [1, -1, 2, -2, 3, -3, 5, -5, 6, -6, 7, -7, 10, -10, 15, -15];

fn coeff() -> impl Strategy<Value = i64> {
    prop::sample::select(SET.to_vec())
}

fn form(max_dim: usize) -> impl Strategy<Value = DiagonalForm> {
    prop::collection::vec(coeff(), 1..=max_dim)
        .prop_map(|c| DiagonalForm::from_integers(&c).unwrap())
}

fn algebra() -> impl Strategy<Value = QuaternionAlgebra> {
    (coeff(), coeff()).prop_map(|(a, b)| QuaternionAlgebra::from_integers(a, b).unwrap())
}

fn division_algebra() -> impl Strategy<Value = QuaternionAlgebra> {
    algebra().prop_filter("division", |d| d.is_division())
}

fn oracle_place(v: &Place) -> oracle::OraclePlace {
    v.prime().map(|p| u64::try_from(p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn product_formula(an in -1000i64..=1000, ad in 1i64..=1000, bn in -1000i64..=1000, bd in 1i64..=1000) {
        prop_assume!(an != 0 && bn != 0);
        let a = Rational::new(an.into(), ad.into()).unwrap();
        let b = Rational::new(bn.into(), bd.into()).unwrap();
        let mut places: Vec<Place> = Vec::new();
        for n in [an, ad, bn, bd] {
            let f = DiagonalForm::from_integers(&[n]).unwrap();
            places.extend(relevant_places(&f));
        }
        places.sort();
        places.dedup();
        let product: i8 = places.iter().map(|v| hilbert_symbol(&a, &b, v).unwrap()).product();
        prop_assert_eq!(product, 1);
    }

    #[test]
    fn local_isotropy_matches_oracle(q in form(4)) {
        let coeffs = q.to_i64_vec().unwrap();
        for v in relevant_places(&q).iter().chain([Place::finite(3).unwrap(), Place::finite(5).unwrap()].iter()) {
            prop_assert_eq!(is_isotropic_local(&q, v), oracle::local_isotropic(&coeffs, oracle_place(v)), "{} at {}", q, v);
        }
    }

    #[test]
    fn anisotropic_verdicts_name_a_failing_place(q in form(4)) {
        if let Isotropy::Anisotropic { failing_place } = isotropy(&q) {
            prop_assert!(!oracle::local_isotropic(&q.to_i64_vec().unwrap(), oracle_place(&failing_place)));
        }
    }

    #[test]
    fn witt_decomposition_is_sound(q in form(7)) {
        let w = witt_decompose(&q).unwrap();
        prop_assert_eq!(2 * w.witt_index + w.anisotropic_part.dim(), q.dim());
        if let Some(part) = w.anisotropic_part.as_form() {
            prop_assert!(!is_isotropic(part));
            prop_assert!(invariants(&part.with_hyperbolic_planes(w.witt_index)).same_class(&invariants(&q)));
        }
        for x in &w.explicit_witnesses {
            prop_assert!(evaluate(&q, x).is_zero());
            prop_assert!(x.iter().any(|c| *c != BigInt::zero()));
        }
    }

    #[test]
    fn ramification_parity_and_division(d in algebra()) {
        let r = d.ramification();
        prop_assert_eq!(r.len() % 2, 0);
        prop_assert_eq!(d.is_division(), !r.is_empty());
    }

    #[test]
    fn subfield_membership_two_ways(d in algebra(), c in coeff()) {
        let c = SquareClass::from_i64(c);
        // √c embeds iff c is a nonsquare at every ramified place.
        let local = !c.is_one() && d.ramification().places.iter().all(|v| !is_local_square(&c, v));
        prop_assume!(d.is_division());
        prop_assert_eq!(d.contains_subfield(&c), local);
    }

    #[test]
    fn rationals_are_linked(d1 in division_algebra(), d2 in division_algebra()) {
        prop_assert!(is_linked(&d1, &d2).unwrap());
        let c = common_subfield_witness(&d1, &d2, 50).unwrap().unwrap();
        prop_assert!(d1.contains_subfield(&c) && d2.contains_subfield(&c));
    }

    #[test]
    fn distinct_algebras_are_distinguished(d1 in division_algebra(), d2 in division_algebra()) {
        prop_assume!(!is_isomorphic(&d1, &d2));
        let c = distinguishing_witness(&d1, &d2, 100).unwrap().unwrap();
        prop_assert_ne!(d1.contains_subfield(&c), d2.contains_subfield(&c));
        let e = connecting_algebra(&d1, &d2).unwrap();
        prop_assert_eq!(e.ramification(), d1.ramification().symmetric_difference(&d2.ramification()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn pushing_steps_are_certified_and_monotone(
        family in prop::collection::vec(division_algebra(), 1..=3),
        classes in prop::collection::vec(coeff(), 0..=3),
    ) {
        let mut distinct: Vec<QuaternionAlgebra> = Vec::new();
        for d in family {
            if !distinct.iter().any(|e| is_isomorphic(e, &d)) {
                distinct.push(d);
            }
        }
        let mut s: Vec<SquareClass> = classes.into_iter().map(SquareClass::from_i64).filter(|c| !c.is_one()).collect();
        s.sort();
        s.dedup();
        let (st, rep) = step_pushing_extension(&TowerState::rationals(), &distinct, &s).unwrap();
        prop_assert!(rep.is_complete());
        for c in rep.certificates() {
            prop_assert!(replay(c, &st));
        }
        prop_assert!(st.replay_adjunctions());
        for e in &rep.embeddings {
            let h = st.status_history(&e.statement.subject);
            let first_iso = h.iter().position(|s| *s == Status::Isotropic);
            if let Some(i) = first_iso {
                prop_assert!(h[i..].iter().all(|s| *s == Status::Isotropic));
            }
        }
        for s in &rep.injectivity {
            prop_assert_eq!(s.statement.status, Status::Anisotropic);
        }
    }
}
