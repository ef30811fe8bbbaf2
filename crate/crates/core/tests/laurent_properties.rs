//! Property tests for the algebra layer: serialization round-trips and
//! ring laws on arbitrary small elements.

use laxtower::context::{AlgebraContext, RMatrixKind};
use laxtower::fourier::FourierField;
use laxtower::laurent::LaurentElement;
use num_complex::Complex64;
use proptest::prelude::*;

fn arb_field() -> impl Strategy<Value = FourierField> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..4).prop_map(|amps| {
        let amps: Vec<Complex64> = amps
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        FourierField::from_modes(amps)
    })
}

fn arb_element() -> impl Strategy<Value = LaurentElement> {
    proptest::collection::btree_map(-3i32..3, arb_field(), 0..4)
        .prop_map(LaurentElement::from_pairs)
}

fn ctx() -> AlgebraContext {
    AlgebraContext::with_caps(RMatrixKind::Benny, 16, -12, 8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_serialization_round_trips(u in arb_element()) {
        let back = LaurentElement::from_text(&u.to_text()).unwrap();
        prop_assert!(u.sub(&back).norm() < 1e-12);
    }

    #[test]
    fn multiplication_is_commutative_and_distributive(
        u in arb_element(),
        v in arb_element(),
        w in arb_element(),
    ) {
        let c = ctx();
        let uv = c.mul(&u, &v).unwrap();
        let vu = c.mul(&v, &u).unwrap();
        prop_assert!(uv.sub(&vu).norm() < 1e-12);
        let lhs = c.mul(&u, &v.add(&w)).unwrap();
        let rhs = c.mul(&u, &v).unwrap().add(&c.mul(&u, &w).unwrap());
        prop_assert!(lhs.sub(&rhs).norm() < 1e-11);
    }

    #[test]
    fn bracket_is_a_biderivation(u in arb_element(), v in arb_element(), w in arb_element()) {
        let c = AlgebraContext::with_caps(RMatrixKind::Benny, 20, -24, 16);
        let lhs = c.lie_bracket(&u, &c.mul(&v, &w).unwrap()).unwrap();
        let rhs = c
            .mul(&c.lie_bracket(&u, &v).unwrap(), &w)
            .unwrap()
            .add(&c.mul(&v, &c.lie_bracket(&u, &w).unwrap()).unwrap());
        prop_assert!(lhs.sub(&rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn trace_kills_brackets_and_pairing_is_symmetric(u in arb_element(), v in arb_element()) {
        let c = AlgebraContext::with_caps(RMatrixKind::Benny, 20, -24, 16);
        let br = c.lie_bracket(&u, &v).unwrap();
        prop_assert!(c.trace(&br).abs() < 1e-10 * (1.0 + br.norm()));
        let ab = c.pairing(&u, &v).unwrap();
        let ba = c.pairing(&v, &u).unwrap();
        prop_assert!((ab - ba).abs() < 1e-11 * (1.0 + ab.abs()));
    }
}
