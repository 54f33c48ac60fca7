mod common;

use common::{oracle_x, oracle_y};
use nledlab::forms::{
    component_count, eb_from_two_form, invariant_x, invariant_y, two_form_from_eb, KForm, Vector4,
};
use proptest::prelude::*;

fn form(degree: usize) -> impl Strategy<Value = KForm> {
    prop::collection::vec(-3.0f64..3.0, component_count(degree))
        .prop_map(move |c| KForm::from_components(degree, &c).unwrap())
}

fn any_form() -> impl Strategy<Value = KForm> {
    (0usize..=4).prop_flat_map(form)
}

fn vector() -> impl Strategy<Value = Vector4> {
    prop::array::uniform4(-3.0f64..3.0).prop_map(Vector4)
}

fn close(a: &KForm, b: &KForm, tol: f64) -> bool {
    a.degree() == b.degree() && (*a - *b).max_abs() <= tol
}

proptest! {
    #[test]
    fn graded_antisymmetry(a in any_form(), b in any_form()) {
        prop_assume!(a.degree() + b.degree() <= 4);
        let sign = if (a.degree() * b.degree()) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(close(&a.wedge(&b), &(b.wedge(&a) * sign), 1e-12));
    }

    #[test]
    fn wedge_is_associative(a in form(1), b in form(1), c in form(2)) {
        prop_assert!(close(&a.wedge(&b).wedge(&c), &a.wedge(&b.wedge(&c)), 1e-12));
    }

    #[test]
    fn double_hodge_sign(a in any_form()) {
        let k = a.degree();
        // s (−1)^{k(n−k)} with s = −1 for Lorentzian signature
        let sign = if (k * (4 - k) + 1) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(close(&a.hodge().hodge(), &(a * sign), 1e-12));
    }

    #[test]
    fn double_hodge_on_two_forms_is_minus_identity(f in form(2)) {
        prop_assert!(close(&f.hodge().hodge(), &(-f), 1e-12));
    }

    #[test]
    fn interior_twice_vanishes(v in vector(), a in (1usize..=4).prop_flat_map(form)) {
        prop_assume!(a.degree() >= 2);
        prop_assert!(a.interior(&v).interior(&v).max_abs() <= 1e-12);
    }

    #[test]
    fn interior_is_an_antiderivation(v in vector(), a in (1usize..=3).prop_flat_map(form), b in (1usize..=3).prop_flat_map(form)) {
        prop_assume!(a.degree() + b.degree() <= 4);
        let sign = if a.degree() % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = a.wedge(&b).interior(&v);
        let rhs = a.interior(&v).wedge(&b) + a.wedge(&b.interior(&v)) * sign;
        prop_assert!(close(&lhs, &rhs, 1e-11));
    }

    #[test]
    fn hodge_matches_inner_product(a in (0usize..=4).prop_flat_map(form), seed in any::<u64>()) {
        // α∧⋆β = g(α, β) vol with g diagonal in the increasing-index basis
        let b = {
            let mut r = common::rng(seed);
            let c: Vec<f64> = (0..a.components().len()).map(|_| rand::Rng::random_range(&mut r, -2.0..2.0)).collect();
            KForm::from_components(a.degree(), &c).unwrap()
        };
        let lhs = a.wedge(&b.hodge())[0];
        let masks: &[&[usize]] = match a.degree() {
            0 => &[&[]],
            1 => &[&[0], &[1], &[2], &[3]],
            2 => &[&[0, 1], &[0, 2], &[0, 3], &[1, 2], &[1, 3], &[2, 3]],
            3 => &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]],
            _ => &[&[0, 1, 2, 3]],
        };
        let rhs: f64 = masks.iter().enumerate().map(|(i, idx)| {
            let g = if idx.contains(&0) { -1.0 } else { 1.0 };
            g * a[i] * b[i]
        }).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn invariants_match_levi_civita_oracle(e in prop::array::uniform3(-3.0f64..3.0), b in prop::array::uniform3(-3.0f64..3.0)) {
        let f = two_form_from_eb(e, b);
        let (x, y) = (invariant_x(&f), invariant_y(&f));
        let (ox, oy) = (oracle_x(&f), oracle_y(&f));
        prop_assert!((x - ox).abs() <= 1e-12 * ox.abs().max(1.0));
        prop_assert!((y - oy).abs() <= 1e-12 * oy.abs().max(1.0));
        let e2: f64 = e.iter().map(|c| c * c).sum();
        let b2: f64 = b.iter().map(|c| c * c).sum();
        let edb: f64 = e.iter().zip(b).map(|(p, q)| p * q).sum();
        prop_assert!((x - (e2 - b2)).abs() <= 1e-12 * (e2 + b2).max(1.0));
        prop_assert!((y - 2.0 * edb).abs() <= 1e-12 * edb.abs().max(1.0));
    }

    #[test]
    fn eb_roundtrip(e in prop::array::uniform3(-1e3f64..1e3), b in prop::array::uniform3(-1e3f64..1e3)) {
        prop_assert_eq!(eb_from_two_form(&two_form_from_eb(e, b)), (e, b));
    }
}

#[test]
fn mandated_invariant_convention_is_exact() {
    // dyadic components: every partial sum is exact, so equality is exact too
    for e in [[1.0, 0.0, 0.0], [0.0, -2.5, 0.0], [0.5, 0.25, -1.5]] {
        let e2: f64 = e.iter().map(|c| c * c).sum();
        assert_eq!(invariant_x(&two_form_from_eb(e, [0.0; 3])), e2);
        assert_eq!(invariant_x(&two_form_from_eb([0.0; 3], e)), -e2);
    }
    assert_eq!(invariant_x(&two_form_from_eb([0.0; 3], [0.0, 0.0, 2.0])), -4.0);
    // otherwise only the summation order differs
    let e = [0.3, 0.4, 1.2];
    assert!((invariant_x(&two_form_from_eb([0.0; 3], e)) + 1.69).abs() <= 1e-15 * 1.69);
}

#[test]
fn hodge_sign_matches_levi_civita_oracle() {
    let f = KForm::basis(&[0, 1]);
    let star = common::hodge_matrix(&common::matrix(&f));
    assert_eq!(f.hodge().component(&[2, 3]), star[2][3]);
    assert_eq!(star[2][3], -1.0);
}
