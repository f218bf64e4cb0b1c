//! End-to-end Groebner computations on small ideals with known answers.

use std::sync::Arc;

use keller_algebra::{
    buchberger, check_invariants, eliminate, express_one, ideal_contains_one, normal_form,
    radical_membership, verify_certificate, Certificate, GbConfig, GbError, MembershipMethod,
    MonomialOrder, MultiPoly, OneExpression, ResourceBudget, VarUniverse,
};
use proptest::prelude::*;

fn uni(names: &[&str]) -> Arc<VarUniverse> {
    VarUniverse::new(names).unwrap()
}

fn polys(u: &Arc<VarUniverse>, texts: &[&str]) -> Vec<MultiPoly> {
    texts.iter().map(|t| MultiPoly::parse(t, u).unwrap()).collect()
}

fn config() -> GbConfig {
    GbConfig {
        budget: ResourceBudget::with_wall_clock(30.0),
        ..GbConfig::default()
    }
}

#[test]
fn twisted_cubic() {
    let u = uni(&["x", "y", "z"]);
    let gens = polys(&u, &["y - x^2", "z - x^3"]);
    let lex = GbConfig {
        order: MonomialOrder::Lex,
        ..config()
    };
    let g = buchberger(&u, &gens, &lex).unwrap();
    check_invariants(&g, &gens).unwrap();
    assert!(g.basis().len() >= 2);
    assert!(normal_form(&MultiPoly::parse("x^2 - y", &u).unwrap(), &g).is_zero());
    assert!(normal_form(&MultiPoly::parse("y^3 - z^2", &u).unwrap(), &g).is_zero());
    assert!(!normal_form(&MultiPoly::parse("y - z", &u).unwrap(), &g).is_zero());
}

#[test]
fn inconsistent_system_has_unit_basis_and_certificate() {
    let u = uni(&["x", "y"]);
    let gens = polys(&u, &["x*y - 1", "x^2", "y + x - 3"]);
    let cfg = GbConfig {
        track_cofactors: true,
        ..config()
    };
    let g = buchberger(&u, &gens, &cfg).unwrap();
    assert!(ideal_contains_one(&g));
    check_invariants(&g, &gens).unwrap();
    let cert = Certificate::from_result(&g, &gens);
    assert!(cert.claims_unit());
    verify_certificate(&cert).unwrap();
    let json = serde_json::to_string(&cert).unwrap();
    let back: Certificate = serde_json::from_str(&json).unwrap();
    verify_certificate(&back).unwrap();

    let OneExpression::Certificate(cof) = express_one(&u, &gens, &config()).unwrap() else {
        panic!("ideal is trivial");
    };
    verify_certificate(&Certificate::for_one(&gens, &cof, &MonomialOrder::Grevlex)).unwrap();
}

#[test]
fn tampered_certificate_is_rejected() {
    let u = uni(&["x", "y"]);
    let gens = polys(&u, &["x*y - 1", "x - y"]);
    let cfg = GbConfig {
        track_cofactors: true,
        ..config()
    };
    let g = buchberger(&u, &gens, &cfg).unwrap();
    let mut cert = Certificate::from_result(&g, &gens);
    verify_certificate(&cert).unwrap();
    cert.basis[0].push_str(" + 1");
    assert!(verify_certificate(&cert).is_err());
}

#[test]
fn gaussian_coefficients() {
    // Picks the root x = -i of x^2 + 1.
    let u = uni(&["x", "y"]);
    let gens = polys(&u, &["x^2 + 1", "y - x", "y + i"]);
    let g = buchberger(&u, &gens, &config()).unwrap();
    check_invariants(&g, &gens).unwrap();
    assert!(!ideal_contains_one(&g));
    assert!(normal_form(&MultiPoly::parse("x + i", &u).unwrap(), &g).is_zero());
}

#[test]
fn radical_membership_of_a_nilpotent_element() {
    let u = uni(&["x", "y"]);
    let gens = polys(&u, &["x^3", "y^2 - x*y"]);
    let x = MultiPoly::parse("x", &u).unwrap();
    let m = radical_membership(&x, &u, &gens, &config()).unwrap();
    assert!(m.member);
    assert!(matches!(m.method, MembershipMethod::Power { power: 3 }));
    let y = MultiPoly::parse("y", &u).unwrap();
    assert!(radical_membership(&y, &u, &gens, &config()).unwrap().member);
    let other = MultiPoly::parse("x + 1", &u).unwrap();
    let m = radical_membership(&other, &u, &gens, &config()).unwrap();
    assert!(!m.member);
    assert!(matches!(m.method, MembershipMethod::Rabinowitsch { .. }));
}

#[test]
fn elimination_recovers_the_implicit_equation() {
    // Parametrised cuspidal cubic (t^2, t^3).
    let u = uni(&["t", "x", "y"]);
    let gens = polys(&u, &["x - t^2", "y - t^3"]);
    let elim = eliminate(&u, &gens, &[1, 2], &config()).unwrap();
    assert_eq!(elim.len(), 1);
    let target = MultiPoly::parse("x^3 - y^2", &u).unwrap();
    let lead = elim[0].leading_term(&MonomialOrder::Grevlex).unwrap().1.clone();
    assert!(elim[0] == target.scale(&lead) || elim[0] == target.scale(&-lead));
}

#[test]
fn budgets_are_reported() {
    let u = uni(&["a", "b", "c", "d"]);
    let gens = polys(&u, &["a + b + c + d", "a*b + b*c + c*d + d*a", "a*b*c + b*c*d + c*d*a + d*a*b", "a*b*c*d - 1"]);
    let tight = GbConfig {
        budget: ResourceBudget {
            wall_clock: None,
            max_pairs: Some(2),
            max_terms: None,
        },
        ..GbConfig::default()
    };
    assert!(matches!(buchberger(&u, &gens, &tight), Err(GbError::Budget(_))));
    let g = buchberger(&u, &gens, &config()).unwrap();
    check_invariants(&g, &gens).unwrap();
}

fn arb_generators() -> impl Strategy<Value = Vec<String>> {
    let term = (-3i64..=3, 0u8..=2, 0u8..=2, 0u8..=1).prop_map(|(c, a, b, d)| format!("({c})*x^{a}*y^{b}*z^{d}"));
    let poly = prop::collection::vec(term, 1..4).prop_map(|ts| ts.join(" + "));
    prop::collection::vec(poly, 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_ideals_satisfy_the_basis_invariants(texts in arb_generators()) {
        let u = uni(&["x", "y", "z"]);
        let gens: Vec<MultiPoly> = texts.iter().map(|t| MultiPoly::parse(t, &u).unwrap()).collect();
        prop_assume!(gens.iter().any(|g| !g.is_zero()));
        let g = buchberger(&u, &gens, &config()).unwrap();
        prop_assert!(check_invariants(&g, &gens).is_ok());
        // The reduced basis does not depend on generator order.
        let mut rev = gens.clone();
        rev.reverse();
        let h = buchberger(&u, &rev, &config()).unwrap();
        prop_assert_eq!(g.basis(), h.basis());
    }
}
