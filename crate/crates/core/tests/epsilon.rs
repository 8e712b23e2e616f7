use std::collections::BTreeMap;

use proptest::prelude::*;
use weaktrace::epsilon::{detector_expansion, expand_path, sum_paths, AmplitudeMode, EpsilonError};
use weaktrace::interferometer::{enumerate_paths_to, parse_layout, path_amplitude, NestedMzi, NESTED_MZI_LAYOUT};
use weaktrace::{Complex, EpsilonMonomial, EpsilonPolynomial, Mirror};

const ORDER: u32 = 3;

fn complex() -> impl Strategy<Value = Complex> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex::new(re, im))
}

fn poly() -> impl Strategy<Value = EpsilonPolynomial> {
    let mono = prop::collection::vec(0usize..5, 0..4)
        .prop_map(|ix| EpsilonMonomial::from_symbols(&ix.iter().map(|&i| Mirror::ALL[i]).collect::<Vec<_>>()));
    prop::collection::vec((mono, complex()), 0..6).prop_map(|terms| EpsilonPolynomial::from_terms(terms, ORDER))
}

fn assignment() -> impl Strategy<Value = BTreeMap<Mirror, Complex>> {
    prop::collection::vec((-0.3..0.3f64, -0.3..0.3f64), 5).prop_map(|v| {
        Mirror::ALL
            .into_iter()
            .zip(v)
            .map(|(m, (re, im))| (m, Complex::new(re, im)))
            .collect()
    })
}

fn close(a: &EpsilonPolynomial, b: &EpsilonPolynomial) -> bool {
    (a - b).terms().all(|(_, c)| c.norm() < 1e-12)
}

#[test]
fn display_round_trips_through_monomials() {
    let g = parse_layout(NESTED_MZI_LAYOUT).unwrap();
    let p = detector_expansion(&g, "D", ORDER, AmplitudeMode::Unit).unwrap();
    for (m, _) in p.terms() {
        assert_eq!(m.to_string().parse::<EpsilonMonomial>().unwrap(), *m);
    }
    assert_eq!(p.constant_term(), Complex::new(3.0, 0.0));
    assert_eq!(p.coefficient(&"E*F".parse().unwrap()), Complex::new(2.0, 0.0));
}

#[test]
fn order_zero_keeps_constant_only() {
    let g = NestedMzi::default().build();
    let p = detector_expansion(&g, "D", 0, AmplitudeMode::Physical).unwrap();
    assert_eq!(p.max_degree(), Some(0));
    let p1 = detector_expansion(&g, "D", 1, AmplitudeMode::Physical).unwrap();
    for m in [Mirror::E, Mirror::F] {
        assert!(p1.coefficient(&EpsilonMonomial::var(m)) == Complex::new(0.0, 0.0));
    }
    assert!(matches!(p1.extract_order(2), Err(EpsilonError::OrderOutOfRange { .. })));
}

#[test]
fn serde_round_trip() {
    let g = NestedMzi {
        inner_phase: 0.7,
        ..NestedMzi::default()
    }
    .build();
    let p = detector_expansion(&g, "D", ORDER, AmplitudeMode::Physical).unwrap();
    let back: EpsilonPolynomial = serde_json::from_str(&p.to_json()).unwrap();
    assert_eq!(back, p);
}

#[test]
fn missing_assignment_is_reported() {
    let p = EpsilonPolynomial::var(Mirror::B, 2);
    assert_eq!(
        p.evaluate(&BTreeMap::new()),
        Err(EpsilonError::MissingAssignment(Mirror::B))
    );
}

#[test]
fn expansion_is_sum_of_path_expansions() {
    let g = NestedMzi {
        inner_phase: 1.1,
        ..NestedMzi::default()
    }
    .build();
    let polys: Vec<_> = enumerate_paths_to(&g, "D")
        .iter()
        .map(|p| expand_path(path_amplitude(&g, p).unwrap(), &p.mirrors(&g), ORDER))
        .collect();
    let summed = sum_paths(&polys).unwrap();
    let direct = detector_expansion(&g, "D", ORDER, AmplitudeMode::Physical).unwrap();
    assert!(close(&summed, &direct));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert!(close(&(&a + &b), &(&b + &a)));
        prop_assert!(close(&(&a * &b), &(&b * &a)));
        prop_assert!(close(&(&(&a * &b) * &c), &(&a * &(&b * &c))));
        prop_assert!(close(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c))));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn truncation_commutes_with_product(a in poly(), b in poly(), k in 0u32..=ORDER) {
        let lhs = (&a * &b).truncate(k);
        let rhs = &a.truncate(k) * &b.truncate(k);
        prop_assert!(close(&lhs, &rhs));
    }

    #[test]
    fn evaluate_matches_product_up_to_truncation(
        amp in complex(),
        idx in prop::collection::vec(0usize..5, 0..5),
        eps in assignment(),
    ) {
        let mirrors: Vec<Mirror> = idx.iter().map(|&i| Mirror::ALL[i]).collect();
        // Truncating at the path length keeps every term.
        let exact: Complex = mirrors.iter().fold(amp, |acc, m| acc * (Complex::new(1.0, 0.0) - eps[m]));
        let got = expand_path(amp, &mirrors, mirrors.len() as u32).evaluate(&eps).unwrap();
        prop_assert!((got - exact).norm() <= 1e-12 * (1.0 + exact.norm()), "{} vs {}", got, exact);
    }
}
