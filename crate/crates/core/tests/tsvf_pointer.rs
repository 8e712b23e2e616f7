use std::collections::BTreeMap;
use std::f64::consts::PI;

use proptest::prelude::*;
use weaktrace::interferometer::{enumerate_paths_to, parse_layout, path_amplitude, NestedMzi};
use weaktrace::pointer::{evolve_exact, evolve_with, mirror_momentum_kick, post_select_stats, PointerError};
use weaktrace::tsvf::{completeness_check, cumulative_weak_value, two_state_vector, weak_values, TsvfError};
use weaktrace::{Complex, Mirror};

fn setting() -> impl Strategy<Value = NestedMzi> {
    (0.0..2.0 * PI, 0.1..0.95f64, 0.1..0.95f64, 0.0..2.0 * PI).prop_map(
        |(inner_phase, outer_split, inner_split, outer_phase)| NestedMzi {
            inner_phase,
            outer_split,
            inner_split,
            outer_phase,
            all_ports: false,
        },
    )
}

// Conditional mean of pointer `m` by direct summation over x.
fn riemann_mean(g: &weaktrace::InterferometerGraph, m: Mirror, coupling: f64, sigma: f64) -> f64 {
    let paths: Vec<_> = enumerate_paths_to(g, "D")
        .iter()
        .map(|p| {
            (
                path_amplitude(g, p).unwrap(),
                if p.mirrors(g).contains(&m) { coupling } else { 0.0 },
            )
        })
        .collect();
    let (n, span) = (20_000, 12.0 * sigma);
    let dx = 2.0 * span / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..=n {
        let x = -span + j as f64 * dx;
        let psi: Complex = paths
            .iter()
            .map(|(a, s)| a * (-(x - s) * (x - s) / (2.0 * sigma * sigma)).exp())
            .sum();
        num += x * psi.norm_sqr();
        den += psi.norm_sqr();
    }
    num / den
}

#[test]
fn misaligned_weak_values_all_nonzero() {
    let g = NestedMzi {
        inner_phase: PI / 2.0,
        ..NestedMzi::default()
    }
    .build();
    let wv = weak_values(&g, "D").unwrap();
    for m in Mirror::ALL {
        assert!(wv.per_mirror[&m].norm() > 0.1, "{m}: {}", wv.per_mirror[&m]);
    }
    assert!((wv.per_mirror[&Mirror::A] - Complex::new(0.4, -0.2)).norm() < 1e-12);
    assert!((wv.per_mirror[&Mirror::E] - Complex::new(0.6, 0.2)).norm() < 1e-12);
}

#[test]
fn unreachable_detector_is_zero_overlap() {
    // A fully transmitting splitter never reaches its cross port.
    let g = parse_layout(
        "source S\nsplitter BS t=1\nmirror M symbol=A\ndetector D\ndetector X\n\
         S -> BS:0\nBS:1 -> M\nM -> D\nBS:0 -> X\n",
    )
    .unwrap();
    assert!(matches!(weak_values(&g, "D"), Err(TsvfError::ZeroOverlap { .. })));
    assert!(matches!(weak_values(&g, "nope"), Err(TsvfError::UnknownDetector(_))));
}

#[test]
fn overlapping_cut_is_rejected() {
    let g = NestedMzi::default().build();
    let tsv = two_state_vector(&g, "D").unwrap();
    assert!(matches!(
        completeness_check(&tsv, &[Mirror::A, Mirror::E, Mirror::C]),
        Err(TsvfError::IncompleteCut(..))
    ));
    assert!(completeness_check(&tsv, &[Mirror::A, Mirror::C]).is_err());
    let ecut = completeness_check(&tsv, &[Mirror::E, Mirror::C]).unwrap();
    assert!((ecut - Complex::new(1.0, 0.0)).norm() < 1e-15);
    let eaf = cumulative_weak_value(&tsv, &[Mirror::E, Mirror::A, Mirror::F]).unwrap();
    assert!((eaf - Complex::new(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn pointer_mean_matches_direct_summation() {
    let g = NestedMzi {
        inner_phase: 2.0,
        ..NestedMzi::default()
    }
    .build();
    let (coupling, sigma) = (0.2, 1.3);
    for m in Mirror::ALL {
        let mut couplings = BTreeMap::new();
        couplings.insert(m, coupling);
        let sigmas = Mirror::ALL.into_iter().map(|n| (n, sigma)).collect();
        let single = post_select_stats(&evolve_with(&g, &couplings, &sigmas).unwrap(), "D").unwrap();
        let want = riemann_mean(&g, m, coupling, sigma);
        assert!(
            (single.mean_shift[&m] - want).abs() < 1e-10,
            "{m}: {} vs {want}",
            single.mean_shift[&m]
        );
        for other in Mirror::ALL.into_iter().filter(|&o| o != m) {
            assert_eq!(single.mean_shift[&other], 0.0);
        }
    }
}

#[test]
fn parameter_errors() {
    let g = NestedMzi::default().build();
    assert!(matches!(
        evolve_exact(&g, 0.1, 0.0),
        Err(PointerError::InvalidParameter(_))
    ));
    assert!(matches!(
        mirror_momentum_kick(-1.0, 1.0, 0.0),
        Err(PointerError::NegativePhotonNumber(_))
    ));
    assert_eq!(mirror_momentum_kick(3.0, 2.0, 0.0).unwrap(), 12.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn first_order_pointer_law(s in setting()) {
        let g = s.build();
        let wv = weak_values(&g, "D").unwrap();
        let (coupling, sigma) = (1e-4, 1.0);
        let stats = post_select_stats(&evolve_exact(&g, coupling, sigma).unwrap(), "D").unwrap();
        for m in Mirror::ALL {
            let w = wv.per_mirror[&m];
            let residual = (stats.mean_shift[&m] - coupling * w.re).abs();
            // Next correction is of order g^3 |w|^3 / sigma^2.
            prop_assert!(residual <= 1e-10 * (1.0 + w.norm()).powi(3), "{}: residual {}", m, residual);
        }
    }

    #[test]
    fn random_cut_sums_to_one(s in setting(), use_e in any::<bool>(), use_f in any::<bool>()) {
        let tsv = two_state_vector(&s.build(), "D").unwrap();
        let cut: Vec<Mirror> = match (use_e, use_f) {
            (true, _) => vec![Mirror::E, Mirror::C],
            (false, true) => vec![Mirror::F, Mirror::C],
            (false, false) => vec![Mirror::A, Mirror::B, Mirror::C],
        };
        let sum = completeness_check(&tsv, &cut).unwrap();
        prop_assert!((sum - Complex::new(1.0, 0.0)).norm() < 1e-12);
    }
}
