use std::collections::BTreeSet;
use std::f64::consts::PI;

use proptest::prelude::*;
use weaktrace::interferometer::{enumerate_paths, enumerate_paths_to, parse_layout, path_amplitude, NestedMzi};
use weaktrace::{Complex, InterferometerGraph, PathDescriptor};

fn detector_amplitude(g: &InterferometerGraph, det: &str) -> Complex {
    enumerate_paths_to(g, det)
        .iter()
        .map(|p| path_amplitude(g, p).unwrap())
        .sum()
}

// Plain recursive walk, independent of the library's enumeration.
fn brute_force(g: &InterferometerGraph) -> BTreeSet<Vec<String>> {
    fn walk(g: &InterferometerGraph, at: &str, trail: &mut Vec<String>, out: &mut BTreeSet<Vec<String>>) {
        trail.push(at.to_string());
        let next = g.successors(at);
        if next.is_empty() {
            if g.detectors().any(|d| d.label == at) {
                out.insert(trail.clone());
            }
        }
        for n in next {
            walk(g, n, trail, out);
        }
        trail.pop();
    }
    let mut out = BTreeSet::new();
    walk(g, &g.source().label.clone(), &mut Vec::new(), &mut out);
    out
}

fn setting() -> impl Strategy<Value = NestedMzi> {
    (
        0.0..2.0 * PI,
        0.05..0.99f64,
        0.05..0.99f64,
        0.0..2.0 * PI,
        any::<bool>(),
    )
        .prop_map(
            |(inner_phase, outer_split, inner_split, outer_phase, all_ports)| NestedMzi {
                inner_phase,
                outer_split,
                inner_split,
                outer_phase,
                all_ports,
            },
        )
}

#[test]
fn canonical_layout_matches_builder() {
    let parsed = parse_layout(weaktrace::interferometer::NESTED_MZI_LAYOUT).unwrap();
    let built = NestedMzi::default().build();
    assert_eq!(enumerate_paths(&parsed), enumerate_paths(&built));
    let d1 = detector_amplitude(&parsed, "D");
    let d2 = detector_amplitude(&built, "D");
    assert!((d1 - d2).norm() < 1e-15);
    assert!((d1 - Complex::new(0.0, -1.0 / 3.0)).norm() < 1e-15, "{d1}");
}

#[test]
fn dark_inner_port_cancels_exactly() {
    let g = NestedMzi::default().build();
    let amps: Vec<Complex> = enumerate_paths_to(&g, "D")
        .iter()
        .filter(|p| p.contains("E"))
        .map(|p| path_amplitude(&g, p).unwrap())
        .collect();
    assert_eq!(amps.len(), 2);
    assert_eq!(amps[0], -amps[1]);
}

#[test]
fn json_round_trip() {
    let g = NestedMzi {
        all_ports: true,
        ..NestedMzi::default()
    }
    .build();
    let back = InterferometerGraph::from_json(&g.to_json()).unwrap();
    assert_eq!(enumerate_paths(&g), enumerate_paths(&back));
    assert_eq!(detector_amplitude(&g, "D"), detector_amplitude(&back, "D"));
}

#[test]
fn syntax_errors_report_line() {
    let err = parse_layout("source S\nsplitter BS1 t=\ndetector D\n").unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
    assert!(parse_layout("source S\nmirror M symbol=Q\ndetector D\nS -> M\nM -> D\n").is_err());
    assert!(parse_layout("source S\ndetector D\nS -> D\nD -> S\n").is_err());
}

#[test]
fn path_labels_end_at_detector() {
    let g = NestedMzi::default().build();
    for p in enumerate_paths(&g) {
        assert_eq!(p.detector(), "D");
        assert_eq!(p.labels.first().map(String::as_str), Some("S"));
    }
    let p = PathDescriptor::new(["S", "BS1", "C", "BS4", "D"]);
    assert_eq!(p.mirror_key(&g), "C");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lossless_network_conserves_probability(s in setting()) {
        let g = NestedMzi { all_ports: true, ..s }.build();
        prop_assert!(g.is_lossless());
        let total: f64 = g.detectors().map(|d| detector_amplitude(&g, &d.label).norm_sqr()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "total {}", total);
    }

    #[test]
    fn enumeration_matches_brute_force(s in setting()) {
        let g = s.build();
        let found: BTreeSet<Vec<String>> = enumerate_paths(&g).into_iter().map(|p| p.labels).collect();
        prop_assert_eq!(found, brute_force(&g));
    }
}
