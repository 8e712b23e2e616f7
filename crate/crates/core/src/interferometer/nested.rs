//! The nested Mach-Zehnder interferometer.
//!
//! ```text
//!                 +-- A --+
//!       +-- E -- BS2      BS3 -- F --+
//! S -- BS1        +-- B --+          BS4 -- D
//!       +---------------- C ---------+
//! ```
//!
//! Mirror E sits on the reflected output of BS1 and C on the transmitted one.
//! Inside, A follows the transmitted output of BS2 and B the reflected one;
//! both recombine at BS3 on the output port that involves exactly one
//! reflection per arm, so a phase of `pi` on B makes that port dark. F is
//! reflected into the detector by BS4 while C is transmitted.
//!
//! Mirror C carries a static phase of `-pi/2` by default. It puts the
//! C-path in phase with the inner paths at D, which the odd number of extra
//! reflections on the E-F arm would otherwise rotate by a quarter turn.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{Edge, Element, ElementKind, GraphBuilder, InterferometerGraph, Mirror};

/// Layout-language form of the canonical dark-tuned configuration
/// (outer split `1/sqrt(3)`, inner split `1/sqrt(2)`).
pub const NESTED_MZI_LAYOUT: &str = include_str!("../../../../layouts/nested_mzi.layout");

/// Parameters of the nested interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedMzi {
    /// Static phase on mirror B; `pi` gives the dark inner port.
    pub inner_phase: f64,
    /// Transmission amplitude of the outer splitters BS1 and BS4.
    pub outer_split: f64,
    /// Transmission amplitude of the inner splitters BS2 and BS3.
    pub inner_split: f64,
    /// Static phase on mirror C.
    pub outer_phase: f64,
    /// Terminate the otherwise open splitter outputs with detectors
    /// `D_inner` (BS3) and `D_bright` (BS4), making the network lossless.
    pub all_ports: bool,
}

impl Default for NestedMzi {
    fn default() -> Self {
        Self {
            inner_phase: PI,
            outer_split: 1.0 / 3f64.sqrt(),
            inner_split: 1.0 / 2f64.sqrt(),
            outer_phase: -FRAC_PI_2,
            all_ports: false,
        }
    }
}

impl NestedMzi {
    pub fn build(&self) -> InterferometerGraph {
        let mirror = |label: &str, symbol: Mirror, phase: f64| {
            Element::new(
                label,
                ElementKind::Mirror {
                    symbol: Some(symbol),
                    phase,
                    frequency: None,
                    tilt: None,
                },
            )
        };
        let mut b = GraphBuilder::default();
        let elements = [
            Element::new("S", ElementKind::Source),
            Element::new("BS1", ElementKind::BeamSplitter { t: self.outer_split }),
            mirror("E", Mirror::E, 0.0),
            Element::new("BS2", ElementKind::BeamSplitter { t: self.inner_split }),
            mirror("A", Mirror::A, 0.0),
            mirror("B", Mirror::B, self.inner_phase),
            Element::new("BS3", ElementKind::BeamSplitter { t: self.inner_split }),
            mirror("F", Mirror::F, 0.0),
            mirror("C", Mirror::C, self.outer_phase),
            Element::new("BS4", ElementKind::BeamSplitter { t: self.outer_split }),
            Element::new("D", ElementKind::Detector),
        ];
        for e in elements {
            b.element(e).expect("labels are distinct");
        }
        let mut edges = vec![
            ("S", 0, "BS1", 0),
            ("BS1", 0, "C", 0),
            ("BS1", 1, "E", 0),
            ("E", 0, "BS2", 0),
            ("BS2", 0, "A", 0),
            ("BS2", 1, "B", 0),
            ("A", 0, "BS3", 0),
            ("B", 0, "BS3", 1),
            ("BS3", 1, "F", 0),
            ("F", 0, "BS4", 0),
            ("C", 0, "BS4", 1),
            ("BS4", 1, "D", 0),
        ];
        if self.all_ports {
            for e in [
                Element::new("D_inner", ElementKind::Detector),
                Element::new("D_bright", ElementKind::Detector),
            ] {
                b.element(e).expect("labels are distinct");
            }
            edges.push(("BS3", 0, "D_inner", 0));
            edges.push(("BS4", 0, "D_bright", 0));
        }
        for (from, fp, to, tp) in edges {
            let e = Edge {
                from: from.into(),
                from_port: fp,
                to: to.into(),
                to_port: tp,
            };
            b.edge(e.from, Some(e.from_port), e.to, Some(e.to_port), None);
        }
        b.build().expect("nested interferometer topology is valid")
    }
}

/// Nested interferometer with mirror B at `inner_phase` and the given
/// transmission amplitudes for the outer and inner splitter pairs.
/// `inner_phase = pi` tunes the inner interferometer so nothing reaches F.
pub fn build_nested_mzi(inner_phase: f64, outer_split: f64, inner_split: f64) -> InterferometerGraph {
    NestedMzi {
        inner_phase,
        outer_split,
        inner_split,
        ..NestedMzi::default()
    }
    .build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::{parse_layout, path_amplitude, PathDescriptor};
    use crate::Complex;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn inner(g: &InterferometerGraph) -> (Complex, Complex) {
        let p1 = PathDescriptor::new(["S", "BS1", "E", "BS2", "A", "BS3", "F", "BS4", "D"]);
        let p2 = PathDescriptor::new(["S", "BS1", "E", "BS2", "B", "BS3", "F", "BS4", "D"]);
        (path_amplitude(g, &p1).unwrap(), path_amplitude(g, &p2).unwrap())
    }

    #[test]
    fn layout_text_matches_constructor() {
        let parsed = parse_layout(NESTED_MZI_LAYOUT).unwrap();
        assert_eq!(parsed, NestedMzi::default().build());
        assert_eq!(parsed.elements().len(), 11);
    }

    #[test]
    fn dark_tuning_makes_inner_paths_opposite() {
        let g = build_nested_mzi(PI, 1.0 / 3f64.sqrt(), FRAC_1_SQRT_2);
        let (a1, a2) = inner(&g);
        assert_eq!(a1, -a2);
        assert!(a1.norm() > 0.0);
    }

    #[test]
    fn zero_phase_makes_inner_paths_equal() {
        let g = build_nested_mzi(0.0, 0.4, 0.6);
        let (a1, a2) = inner(&g);
        assert_eq!(a1, a2);
    }

    #[test]
    fn quarter_phase_paths_add_incoherently() {
        let g = build_nested_mzi(FRAC_PI_2, 0.55, 0.8);
        let (a1, a2) = inner(&g);
        let lhs = (a1 + a2).norm_sqr();
        let rhs = a1.norm_sqr() + a2.norm_sqr();
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn symmetric_setting_puts_all_three_paths_in_step() {
        let g = NestedMzi::default().build();
        let (a1, _) = inner(&g);
        let a3 = path_amplitude(&g, &PathDescriptor::new(["S", "BS1", "C", "BS4", "D"])).unwrap();
        assert!((a1 - a3).norm() < 1e-15);
        assert!((a1.norm() - 1.0 / 3.0).abs() < 1e-15);
    }
}
