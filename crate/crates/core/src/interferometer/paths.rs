use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ElementKind, InterferometerGraph, LayoutError, Mirror};
use crate::Complex;

/// Ordered element labels from the source to a detector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathDescriptor {
    pub labels: Vec<String>,
}

impl PathDescriptor {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        Self {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn detector(&self) -> &str {
        self.labels.last().map(String::as_str).unwrap_or_default()
    }

    /// Coupling symbols met along the path, in order of traversal.
    pub fn mirrors(&self, graph: &InterferometerGraph) -> Vec<Mirror> {
        self.labels
            .iter()
            .filter_map(|l| graph.element(l).and_then(|e| e.mirror_symbol()))
            .collect()
    }

    /// Short name built from the coupling symbols, e.g. `E-A-F`.
    pub fn mirror_key(&self, graph: &InterferometerGraph) -> String {
        let m = self.mirrors(graph);
        if m.is_empty() {
            "-".to_string()
        } else {
            m.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("-")
        }
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }
}

impl fmt::Display for PathDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labels.join(" -> "))
    }
}

/// All simple source-to-detector paths, ordered lexicographically by label
/// sequence.
pub fn enumerate_paths(graph: &InterferometerGraph) -> Vec<PathDescriptor> {
    let mut out = Vec::new();
    let mut stack = vec![graph.source().label.clone()];
    dfs(graph, &mut stack, &mut out);
    out.sort();
    out
}

/// Paths ending at `detector` (empty when it is unreachable or unknown).
pub fn enumerate_paths_to(graph: &InterferometerGraph, detector: &str) -> Vec<PathDescriptor> {
    enumerate_paths(graph)
        .into_iter()
        .filter(|p| p.detector() == detector)
        .collect()
}

/// All simple directed walks from `from` to `to`, sorted.
pub(crate) fn walks_between(graph: &InterferometerGraph, from: &str, to: &str) -> Vec<Vec<String>> {
    fn go(graph: &InterferometerGraph, to: &str, stack: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        let here = stack.last().expect("non-empty stack").clone();
        if here == to {
            out.push(stack.clone());
            return;
        }
        for next in graph.successors(&here) {
            stack.push(next.to_string());
            go(graph, to, stack, out);
            stack.pop();
        }
    }
    let mut out = Vec::new();
    if graph.element(from).is_some() && graph.element(to).is_some() {
        go(graph, to, &mut vec![from.to_string()], &mut out);
    }
    out.sort();
    out
}

fn dfs(graph: &InterferometerGraph, stack: &mut Vec<String>, out: &mut Vec<PathDescriptor>) {
    let here = stack.last().expect("non-empty stack").clone();
    if matches!(graph.element(&here).map(|e| &e.kind), Some(ElementKind::Detector)) {
        out.push(PathDescriptor { labels: stack.clone() });
        return;
    }
    for next in graph.successors(&here) {
        stack.push(next.to_string());
        dfs(graph, stack, out);
        stack.pop();
    }
}

/// A product of scattering factors kept in factored form.
///
/// Phases that are whole quarter turns are tracked as integers and magnitudes
/// are multiplied in sorted order, so two paths made of the same factors in a
/// different sequence evaluate to bit-identical values. This is what makes the
/// dark-port cancellation exact rather than approximate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathAmplitude {
    magnitudes: Vec<f64>,
    quarter_turns: i64,
    phases: Vec<f64>,
}

impl PathAmplitude {
    pub fn one() -> Self {
        Self::default()
    }

    fn magnitude(&mut self, m: f64) {
        if m != 1.0 {
            self.magnitudes.push(m);
        }
    }

    fn phase(&mut self, phi: f64) {
        let k = (phi / FRAC_PI_2).round();
        if k * FRAC_PI_2 == phi {
            self.quarter_turns += k as i64;
        } else {
            self.phases.push(phi);
        }
    }

    pub fn concat(&self, other: &PathAmplitude) -> PathAmplitude {
        let mut out = self.clone();
        out.magnitudes.extend_from_slice(&other.magnitudes);
        out.quarter_turns += other.quarter_turns;
        out.phases.extend_from_slice(&other.phases);
        out
    }

    pub fn value(&self) -> Complex {
        let mut mags = self.magnitudes.clone();
        mags.sort_by(f64::total_cmp);
        let magnitude: f64 = mags.iter().product();
        let mut phases = self.phases.clone();
        phases.sort_by(f64::total_cmp);
        let base = if phases.is_empty() {
            Complex::new(magnitude, 0.0)
        } else {
            Complex::from_polar(magnitude, phases.iter().sum())
        };
        match self.quarter_turns.rem_euclid(4) {
            0 => base,
            1 => Complex::new(-base.im, base.re),
            2 => Complex::new(-base.re, -base.im),
            _ => Complex::new(base.im, -base.re),
        }
    }
}

fn invalid(msg: String) -> LayoutError {
    LayoutError::InvalidPath(msg)
}

/// Factors of the walk `labels`. The first and last element's own factor is
/// included only when requested; a splitter at an open end of the walk is an
/// error since its factor depends on both neighbouring arcs.
pub(crate) fn walk_amplitude(
    graph: &InterferometerGraph,
    labels: &[String],
    include_first: bool,
    include_last: bool,
) -> Result<PathAmplitude, LayoutError> {
    if labels.is_empty() {
        return Err(invalid("empty path".into()));
    }
    let mut seen = BTreeSet::new();
    for l in labels {
        if graph.element(l).is_none() {
            return Err(invalid(format!("unknown element `{l}`")));
        }
        if !seen.insert(l.as_str()) {
            return Err(invalid(format!("element `{l}` visited twice")));
        }
    }
    let mut edges = Vec::with_capacity(labels.len().saturating_sub(1));
    for w in labels.windows(2) {
        let e = graph
            .edge_between(&w[0], &w[1])
            .ok_or_else(|| invalid(format!("no edge `{}` -> `{}`", w[0], w[1])))?;
        edges.push(e);
    }

    let mut amp = PathAmplitude::one();
    let last = labels.len() - 1;
    for (i, label) in labels.iter().enumerate() {
        if (i == 0 && !include_first) || (i == last && !include_last) {
            continue;
        }
        match graph.element(label).expect("checked").kind {
            ElementKind::Source | ElementKind::Detector => {}
            ElementKind::Mirror { phase, .. } | ElementKind::PhaseShifter { phase } => amp.phase(phase),
            ElementKind::BeamSplitter { t } => {
                if i == 0 || i == last {
                    return Err(invalid(format!("walk cannot end on splitter `{label}`")));
                }
                let in_port = edges[i - 1].to_port;
                let out_port = edges[i].from_port;
                if in_port == out_port {
                    amp.magnitude(t);
                } else {
                    amp.magnitude((1.0 - t * t).max(0.0).sqrt());
                    amp.quarter_turns += 1;
                }
            }
        }
    }
    Ok(amp)
}

pub(crate) fn path_factors(graph: &InterferometerGraph, path: &PathDescriptor) -> Result<PathAmplitude, LayoutError> {
    let labels = &path.labels;
    match labels.first().and_then(|l| graph.element(l)).map(|e| &e.kind) {
        Some(ElementKind::Source) => {}
        _ => return Err(invalid("path must start at the source".into())),
    }
    match labels.last().and_then(|l| graph.element(l)).map(|e| &e.kind) {
        Some(ElementKind::Detector) => {}
        _ => return Err(invalid("path must end at a detector".into())),
    }
    walk_amplitude(graph, labels, true, true)
}

/// Product of the scattering amplitudes along a source-to-detector path.
pub fn path_amplitude(graph: &InterferometerGraph, path: &PathDescriptor) -> Result<Complex, LayoutError> {
    path_factors(graph, path).map(|a| a.value())
}
