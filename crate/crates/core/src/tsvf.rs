//! Forward and backward states on the network and projector weak values.
//!
//! A region is any element other than a beam splitter. The forward amplitude
//! at a region sums the walks from the source up to and including that
//! element; the backward amplitude sums the walks from just after it to the
//! post-selected detector, so `forward(r) * backward(r)` is the total
//! amplitude of the paths through `r` and the weak value of the projector on
//! `r` is that product divided by the overlap.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interferometer::{
    enumerate_paths_to, path_amplitude, walk_amplitude, walks_between, ElementKind, InterferometerGraph, Mirror,
    PathDescriptor,
};
use crate::Complex;

/// Overlaps below this magnitude make post-selection impossible.
pub const ZERO_OVERLAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TsvfError {
    #[error("`{0}` is not a detector of this network")]
    UnknownDetector(String),
    #[error("post-selection on `{detector}` is impossible: |overlap| = {magnitude:e}")]
    ZeroOverlap { detector: String, magnitude: f64 },
    #[error("cut is not complete: path {0} crosses it {1} times")]
    IncompleteCut(String, usize),
    #[error("mirror {0} is not part of this network")]
    MissingMirror(Mirror),
    #[error("`{0}` is not a region of this network")]
    UnknownRegion(String),
}

/// Pre- and post-selected amplitudes at every region, for one detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStateVector {
    pub detector: String,
    pub forward: BTreeMap<String, Complex>,
    pub backward: BTreeMap<String, Complex>,
    /// Total source-to-detector amplitude.
    pub overlap: Complex,
    pub mirrors: BTreeMap<Mirror, String>,
    /// Source-to-detector paths, used to validate cuts.
    pub paths: Vec<PathDescriptor>,
}

/// Per-mirror weak values and their sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakValueResult {
    pub detector: String,
    pub per_mirror: BTreeMap<Mirror, Complex>,
    /// Keyed by the mirror sequence of each path (`E-A-F`) plus `detector`
    /// for the sum over every mirror.
    pub cumulative: BTreeMap<String, Complex>,
    pub post_selection_probability: f64,
}

fn is_region(kind: &ElementKind) -> bool {
    !kind.is_splitter()
}

/// Amplitude arriving at each region from the source.
pub fn forward_state(graph: &InterferometerGraph) -> BTreeMap<String, Complex> {
    let source = graph.source().label.clone();
    graph
        .elements()
        .iter()
        .filter(|e| is_region(&e.kind))
        .map(|e| {
            let amp = walks_between(graph, &source, &e.label)
                .iter()
                .map(|w| walk_amplitude(graph, w, true, true).expect("walk from graph").value())
                .sum();
            (e.label.clone(), amp)
        })
        .collect()
}

/// Amplitude from each region onward to `detector`, excluding the region's
/// own factor. This is the conjugated post-selected state `phi*`.
pub fn backward_state(graph: &InterferometerGraph, detector: &str) -> Result<BTreeMap<String, Complex>, TsvfError> {
    match graph.element(detector).map(|e| &e.kind) {
        Some(ElementKind::Detector) => {}
        _ => return Err(TsvfError::UnknownDetector(detector.to_string())),
    }
    Ok(graph
        .elements()
        .iter()
        .filter(|e| is_region(&e.kind))
        .map(|e| {
            let amp = walks_between(graph, &e.label, detector)
                .iter()
                .map(|w| walk_amplitude(graph, w, false, true).expect("walk from graph").value())
                .sum();
            (e.label.clone(), amp)
        })
        .collect())
}

pub fn two_state_vector(graph: &InterferometerGraph, detector: &str) -> Result<TwoStateVector, TsvfError> {
    let backward = backward_state(graph, detector)?;
    let forward = forward_state(graph);
    let paths = enumerate_paths_to(graph, detector);
    let overlap = paths
        .iter()
        .map(|p| path_amplitude(graph, p).expect("enumerated path"))
        .sum();
    let mirrors = graph
        .mirror_symbols()
        .into_iter()
        .map(|m| (m, graph.mirror_label(m).expect("symbol present").to_string()))
        .collect();
    Ok(TwoStateVector {
        detector: detector.to_string(),
        forward,
        backward,
        overlap,
        mirrors,
        paths,
    })
}

impl TwoStateVector {
    fn check_overlap(&self) -> Result<(), TsvfError> {
        if self.overlap.norm() < ZERO_OVERLAP_TOL {
            return Err(TsvfError::ZeroOverlap {
                detector: self.detector.clone(),
                magnitude: self.overlap.norm(),
            });
        }
        Ok(())
    }

    pub fn post_selection_probability(&self) -> f64 {
        self.overlap.norm_sqr()
    }

    /// Weak value of the projector on an arbitrary region.
    pub fn region_weak_value(&self, label: &str) -> Result<Complex, TsvfError> {
        self.check_overlap()?;
        let (f, b) = self
            .forward
            .get(label)
            .zip(self.backward.get(label))
            .ok_or_else(|| TsvfError::UnknownRegion(label.to_string()))?;
        Ok(f * b / self.overlap)
    }

    fn label(&self, mirror: Mirror) -> Result<&str, TsvfError> {
        self.mirrors
            .get(&mirror)
            .map(String::as_str)
            .ok_or(TsvfError::MissingMirror(mirror))
    }
}

/// `backward(n) * forward(n) / overlap` for the mirror carrying `mirror`.
pub fn projector_weak_value(tsv: &TwoStateVector, mirror: Mirror) -> Result<Complex, TsvfError> {
    let label = tsv.label(mirror)?;
    tsv.region_weak_value(label)
}

/// Sum of projector weak values over `mirrors`.
pub fn cumulative_weak_value(tsv: &TwoStateVector, mirrors: &[Mirror]) -> Result<Complex, TsvfError> {
    tsv.check_overlap()?;
    mirrors.iter().map(|&m| projector_weak_value(tsv, m)).sum()
}

/// Sum of weak values over a cut; equals 1 when every post-selected path
/// crosses the cut exactly once.
pub fn completeness_check(tsv: &TwoStateVector, cut: &[Mirror]) -> Result<Complex, TsvfError> {
    let labels = cut.iter().map(|&m| tsv.label(m)).collect::<Result<Vec<_>, _>>()?;
    for p in &tsv.paths {
        let crossings = labels.iter().filter(|l| p.contains(l)).count();
        if crossings != 1 {
            return Err(TsvfError::IncompleteCut(p.to_string(), crossings));
        }
    }
    cumulative_weak_value(tsv, cut)
}

/// Weak values of every mirror in the network for post-selection on
/// `detector`, with per-path and whole-detector sums.
pub fn weak_values(graph: &InterferometerGraph, detector: &str) -> Result<WeakValueResult, TsvfError> {
    let tsv = two_state_vector(graph, detector)?;
    tsv.check_overlap()?;
    let mut per_mirror = BTreeMap::new();
    for &m in tsv.mirrors.keys() {
        per_mirror.insert(m, projector_weak_value(&tsv, m)?);
    }
    let mut cumulative = BTreeMap::new();
    for p in &tsv.paths {
        let mirrors = p.mirrors(graph);
        cumulative.insert(p.mirror_key(graph), cumulative_weak_value(&tsv, &mirrors)?);
    }
    let all: Vec<Mirror> = per_mirror.keys().copied().collect();
    cumulative.insert("detector".to_string(), cumulative_weak_value(&tsv, &all)?);
    Ok(WeakValueResult {
        detector: detector.to_string(),
        per_mirror,
        cumulative,
        post_selection_probability: tsv.post_selection_probability(),
    })
}

impl WeakValueResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("weak values serialize")
    }
}
