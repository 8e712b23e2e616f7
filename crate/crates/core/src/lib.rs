//! Sequential weak measurements in nested Mach-Zehnder interferometers.
//!
//! The crate is organised around the optical network:
//!
//! - [`interferometer`]: the network graph, its layout DSL, path enumeration
//!   and bare path amplitudes.
//! - [`epsilon`]: truncated polynomials in the mirror interaction terms
//!   `eps_A .. eps_F`, built from the path products `amp * prod(1 - eps_n)`.
//! - [`tsvf`]: forward/backward states and projector weak values.
//! - [`pointer`]: exact Gaussian pointer simulation with post-selection.
//! - [`spectrum`]: oscillating-mirror centroid signals and their periodograms.
//! - [`propagator`]: 1D free propagator, scattering chains, first-order Born
//!   term, time slicing and a split-step Schrödinger oracle.
//!
//! Units: phases in radians, frequencies in Hz, and `hbar = m = 1` in the
//! propagator module.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod epsilon;
pub mod interferometer;
pub mod numeric;
pub mod pointer;
pub mod propagator;
pub mod spectrum;
pub mod tsvf;

pub use num_complex::Complex64 as Complex;

pub use epsilon::{EpsilonMonomial, EpsilonPolynomial};
pub use interferometer::{
    build_nested_mzi, parse_layout, Element, ElementKind, InterferometerGraph, Mirror, PathDescriptor,
};
pub use tsvf::{TwoStateVector, WeakValueResult};
