use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use weaktrace::epsilon::{detector_expansion, AmplitudeMode};
use weaktrace::interferometer::{enumerate_paths, path_amplitude, NestedMzi};
use weaktrace::pointer::{evolve_exact, post_select_stats, shift_vs_weakvalue, PointerError};
use weaktrace::propagator::{
    born_first_order_packet, compose_by_quadrature, free_propagator, GaussianPacket, PotentialSpec, PropagatorError,
    SpacetimePoint,
};
use weaktrace::spectrum::{run_spectrum, OscillationConfig, SignalMode, SpectrumError};
use weaktrace::tsvf::{weak_values as tsvf_weak_values, TsvfError};
use weaktrace::{Complex, EpsilonPolynomial, InterferometerGraph, Mirror};

create_exception!(
    weaktrace_py,
    PhysicsError,
    PyException,
    "No physical answer for this input, e.g. a dark detector."
);

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn tsvf_error(e: TsvfError) -> PyErr {
    match e {
        TsvfError::ZeroOverlap { .. } => PhysicsError::new_err(e.to_string()),
        _ => value_error(e),
    }
}

fn pointer_error(e: PointerError) -> PyErr {
    match e {
        PointerError::Tsvf(inner) => tsvf_error(inner),
        PointerError::ZeroNorm { .. } | PointerError::NoPath(_) => PhysicsError::new_err(e.to_string()),
        _ => value_error(e),
    }
}

fn spectrum_error(e: SpectrumError) -> PyErr {
    match e {
        SpectrumError::Tsvf(inner) => tsvf_error(inner),
        SpectrumError::DarkPortZeroNorm { .. } | SpectrumError::NoPath(_) => PhysicsError::new_err(e.to_string()),
        _ => value_error(e),
    }
}

fn propagator_error(e: PropagatorError) -> PyErr {
    match e {
        PropagatorError::QuadratureNonconvergence(_) | PropagatorError::NotIntegrable(_) => {
            PhysicsError::new_err(e.to_string())
        }
        _ => value_error(e),
    }
}

fn by_symbol<V>(map: &BTreeMap<Mirror, V>) -> BTreeMap<String, V>
where
    V: Clone,
{
    map.iter().map(|(m, v)| (m.to_string(), v.clone())).collect()
}

/// A validated interferometer network.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: InterferometerGraph,
}

#[pymethods]
impl PyGraph {
    /// `(detector, mirror symbols, element labels, amplitude)` per path.
    fn paths(&self) -> PyResult<Vec<(String, Vec<String>, Vec<String>, Complex)>> {
        let g = &self.inner;
        enumerate_paths(g)
            .into_iter()
            .map(|p| {
                let amp = path_amplitude(g, &p).map_err(value_error)?;
                let mirrors = p.mirrors(g).iter().map(Mirror::to_string).collect();
                Ok((p.detector().to_string(), mirrors, p.labels, amp))
            })
            .collect()
    }

    fn detectors(&self) -> Vec<String> {
        self.inner.detectors().map(|d| d.label.clone()).collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        InterferometerGraph::from_json(text)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph({} elements, {} edges)",
            self.inner.elements().len(),
            self.inner.edges().len()
        )
    }
}

/// Truncated polynomial in the mirror interaction terms.
#[pyclass(name = "Polynomial", frozen)]
struct PyPolynomial {
    inner: EpsilonPolynomial,
}

#[pymethods]
impl PyPolynomial {
    #[getter]
    fn order(&self) -> u32 {
        self.inner.order()
    }

    /// Coefficient of a monomial such as `"1"`, `"eps_A"` or `"E*F"`.
    fn coefficient(&self, monomial: &str) -> PyResult<Complex> {
        let m = monomial.parse().map_err(value_error)?;
        Ok(self.inner.coefficient(&m))
    }

    fn terms(&self) -> BTreeMap<String, Complex> {
        self.inner.terms().map(|(m, c)| (m.to_string(), *c)).collect()
    }

    fn extract_order(&self, k: u32) -> PyResult<Self> {
        self.inner
            .extract_order(k)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    /// Divide by the constant term.
    fn normalized(&self) -> PyResult<Self> {
        self.inner
            .normalized()
            .map(|inner| Self { inner })
            .ok_or_else(|| PhysicsError::new_err("constant term vanishes"))
    }

    /// Value at `{"A": eps_A, ...}`; every symbol that appears must be given.
    fn evaluate(&self, assignment: BTreeMap<String, Complex>) -> PyResult<Complex> {
        let mut eps = BTreeMap::new();
        for (k, v) in assignment {
            eps.insert(k.parse::<Mirror>().map_err(value_error)?, v);
        }
        self.inner.evaluate(&eps).map_err(value_error)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Polynomial({})", self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

#[pyfunction]
fn parse_layout(text: &str) -> PyResult<PyGraph> {
    weaktrace::parse_layout(text)
        .map(|inner| PyGraph { inner })
        .map_err(value_error)
}

/// The nested interferometer; defaults give the dark-tuned inner arm.
#[pyfunction]
#[pyo3(signature = (inner_phase=PI, outer_split=None, inner_split=None, outer_phase=-FRAC_PI_2, all_ports=false))]
fn nested_mzi(
    inner_phase: f64,
    outer_split: Option<f64>,
    inner_split: Option<f64>,
    outer_phase: f64,
    all_ports: bool,
) -> PyResult<PyGraph> {
    let d = NestedMzi::default();
    let setting = NestedMzi {
        inner_phase,
        outer_split: outer_split.unwrap_or(d.outer_split),
        inner_split: inner_split.unwrap_or(d.inner_split),
        outer_phase,
        all_ports,
    };
    for t in [setting.outer_split, setting.inner_split] {
        if !(0.0..=1.0).contains(&t) {
            return Err(value_error(format!("splitter transmission {t} outside [0, 1]")));
        }
    }
    Ok(PyGraph { inner: setting.build() })
}

#[pyfunction]
#[pyo3(signature = (graph, detector="D", order=3, unit_amplitudes=false))]
fn expand(graph: &PyGraph, detector: &str, order: u32, unit_amplitudes: bool) -> PyResult<PyPolynomial> {
    let mode = if unit_amplitudes {
        AmplitudeMode::Unit
    } else {
        AmplitudeMode::Physical
    };
    detector_expansion(&graph.inner, detector, order, mode)
        .map(|inner| PyPolynomial { inner })
        .map_err(value_error)
}

/// `(per_mirror, cumulative, post_selection_probability)`.
#[pyfunction]
#[pyo3(signature = (graph, detector="D"))]
fn weak_values(
    graph: &PyGraph,
    detector: &str,
) -> PyResult<(BTreeMap<String, Complex>, BTreeMap<String, Complex>, f64)> {
    let wv = tsvf_weak_values(&graph.inner, detector).map_err(tsvf_error)?;
    Ok((by_symbol(&wv.per_mirror), wv.cumulative, wv.post_selection_probability))
}

/// Post-selected mean shift of each mirror's pointer.
#[pyfunction]
#[pyo3(signature = (graph, g, sigma=1.0, detector="D"))]
fn pointer_shifts(graph: &PyGraph, g: f64, sigma: f64, detector: &str) -> PyResult<BTreeMap<String, f64>> {
    let state = evolve_exact(&graph.inner, g, sigma).map_err(pointer_error)?;
    let stats = post_select_stats(&state, detector).map_err(pointer_error)?;
    Ok(by_symbol(&stats.mean_shift))
}

/// Residual log-log slope of the pointer shift against `g`, per mirror.
#[pyfunction]
#[pyo3(signature = (graph, g_values, sigma=1.0, detector="D"))]
fn shift_residual_slopes(
    graph: &PyGraph,
    g_values: Vec<f64>,
    sigma: f64,
    detector: &str,
) -> PyResult<BTreeMap<String, Option<f64>>> {
    let table = shift_vs_weakvalue(&graph.inner, detector, &g_values, sigma).map_err(pointer_error)?;
    Ok(by_symbol(&table.residual_slopes))
}

/// `(freqs, power, peak_power)` for the default oscillation record.
#[pyfunction]
#[pyo3(signature = (graph, delta=0.05, exact=false, detector="D"))]
fn spectrum(
    graph: &PyGraph,
    delta: f64,
    exact: bool,
    detector: &str,
) -> PyResult<(Vec<f64>, Vec<f64>, BTreeMap<String, f64>)> {
    let mut cfg = OscillationConfig::with_delta(delta);
    cfg.detector = detector.to_string();
    if exact {
        cfg.mode = SignalMode::Exact;
    }
    let (_, s) = run_spectrum(&graph.inner, &cfg).map_err(spectrum_error)?;
    let peaks = by_symbol(&s.peak_power);
    Ok((s.freqs, s.power, peaks))
}

/// Free-particle kernel `K(xb, tb; xa, ta)`.
#[pyfunction]
fn free_kernel(xa: f64, ta: f64, xb: f64, tb: f64) -> PyResult<Complex> {
    free_propagator(SpacetimePoint::new(xa, ta), SpacetimePoint::new(xb, tb)).map_err(propagator_error)
}

/// Free kernel composed through an intermediate time by quadrature.
#[pyfunction]
fn composed_kernel(xa: f64, ta: f64, xb: f64, tb: f64, tc: f64) -> PyResult<Complex> {
    compose_by_quadrature(SpacetimePoint::new(xa, ta), SpacetimePoint::new(xb, tb), tc).map_err(propagator_error)
}

/// Free packet value and its first-order correction from a Gaussian kick.
#[pyfunction]
#[pyo3(signature = (x0, k0, sigma, x, t, strength, center=0.0, time=None, width=0.5, duration=0.5))]
#[allow(clippy::too_many_arguments)]
fn born_packet(
    x0: f64,
    k0: f64,
    sigma: f64,
    x: f64,
    t: f64,
    strength: f64,
    center: f64,
    time: Option<f64>,
    width: f64,
    duration: f64,
) -> PyResult<(Complex, Complex)> {
    let packet = GaussianPacket { x0, k0, sigma, t0: 0.0 };
    let kick = PotentialSpec::LocalizedKick {
        center,
        time: time.unwrap_or(0.5 * t),
        strength,
        width,
        duration,
    };
    let correction = born_first_order_packet(&packet, SpacetimePoint::new(x, t), &kick).map_err(propagator_error)?;
    Ok((packet.analytic(x, t), correction))
}

#[pymodule]
fn weaktrace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyPolynomial>()?;
    m.add("PhysicsError", m.py().get_type::<PhysicsError>())?;
    m.add_function(wrap_pyfunction!(parse_layout, m)?)?;
    m.add_function(wrap_pyfunction!(nested_mzi, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(weak_values, m)?)?;
    m.add_function(wrap_pyfunction!(pointer_shifts, m)?)?;
    m.add_function(wrap_pyfunction!(shift_residual_slopes, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(free_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(composed_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(born_packet, m)?)?;
    Ok(())
}
