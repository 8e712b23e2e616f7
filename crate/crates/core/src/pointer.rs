//! Exact Gaussian pointers coupled to mirror-passage projectors.
//!
//! Each source-to-detector path is a branch. Passing mirror `n` shifts that
//! mirror's pointer rigidly by its coupling `g_n`, so the joint state is
//! `sum_k c_k prod_n phi_n(x_n - s_n(k))` with `s_n(k)` either 0 or `g_n`.
//! Pointer amplitudes are `phi(x) ~ exp(-x^2 / (2 sigma^2))`, which gives the
//! closed-form branch overlaps `O_kl = prod_n exp(-(s_n(k) - s_n(l))^2 / (4 sigma_n^2))`
//! and first moments `(s_n(k) + s_n(l)) / 2`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interferometer::{enumerate_paths, path_amplitude, InterferometerGraph, Mirror, PathDescriptor};
use crate::numeric::{fmt17, loglog_slope};
use crate::tsvf::{weak_values, TsvfError};
use crate::Complex;

/// Post-selection weights below this magnitude are treated as zero.
pub const ZERO_NORM_TOL: f64 = 1e-14;

/// Above this `g / sigma` the measurement is no longer weak; a warning is
/// logged but the computation proceeds.
pub const WEAKNESS_LIMIT: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointerError {
    #[error("post-selected pointer state has zero norm on `{detector}` ({norm:e})")]
    ZeroNorm { detector: String, norm: f64 },
    #[error("no path reaches `{0}`")]
    NoPath(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("photon number must be non-negative, got {0}")]
    NegativePhotonNumber(f64),
    #[error(transparent)]
    Tsvf(#[from] TsvfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPointer {
    pub mirror: Mirror,
    pub mean: f64,
    pub sigma: f64,
}

/// One path of the joint photon-pointer state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub path: PathDescriptor,
    pub amplitude: Complex,
    /// Shift of every pointer on this branch: `g_n` if the path meets mirror
    /// `n`, otherwise 0.
    pub shifts: BTreeMap<Mirror, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPointerState {
    pub pointers: BTreeMap<Mirror, GaussianPointer>,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPointerStats {
    pub detector: String,
    pub mean_shift: BTreeMap<Mirror, f64>,
    /// Post-selection weight including pointer-overlap corrections.
    pub normalization: f64,
}

fn check_sigma(sigma: f64) -> Result<(), PointerError> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(PointerError::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )))
    }
}

/// Joint state with the same coupling `g` and width `sigma` on every mirror.
pub fn evolve_exact(graph: &InterferometerGraph, g: f64, sigma: f64) -> Result<BranchPointerState, PointerError> {
    let mirrors = graph.mirror_symbols();
    let couplings = mirrors.iter().map(|&m| (m, g)).collect();
    let sigmas = mirrors.iter().map(|&m| (m, sigma)).collect();
    evolve_with(graph, &couplings, &sigmas)
}

/// Joint state with per-mirror couplings and widths. Mirrors missing from
/// `couplings` are uncoupled; missing widths are an error.
pub fn evolve_with(
    graph: &InterferometerGraph,
    couplings: &BTreeMap<Mirror, f64>,
    sigmas: &BTreeMap<Mirror, f64>,
) -> Result<BranchPointerState, PointerError> {
    let mut pointers = BTreeMap::new();
    for m in graph.mirror_symbols() {
        let sigma = *sigmas
            .get(&m)
            .ok_or_else(|| PointerError::InvalidParameter(format!("no pointer width for mirror {m}")))?;
        check_sigma(sigma)?;
        let g = couplings.get(&m).copied().unwrap_or(0.0);
        if !g.is_finite() {
            return Err(PointerError::InvalidParameter(format!("coupling of {m} is not finite")));
        }
        if g.abs() / sigma > WEAKNESS_LIMIT {
            log::warn!("coupling on {m} is not weak: g/sigma = {}", g.abs() / sigma);
        }
        pointers.insert(
            m,
            GaussianPointer {
                mirror: m,
                mean: 0.0,
                sigma,
            },
        );
    }
    let branches = enumerate_paths(graph)
        .into_iter()
        .map(|path| {
            let amplitude = path_amplitude(graph, &path).expect("enumerated path");
            let on_path = path.mirrors(graph);
            let shifts = pointers
                .keys()
                .map(|&m| {
                    let s = if on_path.contains(&m) {
                        couplings.get(&m).copied().unwrap_or(0.0)
                    } else {
                        0.0
                    };
                    (m, s)
                })
                .collect();
            Branch {
                path,
                amplitude,
                shifts,
            }
        })
        .collect();
    Ok(BranchPointerState { pointers, branches })
}

/// Post-selection weight and first moments of several pointers.
///
/// `shifts[p][k]` is the shift of pointer `p` on branch `k`. The
/// `g = 0` parts are summed separately from the `exp(..) - 1` corrections so
/// exact path cancellations survive in the result.
pub(crate) fn gaussian_moments(amps: &[Complex], shifts: &[Vec<f64>], sigmas: &[f64]) -> (f64, Vec<f64>) {
    let total: Complex = amps.iter().sum();
    let mut norm = total.norm_sqr();
    let mut means: Vec<f64> = shifts
        .iter()
        .map(|s| {
            let weighted: Complex = amps.iter().zip(s).map(|(c, x)| c * x).sum();
            (weighted * total.conj()).re
        })
        .collect();
    for k in 0..amps.len() {
        for l in 0..amps.len() {
            let exponent: f64 = shifts
                .iter()
                .zip(sigmas)
                .map(|(s, sigma)| -(s[k] - s[l]).powi(2) / (4.0 * sigma * sigma))
                .sum();
            if exponent == 0.0 {
                continue;
            }
            let w = (amps[k] * amps[l].conj()).re * exponent.exp_m1();
            norm += w;
            for (mean, s) in means.iter_mut().zip(shifts) {
                *mean += w * 0.5 * (s[k] + s[l]);
            }
        }
    }
    (norm, means)
}

fn detector_branches<'a>(state: &'a BranchPointerState, detector: &str) -> Result<Vec<&'a Branch>, PointerError> {
    let branches: Vec<&Branch> = state
        .branches
        .iter()
        .filter(|b| b.path.detector() == detector)
        .collect();
    if branches.is_empty() {
        return Err(PointerError::NoPath(detector.to_string()));
    }
    Ok(branches)
}

/// Pointer means conditioned on detection at `detector`.
pub fn post_select_stats(state: &BranchPointerState, detector: &str) -> Result<ConditionalPointerStats, PointerError> {
    let branches = detector_branches(state, detector)?;
    let amps: Vec<Complex> = branches.iter().map(|b| b.amplitude).collect();
    let mirrors: Vec<Mirror> = state.pointers.keys().copied().collect();
    let shifts: Vec<Vec<f64>> = mirrors
        .iter()
        .map(|m| branches.iter().map(|b| b.shifts[m]).collect())
        .collect();
    let sigmas: Vec<f64> = mirrors.iter().map(|m| state.pointers[m].sigma).collect();
    let (norm, moments) = gaussian_moments(&amps, &shifts, &sigmas);
    if norm.abs() < ZERO_NORM_TOL {
        return Err(PointerError::ZeroNorm {
            detector: detector.to_string(),
            norm,
        });
    }
    Ok(ConditionalPointerStats {
        detector: detector.to_string(),
        mean_shift: mirrors
            .iter()
            .zip(moments)
            .map(|(&m, num)| (m, state.pointers[&m].mean + num / norm))
            .collect(),
        normalization: norm,
    })
}

/// Brute-force version of [`post_select_stats`]: every pairwise pointer
/// overlap and first moment is integrated on a uniform grid of `points`
/// samples spanning `half_span` widths either side of the origin.
pub fn post_select_stats_grid(
    state: &BranchPointerState,
    detector: &str,
    points: usize,
    half_span: f64,
) -> Result<ConditionalPointerStats, PointerError> {
    let branches = detector_branches(state, detector)?;
    let n = branches.len();
    let mirrors: Vec<Mirror> = state.pointers.keys().copied().collect();
    // overlap[p][k][l] and first[p][k][l] for pointer p.
    let mut overlap = vec![vec![vec![0.0; n]; n]; mirrors.len()];
    let mut first = overlap.clone();
    for (p, m) in mirrors.iter().enumerate() {
        let sigma = state.pointers[m].sigma;
        let norm = (std::f64::consts::PI * sigma * sigma).powf(-0.25);
        let phi = |x: f64| norm * (-x * x / (2.0 * sigma * sigma)).exp();
        let lo = -half_span * sigma;
        let dx = 2.0 * half_span * sigma / (points - 1) as f64;
        for k in 0..n {
            for l in 0..n {
                let (sk, sl) = (branches[k].shifts[m], branches[l].shifts[m]);
                let (mut i0, mut i1) = (0.0, 0.0);
                for j in 0..points {
                    let x = lo + j as f64 * dx;
                    let w = if j == 0 || j == points - 1 { 0.5 } else { 1.0 };
                    let v = w * phi(x - sk) * phi(x - sl);
                    i0 += v;
                    i1 += v * x;
                }
                overlap[p][k][l] = i0 * dx;
                first[p][k][l] = i1 * dx;
            }
        }
    }
    let mut norm = 0.0;
    let mut num = vec![0.0; mirrors.len()];
    for k in 0..n {
        for l in 0..n {
            let c = (branches[k].amplitude * branches[l].amplitude.conj()).re;
            let o: f64 = (0..mirrors.len()).map(|p| overlap[p][k][l]).product();
            norm += c * o;
            for p in 0..mirrors.len() {
                let others: f64 = (0..mirrors.len())
                    .filter(|&q| q != p)
                    .map(|q| overlap[q][k][l])
                    .product();
                num[p] += c * others * first[p][k][l];
            }
        }
    }
    if norm.abs() < ZERO_NORM_TOL {
        return Err(PointerError::ZeroNorm {
            detector: detector.to_string(),
            norm,
        });
    }
    Ok(ConditionalPointerStats {
        detector: detector.to_string(),
        mean_shift: mirrors.iter().zip(num).map(|(&m, v)| (m, v / norm)).collect(),
        normalization: norm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub mirror: Mirror,
    pub g: f64,
    pub mean_shift: f64,
    pub first_order_prediction: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTable {
    pub detector: String,
    pub sigma: f64,
    pub rows: Vec<ShiftRow>,
    /// Log-log slope of the residual against `g`, per mirror; `None` when
    /// the residuals vanish.
    pub residual_slopes: BTreeMap<Mirror, Option<f64>>,
}

/// Exact pointer means against the first-order law `g * Re(A_w)` over a
/// decreasing list of couplings.
pub fn shift_vs_weakvalue(
    graph: &InterferometerGraph,
    detector: &str,
    g_values: &[f64],
    sigma: f64,
) -> Result<ShiftTable, PointerError> {
    check_sigma(sigma)?;
    if g_values.is_empty() || g_values.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
        return Err(PointerError::InvalidParameter("couplings must be positive".into()));
    }
    if g_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(PointerError::InvalidParameter(
            "couplings must be strictly decreasing".into(),
        ));
    }
    let wv = weak_values(graph, detector)?;
    let mut rows = Vec::new();
    for &g in g_values {
        let stats = post_select_stats(&evolve_exact(graph, g, sigma)?, detector)?;
        for (&m, &mean) in &stats.mean_shift {
            let prediction = g * wv.per_mirror[&m].re;
            rows.push(ShiftRow {
                mirror: m,
                g,
                mean_shift: mean,
                first_order_prediction: prediction,
                residual: (mean - prediction).abs(),
            });
        }
    }
    let residual_slopes = wv
        .per_mirror
        .keys()
        .map(|&m| {
            let (gs, rs): (Vec<f64>, Vec<f64>) =
                rows.iter().filter(|r| r.mirror == m).map(|r| (r.g, r.residual)).unzip();
            (m, loglog_slope(&gs, &rs))
        })
        .collect();
    Ok(ShiftTable {
        detector: detector.to_string(),
        sigma,
        rows,
        residual_slopes,
    })
}

impl ShiftTable {
    /// `mirror,g,mean_shift,first_order_prediction,residual`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mirror,g,mean_shift,first_order_prediction,residual\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.mirror,
                fmt17(r.g),
                fmt17(r.mean_shift),
                fmt17(r.first_order_prediction),
                fmt17(r.residual)
            );
        }
        out
    }
}

/// Average momentum given to a mirror by `nbar` photons of angular frequency
/// `omega` at incidence angle `theta_prime`: `2 nbar omega cos(theta')`, in
/// units of hbar (per unit c).
pub fn mirror_momentum_kick(nbar: f64, omega: f64, theta_prime: f64) -> Result<f64, PointerError> {
    if !(nbar >= 0.0) {
        return Err(PointerError::NegativePhotonNumber(nbar));
    }
    Ok(2.0 * nbar * omega * theta_prime.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::{parse_layout, NestedMzi};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
    use Mirror::*;

    #[test]
    fn zero_coupling_leaves_pointers_alone() {
        let g = NestedMzi::default().build();
        let state = evolve_exact(&g, 0.0, 1.0).unwrap();
        for b in &state.branches {
            assert!(b.shifts.values().all(|&s| s == 0.0));
            assert_eq!(b.amplitude, path_amplitude(&g, &b.path).unwrap());
        }
        let stats = post_select_stats(&state, "D").unwrap();
        assert!(stats.mean_shift.values().all(|&m| m == 0.0));
        assert!((stats.normalization - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn single_path_shifts_only_its_mirror() {
        let g = parse_layout("source S\nmirror M symbol=C\ndetector D\nS -> M\nM -> D\n").unwrap();
        let stats = post_select_stats(&evolve_exact(&g, 0.2, 1.0).unwrap(), "D").unwrap();
        assert_eq!(stats.mean_shift[&C], 0.2);
        assert_eq!(stats.mean_shift.len(), 1);
    }

    #[test]
    fn outer_arm_branch_carries_three_shifts() {
        let g = NestedMzi::default().build();
        let state = evolve_exact(&g, 0.1, 1.0).unwrap();
        let b = state.branches.iter().find(|b| b.path.contains("A")).unwrap();
        for (m, want) in [(A, 0.1), (B, 0.0), (C, 0.0), (E, 0.1), (F, 0.1)] {
            assert_eq!(b.shifts[&m], want);
        }
    }

    #[test]
    fn dark_residual_on_e_is_cubic() {
        let g = NestedMzi::default().build();
        let small = post_select_stats(&evolve_exact(&g, 0.02, 1.0).unwrap(), "D").unwrap();
        let half = post_select_stats(&evolve_exact(&g, 0.01, 1.0).unwrap(), "D").unwrap();
        let (a, b) = (small.mean_shift[&E], half.mean_shift[&E]);
        assert!(a != 0.0);
        assert!((a / b - 8.0).abs() < 0.01, "{}", a / b);
    }

    #[test]
    fn matches_grid_integration() {
        let g = NestedMzi {
            inner_phase: 2.0,
            ..NestedMzi::default()
        }
        .build();
        for coupling in [0.3, 0.05] {
            let state = evolve_exact(&g, coupling, 1.0).unwrap();
            let exact = post_select_stats(&state, "D").unwrap();
            let grid = post_select_stats_grid(&state, "D", 2048, 8.0).unwrap();
            assert!((exact.normalization - grid.normalization).abs() < 1e-12);
            for m in Mirror::ALL {
                assert!((exact.mean_shift[&m] - grid.mean_shift[&m]).abs() < 1e-10, "{m}");
            }
        }
    }

    #[test]
    fn zero_norm_is_reported() {
        let g = NestedMzi {
            all_ports: true,
            ..NestedMzi::default()
        }
        .build();
        let lone = parse_layout("source S\nmirror M symbol=C\ndetector D\ndetector X\nS -> M\nM -> D\n").unwrap();
        let state = evolve_exact(&lone, 0.1, 1.0).unwrap();
        assert!(matches!(post_select_stats(&state, "X"), Err(PointerError::NoPath(_))));
        assert!(post_select_stats(&evolve_exact(&g, 0.1, 1.0).unwrap(), "D_inner").is_ok());
        let dark = parse_layout(
            "source S\nsplitter BS1 t=sqrt(1/2)\nmirror U symbol=A\nmirror L symbol=B phase=pi\n\
             splitter BS2 t=sqrt(1/2)\ndetector D\ndetector K\n\
             S -> BS1\nBS1:0 -> U\nBS1:1 -> L\nU -> BS2:0\nL -> BS2:1\nBS2:1 -> D\nBS2:0 -> K\n",
        )
        .unwrap();
        let err = post_select_stats(&evolve_exact(&dark, 0.0, 1.0).unwrap(), "D").unwrap_err();
        assert!(matches!(err, PointerError::ZeroNorm { .. }));
        assert!(post_select_stats(&evolve_exact(&dark, 0.1, 1.0).unwrap(), "D").is_ok());
    }

    #[test]
    fn table_rejects_bad_input() {
        let g = NestedMzi::default().build();
        assert!(shift_vs_weakvalue(&g, "D", &[0.01, 0.02], 1.0).is_err());
        assert!(shift_vs_weakvalue(&g, "D", &[0.01], 0.0).is_err());
        assert!(shift_vs_weakvalue(&g, "D", &[], 1.0).is_err());
        let t = shift_vs_weakvalue(&g, "D", &[0.02, 0.01], 1.0).unwrap();
        assert_eq!(t.rows.len(), 10);
        assert!(t
            .to_csv()
            .starts_with("mirror,g,mean_shift,first_order_prediction,residual\nA,"));
    }

    #[test]
    fn momentum_kick() {
        assert!(mirror_momentum_kick(3.0, 2.0, FRAC_PI_2).unwrap().abs() < 1e-15);
        assert_eq!(mirror_momentum_kick(1.0, 1.0, 0.0).unwrap(), 2.0);
        assert!((mirror_momentum_kick(1e6, 1.0, FRAC_PI_3).unwrap() - 1e6).abs() < 1e-6);
        assert_eq!(
            mirror_momentum_kick(-1.0, 1.0, 0.0),
            Err(PointerError::NegativePhotonNumber(-1.0))
        );
    }
}
