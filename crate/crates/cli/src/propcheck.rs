//! Self-consistency report for the propagator module.

use serde::Serialize;

use weaktrace::numeric::{fmt17, loglog_slope};
use weaktrace::propagator::{
    born_first_order_packet, compose_by_quadrature, free_propagator, schrodinger_oracle, time_sliced_propagator,
    GaussianPacket, GridWavefunction, OracleGrid, PotentialSpec, SpacetimePoint,
};

use crate::config::PropagatorSection;
use crate::error::CliError;

/// Errors below this are roundoff and do not break monotone convergence.
const SLICING_ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub measured: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub semigroup_tol: f64,
    pub born_rel_tol: f64,
    pub born_slope: f64,
    pub born_slope_tol: f64,
    pub slices: Vec<usize>,
    pub strengths: Vec<f64>,
}

impl Settings {
    pub fn from_section(s: &PropagatorSection) -> Self {
        Self {
            semigroup_tol: s.semigroup_tol.unwrap_or(1e-8),
            born_rel_tol: s.born_rel_tol.unwrap_or(1e-2),
            born_slope: s.born_slope.unwrap_or(2.0),
            born_slope_tol: s.born_slope_tol.unwrap_or(0.3),
            slices: s.slices.clone().unwrap_or_else(|| vec![2, 4, 8, 16, 32]),
            strengths: s.strengths.clone().unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025]),
        }
    }
}

fn packet() -> GaussianPacket {
    GaussianPacket {
        x0: -2.0,
        k0: 1.0,
        sigma: 1.0,
        t0: 0.0,
    }
}

fn kick(strength: f64) -> PotentialSpec {
    PotentialSpec::LocalizedKick {
        center: 0.0,
        time: 2.0,
        strength,
        width: 0.5,
        duration: 0.5,
    }
}

/// Runs every check; the wavefunction is the oracle for the first strength.
pub fn run(settings: &Settings) -> Result<(Vec<CheckLine>, GridWavefunction), CliError> {
    if settings.strengths.len() < 2 || settings.slices.len() < 2 {
        return Err(CliError::Config(
            "need at least two strengths and two slice counts".into(),
        ));
    }
    let (a, b) = (SpacetimePoint::new(-0.5, 0.0), SpacetimePoint::new(1.25, 2.0));
    let direct = free_propagator(a, b)?;
    let mut semigroup = Vec::new();
    for t in [0.2, 0.7, 1.0, 1.6] {
        semigroup.push((compose_by_quadrature(a, b, t)? - direct).norm());
    }

    let mut slicing = Vec::new();
    for &n in &settings.slices {
        slicing.push((time_sliced_propagator(a, b, n, None)? - direct).norm() / direct.norm());
    }
    let monotone = slicing.windows(2).all(|w| w[1] <= w[0] + SLICING_ROUNDOFF);

    let p = packet();
    let xb = SpacetimePoint::new(2.0, 4.0);
    let psi0 = p.analytic(xb.x, xb.t);
    let mut rel = Vec::new();
    let mut export = None;
    for &v0 in &settings.strengths {
        let v = kick(v0);
        let psi1 = born_first_order_packet(&p, xb, &v)?;
        let oracle = schrodinger_oracle(&p, Some(&v), xb.t, &OracleGrid::default())?;
        let want = oracle.value_at(xb.x).norm_sqr();
        rel.push(((psi0 + psi1).norm_sqr() - want).abs() / want);
        export.get_or_insert(oracle);
    }
    let slope = loglog_slope(&settings.strengths, &rel).unwrap_or(f64::NAN);

    let lines = vec![
        CheckLine {
            name: "semigroup".into(),
            pass: semigroup.iter().all(|&e| e <= settings.semigroup_tol),
            measured: semigroup,
            tolerance: settings.semigroup_tol,
        },
        CheckLine {
            name: "slicing-monotone".into(),
            pass: monotone,
            measured: slicing,
            tolerance: SLICING_ROUNDOFF,
        },
        CheckLine {
            name: "born-vs-oracle".into(),
            pass: rel.iter().all(|&r| r <= settings.born_rel_tol),
            measured: rel,
            tolerance: settings.born_rel_tol,
        },
        CheckLine {
            name: "born-error-slope".into(),
            pass: (slope - settings.born_slope).abs() <= settings.born_slope_tol,
            measured: vec![slope],
            tolerance: settings.born_slope_tol,
        },
    ];
    Ok((lines, export.expect("at least one strength")))
}

pub fn to_text(lines: &[CheckLine]) -> String {
    let mut out = String::new();
    for l in lines {
        let measured: Vec<String> = l.measured.iter().map(|&v| fmt17(v)).collect();
        out.push_str(&format!(
            "{} {}: measured [{}] tolerance {}\n",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            measured.join(", "),
            fmt17(l.tolerance)
        ));
    }
    out
}

pub fn to_csv(lines: &[CheckLine]) -> String {
    let mut out = String::from("check,pass,index,measured,tolerance\n");
    for l in lines {
        for (i, v) in l.measured.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{i},{},{}\n",
                l.name,
                l.pass,
                fmt17(*v),
                fmt17(l.tolerance)
            ));
        }
    }
    out
}
