//! One-dimensional propagators in units `hbar = m = 1`.
//!
//! The free kernel is `K(b, a) = sqrt(1 / (2 pi i dt)) exp(i dx^2 / (2 dt))`.
//! It is undefined at `dt = 0`. Every Gaussian integral over an
//! intermediate position is done in closed form through [`GaussianForm`].

mod born;
mod gaussian;
mod oracle;

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{composite_gauss_legendre, QuadratureError};
use crate::Complex;

pub use born::{born_first_order, born_first_order_packet};
pub use gaussian::{GaussianForm, GaussianPacket};
pub use oracle::{schrodinger_oracle, GridWavefunction, OracleGrid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagatorError {
    #[error("propagation time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("scattering events are not strictly ordered inside the interval: {0}")]
    UnorderedEvents(String),
    #[error("potential window [{start}, {end}] is not inside ({t_a}, {t_b})")]
    WindowOutsideInterval { start: f64, end: f64, t_a: f64, t_b: f64 },
    #[error("integral does not converge: {0}")]
    NotIntegrable(String),
    #[error(transparent)]
    QuadratureNonconvergence(#[from] QuadratureError),
    #[error("grid does not resolve the problem: {0}")]
    GridResolution(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time slicing is implemented for the free particle only")]
    PotentialNotSupported,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub x: f64,
    pub t: f64,
}

impl SpacetimePoint {
    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: Complex,
    pub from: SpacetimePoint,
    pub to: SpacetimePoint,
}

/// Scattering potential switched on during one time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `V(x, t) = strength * exp(-(x - center)^2 / (2 width^2))` for
    /// `|t - time| <= duration / 2`, zero otherwise.
    LocalizedKick {
        center: f64,
        time: f64,
        strength: f64,
        width: f64,
        duration: f64,
    },
    /// Piecewise-linear `V(x)` through the samples, zero outside them, active
    /// for `t_start <= t <= t_end`.
    Grid {
        x: Vec<f64>,
        values: Vec<f64>,
        t_start: f64,
        t_end: f64,
    },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<(), PropagatorError> {
        let bad = |m: String| Err(PropagatorError::InvalidPotential(m));
        match self {
            PotentialSpec::LocalizedKick {
                center,
                time,
                strength,
                width,
                duration,
            } => {
                if !(*width > 0.0 && width.is_finite()) {
                    return bad(format!("width must be positive, got {width}"));
                }
                if !(*duration > 0.0 && duration.is_finite()) {
                    return bad(format!("duration must be positive, got {duration}"));
                }
                if ![center, time, strength].iter().all(|v| v.is_finite()) {
                    return bad("kick parameters must be finite".into());
                }
            }
            PotentialSpec::Grid {
                x,
                values,
                t_start,
                t_end,
            } => {
                if x.len() != values.len() || x.len() < 2 {
                    return bad("grid needs at least two matching x and V samples".into());
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("grid x samples must be strictly increasing".into());
                }
                if x.iter().chain(values).any(|v| !v.is_finite()) {
                    return bad("grid samples must be finite".into());
                }
                if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
                    return bad("grid window must have t_end > t_start".into());
                }
            }
        }
        Ok(())
    }

    /// `(start, end)` of the active window.
    pub fn window(&self) -> (f64, f64) {
        match self {
            PotentialSpec::LocalizedKick { time, duration, .. } => (time - 0.5 * duration, time + 0.5 * duration),
            PotentialSpec::Grid { t_start, t_end, .. } => (*t_start, *t_end),
        }
    }

    /// Spatial profile during the window.
    pub fn profile(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::LocalizedKick {
                center,
                strength,
                width,
                ..
            } => strength * (-(x - center).powi(2) / (2.0 * width * width)).exp(),
            PotentialSpec::Grid { x: xs, values, .. } => {
                if x < xs[0] || x > xs[xs.len() - 1] {
                    return 0.0;
                }
                let j = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[j - 1], xs[j]);
                let s = (x - x0) / (x1 - x0);
                values[j - 1] * (1.0 - s) + values[j] * s
            }
        }
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        let (start, end) = self.window();
        if t < start || t > end {
            0.0
        } else {
            self.profile(x)
        }
    }

    /// Same potential with the strength multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            PotentialSpec::LocalizedKick { strength, .. } => *strength *= factor,
            PotentialSpec::Grid { values, .. } => values.iter_mut().for_each(|v| *v *= factor),
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::LocalizedKick { strength, .. } => *strength == 0.0,
            PotentialSpec::Grid { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }
}

fn kernel_complex(dx: Complex, dt: f64) -> Complex {
    let prefactor = Complex::new(0.0, 2.0 * PI * dt).inv().sqrt();
    prefactor * (Complex::new(0.0, 1.0) * dx * dx / (2.0 * dt)).exp()
}

/// Free-particle kernel `K(b, a)`.
pub fn free_propagator(a: SpacetimePoint, b: SpacetimePoint) -> Result<Complex, PropagatorError> {
    let dt = b.t - a.t;
    if !(dt > 0.0) {
        return Err(PropagatorError::NonPositiveTime(dt));
    }
    Ok(kernel_complex(Complex::new(b.x - a.x, 0.0), dt))
}

pub fn kernel_value(a: SpacetimePoint, b: SpacetimePoint) -> Result<KernelValue, PropagatorError> {
    Ok(KernelValue {
        value: free_propagator(a, b)?,
        from: a,
        to: b,
    })
}

/// `K(b, c_n) (-i V_n) ... (-i V_1) K(c_1, a)` for point scatterings at the
/// given events.
pub fn scattering_chain(
    a: SpacetimePoint,
    events: &[(SpacetimePoint, f64)],
    b: SpacetimePoint,
) -> Result<Complex, PropagatorError> {
    let mut times = vec![a.t];
    times.extend(events.iter().map(|(p, _)| p.t));
    times.push(b.t);
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(PropagatorError::UnorderedEvents(format!("{times:?}")));
    }
    let mut amp = Complex::new(1.0, 0.0);
    let mut prev = a;
    for &(point, strength) in events {
        amp *= free_propagator(prev, point)? * Complex::new(0.0, -strength);
        prev = point;
    }
    Ok(amp * free_propagator(prev, b)?)
}

/// `integral K(b, c) K(c, a) dx_c` at intermediate time `t_c`, by composite
/// Gauss-Legendre quadrature along the line through the stationary point
/// rotated by `e^{i pi/4}`, where the integrand decays like a Gaussian.
pub fn compose_by_quadrature(a: SpacetimePoint, b: SpacetimePoint, t_c: f64) -> Result<Complex, PropagatorError> {
    let (d1, d2) = (t_c - a.t, b.t - t_c);
    if !(d1 > 0.0) {
        return Err(PropagatorError::NonPositiveTime(d1));
    }
    if !(d2 > 0.0) {
        return Err(PropagatorError::NonPositiveTime(d2));
    }
    let kappa = 0.5 / d1 + 0.5 / d2;
    let stationary = (a.x / d1 + b.x / d2) / (2.0 * kappa);
    let rot = Complex::from_polar(1.0, FRAC_PI_4);
    let half = (48.0 / kappa).sqrt();
    let v = composite_gauss_legendre(
        |s| {
            let z = stationary + rot * s;
            kernel_complex(b.x - z, d2) * kernel_complex(z - a.x, d1)
        },
        -half,
        half,
        64,
        20,
    );
    Ok(v * rot)
}

/// Free kernel from `n` slices of the discretised path integral, each
/// intermediate position integrated exactly.
pub fn time_sliced_propagator(
    a: SpacetimePoint,
    b: SpacetimePoint,
    n: usize,
    potential: Option<&PotentialSpec>,
) -> Result<Complex, PropagatorError> {
    if potential.is_some_and(|v| !v.is_zero()) {
        return Err(PropagatorError::PotentialNotSupported);
    }
    if n < 2 {
        return Err(PropagatorError::InvalidParameter(format!(
            "need at least 2 slices, got {n}"
        )));
    }
    let dt = b.t - a.t;
    if !(dt > 0.0) {
        return Err(PropagatorError::NonPositiveTime(dt));
    }
    let step = dt / n as f64;
    let mut form = GaussianForm::kernel(a.x, step);
    for _ in 1..n {
        form = form.free_evolve(step)?;
    }
    Ok(form.eval(b.x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, t: f64) -> SpacetimePoint {
        SpacetimePoint::new(x, t)
    }

    #[test]
    fn kernel_at_zero_offset() {
        let k = free_propagator(p(0.3, 1.0), p(0.3, 2.0)).unwrap();
        assert!((k.norm() - (2.0 * PI).sqrt().recip()).abs() < 1e-15);
        assert!(matches!(
            free_propagator(p(0.0, 1.0), p(0.0, 1.0)),
            Err(PropagatorError::NonPositiveTime(_))
        ));
    }

    #[test]
    fn semigroup() {
        let (a, b) = (p(-0.7, 0.0), p(1.1, 2.0));
        let direct = free_propagator(a, b).unwrap();
        for tc in [0.3, 1.0, 1.9] {
            assert!(
                (compose_by_quadrature(a, b, tc).unwrap() - direct).norm() < 1e-12,
                "tc={tc}"
            );
        }
    }

    #[test]
    fn chains() {
        let (a, b) = (p(0.0, 0.0), p(1.0, 3.0));
        assert_eq!(scattering_chain(a, &[], b).unwrap(), free_propagator(a, b).unwrap());
        let c = p(0.4, 1.0);
        let one = scattering_chain(a, &[(c, 0.2)], b).unwrap();
        let want = Complex::new(0.0, -0.2) * free_propagator(c, b).unwrap() * free_propagator(a, c).unwrap();
        assert!((one - want).norm() < 1e-15);
        let evs = [(p(0.1, 0.5), 0.3), (p(0.2, 1.5), -0.1), (p(0.9, 2.5), 0.7)];
        let three = scattering_chain(a, &evs, b).unwrap();
        let mut want = Complex::new(0.0, -1.0).powu(3) * 0.3 * -0.1 * 0.7;
        let pts = [a, evs[0].0, evs[1].0, evs[2].0, b];
        for w in pts.windows(2) {
            want *= free_propagator(w[0], w[1]).unwrap();
        }
        assert!((three - want).norm() < 1e-15);
        let swapped = [evs[1], evs[0]];
        assert!(matches!(
            scattering_chain(a, &swapped, b),
            Err(PropagatorError::UnorderedEvents(_))
        ));
        assert!(scattering_chain(a, &[(p(0.0, 3.0), 1.0)], b).is_err());
    }

    #[test]
    fn slicing_is_exact_for_free_particle() {
        let (a, b) = (p(0.2, 0.0), p(-1.3, 1.7));
        let k = free_propagator(a, b).unwrap();
        for n in [2, 3, 8, 32] {
            let v = time_sliced_propagator(a, b, n, None).unwrap();
            assert!((v - k).norm() < 1e-10 * k.norm(), "n={n}");
        }
        assert!(time_sliced_propagator(a, b, 1, None).is_err());
        let kick = PotentialSpec::LocalizedKick {
            center: 0.0,
            time: 1.0,
            strength: 0.1,
            width: 0.5,
            duration: 0.2,
        };
        assert_eq!(
            time_sliced_propagator(a, b, 4, Some(&kick)),
            Err(PropagatorError::PotentialNotSupported)
        );
    }

    #[test]
    fn grid_potential_interpolates() {
        let v = PotentialSpec::Grid {
            x: vec![0.0, 1.0, 3.0],
            values: vec![0.0, 2.0, 0.0],
            t_start: 0.0,
            t_end: 1.0,
        };
        v.validate().unwrap();
        assert_eq!(v.value(0.5, 0.5), 1.0);
        assert_eq!(v.value(2.0, 0.5), 1.0);
        assert_eq!(v.value(3.0, 0.5), 0.0);
        assert_eq!(v.value(-1.0, 0.5), 0.0);
        assert_eq!(v.value(0.5, 1.5), 0.0);
    }
}
