use serde::{Deserialize, Serialize};

use super::PropagatorError;
use crate::Complex;

fn i() -> Complex {
    Complex::new(0.0, 1.0)
}

/// `exp(a x^2 + b x + c)` with complex coefficients.
///
/// Free kernels, Gaussian packets and Gaussian potentials are all of this
/// form, so products stay in it and integrals over the real line are closed
/// form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianForm {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
}

impl GaussianForm {
    pub fn new(a: Complex, b: Complex, c: Complex) -> Self {
        Self { a, b, c }
    }

    /// Free kernel `K(x, t + dt; x0, t)` as a form in `x` (also a form in
    /// the other endpoint, since it depends only on `x - x0`).
    pub fn kernel(x0: f64, dt: f64) -> Self {
        let prefactor = (Complex::new(0.0, 2.0 * std::f64::consts::PI * dt)).inv().sqrt();
        Self {
            a: i() / (2.0 * dt),
            b: -i() * x0 / dt,
            c: i() * x0 * x0 / (2.0 * dt) + prefactor.ln(),
        }
    }

    pub fn eval(&self, x: f64) -> Complex {
        (self.a * x * x + self.b * x + self.c).exp()
    }

    pub fn eval_complex(&self, z: Complex) -> Complex {
        (self.a * z * z + self.b * z + self.c).exp()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            a: self.a + other.a,
            b: self.b + other.b,
            c: self.c + other.c,
        }
    }

    /// Multiplies by `exp(log_factor)`.
    pub fn scale_log(&self, log_factor: Complex) -> Self {
        Self {
            c: self.c + log_factor,
            ..*self
        }
    }

    fn check_integrable(a: Complex, b: Complex) -> Result<(), PropagatorError> {
        let absolutely = a.re < 0.0;
        let fresnel = a.re == 0.0 && a.im != 0.0 && b.re == 0.0;
        if absolutely || fresnel {
            Ok(())
        } else {
            Err(PropagatorError::NotIntegrable(format!(
                "exp({a} x^2 + {b} x) does not converge on the real line"
            )))
        }
    }

    /// `sqrt(pi / -a) exp(c - b^2 / 4a)`, the integral over the real line.
    /// Purely imaginary `a` is accepted as a Fresnel integral.
    pub fn integral(&self) -> Result<Complex, PropagatorError> {
        Self::check_integrable(self.a, self.b)?;
        Ok((Complex::new(std::f64::consts::PI, 0.0) / -self.a).sqrt()
            * (self.c - self.b * self.b / (4.0 * self.a)).exp())
    }

    /// Free evolution over `dt`: `x -> integral K(x, t + dt; y, t) f(y) dy`.
    pub fn free_evolve(&self, dt: f64) -> Result<Self, PropagatorError> {
        if !(dt > 0.0) {
            return Err(PropagatorError::NonPositiveTime(dt));
        }
        let big_a = self.a + i() / (2.0 * dt);
        Self::check_integrable(big_a, self.b)?;
        let prefactor = (Complex::new(0.0, 2.0 * std::f64::consts::PI * dt)).inv().sqrt();
        let log_root = 0.5 * (Complex::new(std::f64::consts::PI, 0.0) / -big_a).ln();
        Ok(Self {
            a: i() / (2.0 * dt) + 1.0 / (4.0 * big_a * dt * dt),
            b: i() * self.b / (2.0 * big_a * dt),
            c: self.c - self.b * self.b / (4.0 * big_a) + prefactor.ln() + log_root,
        })
    }
}

/// Normalised Gaussian wave packet
/// `psi(x, t0) = (2 pi sigma^2)^(-1/4) exp(-(x - x0)^2 / (4 sigma^2) + i k0 x)`,
/// where `sigma` is the position spread of `|psi|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub x0: f64,
    pub k0: f64,
    pub sigma: f64,
    pub t0: f64,
}

impl GaussianPacket {
    pub fn validate(&self) -> Result<(), PropagatorError> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(PropagatorError::InvalidParameter(format!(
                "packet width must be positive, got {}",
                self.sigma
            )));
        }
        if ![self.x0, self.k0, self.t0].iter().all(|v| v.is_finite()) {
            return Err(PropagatorError::InvalidParameter(
                "packet parameters must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn initial_form(&self) -> GaussianForm {
        let s2 = self.sigma * self.sigma;
        let norm = (2.0 * std::f64::consts::PI * s2).powf(-0.25);
        GaussianForm {
            a: Complex::new(-1.0 / (4.0 * s2), 0.0),
            b: Complex::new(self.x0 / (2.0 * s2), self.k0),
            c: Complex::new(-self.x0 * self.x0 / (4.0 * s2) + norm.ln(), 0.0),
        }
    }

    /// Freely evolved packet at time `t >= t0`, as a form in `x`.
    pub fn form_at(&self, t: f64) -> Result<GaussianForm, PropagatorError> {
        let dt = t - self.t0;
        if dt == 0.0 {
            Ok(self.initial_form())
        } else {
            self.initial_form().free_evolve(dt)
        }
    }

    /// Position spread of `|psi|^2` after free evolution to `t`.
    pub fn width_at(&self, t: f64) -> f64 {
        let tau = (t - self.t0) / (2.0 * self.sigma * self.sigma);
        self.sigma * (1.0 + tau * tau).sqrt()
    }

    /// Closed-form free packet, written in the textbook spreading-Gaussian
    /// form rather than through [`GaussianForm::free_evolve`].
    pub fn analytic(&self, x: f64, t: f64) -> Complex {
        let s2 = self.sigma * self.sigma;
        let dt = t - self.t0;
        let z = Complex::new(1.0, dt / (2.0 * s2));
        let norm = (2.0 * std::f64::consts::PI * s2).powf(-0.25);
        let shifted = x - self.x0 - self.k0 * dt;
        let phase = Complex::new(
            0.0,
            self.k0 * (x - self.x0) - 0.5 * self.k0 * self.k0 * dt + self.k0 * self.x0,
        );
        norm / z.sqrt() * (-(shifted * shifted) / (4.0 * s2 * z) + phase).exp()
    }
}
