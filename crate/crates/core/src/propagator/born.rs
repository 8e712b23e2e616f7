use super::{GaussianForm, GaussianPacket, PotentialSpec, PropagatorError, SpacetimePoint};
use crate::numeric::integrate_adaptive;
use crate::Complex;

const TIME_REL_TOL: f64 = 1e-10;
const TIME_ABS_TOL: f64 = 1e-15;
const SPACE_REL_TOL: f64 = 1e-11;
const SPACE_ABS_TOL: f64 = 1e-16;
const MAX_INTERVALS: usize = 2000;

/// First-order Born term between two spacetime points,
/// `-i integral dt integral dx K(b; x, t) V(x, t) K(x, t; a)`.
pub fn born_first_order(a: SpacetimePoint, b: SpacetimePoint, v: &PotentialSpec) -> Result<Complex, PropagatorError> {
    born_with(|t| Ok(GaussianForm::kernel(a.x, t - a.t)), a.t, b, v)
}

/// First-order Born correction to a freely moving packet, evaluated at `b`.
pub fn born_first_order_packet(
    packet: &GaussianPacket,
    b: SpacetimePoint,
    v: &PotentialSpec,
) -> Result<Complex, PropagatorError> {
    packet.validate()?;
    born_with(|t| packet.form_at(t), packet.t0, b, v)
}

fn born_with<F>(incoming: F, t_a: f64, b: SpacetimePoint, v: &PotentialSpec) -> Result<Complex, PropagatorError>
where
    F: Fn(f64) -> Result<GaussianForm, PropagatorError>,
{
    v.validate()?;
    let (start, end) = v.window();
    if !(start > t_a && end < b.t) {
        return Err(PropagatorError::WindowOutsideInterval {
            start,
            end,
            t_a,
            t_b: b.t,
        });
    }
    if v.is_zero() {
        return Ok(Complex::new(0.0, 0.0));
    }
    let mut failure = None;
    let total = integrate_adaptive(
        |t| match spatial_integral(&incoming, t, b, v) {
            Ok(z) => z,
            Err(e) => {
                failure.get_or_insert(e);
                Complex::new(0.0, 0.0)
            }
        },
        start,
        end,
        TIME_ABS_TOL,
        TIME_REL_TOL,
        MAX_INTERVALS,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Complex::new(0.0, -1.0) * total)
}

fn spatial_integral<F>(incoming: &F, t: f64, b: SpacetimePoint, v: &PotentialSpec) -> Result<Complex, PropagatorError>
where
    F: Fn(f64) -> Result<GaussianForm, PropagatorError>,
{
    let carrier = GaussianForm::kernel(b.x, b.t - t).mul(&incoming(t)?);
    match v {
        PotentialSpec::LocalizedKick {
            center,
            strength,
            width,
            ..
        } => {
            let w2 = width * width;
            let profile = GaussianForm::new(
                Complex::new(-0.5 / w2, 0.0),
                Complex::new(center / w2, 0.0),
                Complex::new(-center * center / (2.0 * w2), 0.0),
            );
            Ok(carrier.mul(&profile).integral()? * *strength)
        }
        PotentialSpec::Grid { x, .. } => {
            let mut sum = Complex::new(0.0, 0.0);
            for seg in x.windows(2) {
                sum += integrate_adaptive(
                    |xi| carrier.eval(xi) * v.profile(xi),
                    seg[0],
                    seg[1],
                    SPACE_ABS_TOL,
                    SPACE_REL_TOL,
                    MAX_INTERVALS,
                )?;
            }
            Ok(sum)
        }
    }
}
