use std::f64::consts::PI;
use std::fmt::Write as _;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{GaussianPacket, PotentialSpec, PropagatorError};
use crate::numeric::fmt17;
use crate::Complex;

/// Periodic grid for the split-step solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleGrid {
    pub points: usize,
    pub length: f64,
    pub center: f64,
    /// Largest time step inside the potential window.
    pub max_step: f64,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self {
            points: 4096,
            length: 80.0,
            center: 0.0,
            max_step: 1e-3,
        }
    }
}

impl OracleGrid {
    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn x_min(&self) -> f64 {
        self.center - 0.5 * self.length
    }

    fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * m / self.length
            })
            .collect()
    }
}

/// Wavefunction samples `psi(x_min + j dx)` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridWavefunction {
    pub x_min: f64,
    pub dx: f64,
    pub t: f64,
    pub psi: Vec<Complex>,
    /// Split-step steps taken inside the potential window.
    pub steps: usize,
}

impl GridWavefunction {
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx
    }

    /// Trigonometric interpolation of the samples at an arbitrary `x`.
    pub fn value_at(&self, x: f64) -> Complex {
        let n = self.psi.len();
        let mut coeffs = self.psi.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut coeffs);
        let length = self.dx * n as f64;
        let s = x - self.x_min;
        let mut sum = Complex::new(0.0, 0.0);
        for (j, c) in coeffs.iter().enumerate() {
            let m = if j < n / 2 {
                j as f64
            } else if j == n / 2 {
                // Split the Nyquist term evenly between +k and -k.
                let k = 2.0 * PI * j as f64 / length;
                sum += c * (k * s).cos();
                continue;
            } else {
                j as f64 - n as f64
            };
            sum += c * Complex::from_polar(1.0, 2.0 * PI * m * s / length);
        }
        sum / n as f64
    }

    /// `x,re,im`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re,im\n");
        for (j, z) in self.psi.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", fmt17(self.x(j)), fmt17(z.re), fmt17(z.im));
        }
        out
    }
}

struct Stepper {
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    ifft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    k2: Vec<f64>,
}

impl Stepper {
    fn kinetic(&self, psi: &mut [Complex], h: f64) {
        self.fft.process(psi);
        let n = psi.len() as f64;
        for (z, k2) in psi.iter_mut().zip(&self.k2) {
            *z *= Complex::from_polar(1.0 / n, -0.5 * k2 * h);
        }
        self.ifft.process(psi);
    }
}

/// Split-step Fourier evolution of a Gaussian packet to `t_final`.
///
/// Intervals without potential use one exact kinetic step; the potential
/// window uses Strang steps no longer than `grid.max_step`.
pub fn schrodinger_oracle(
    initial: &GaussianPacket,
    v: Option<&PotentialSpec>,
    t_final: f64,
    grid: &OracleGrid,
) -> Result<GridWavefunction, PropagatorError> {
    initial.validate()?;
    if grid.points < 16 || !(grid.length > 0.0) || !(grid.max_step > 0.0) {
        return Err(PropagatorError::GridResolution(
            "need at least 16 points, positive length and positive step".into(),
        ));
    }
    if t_final < initial.t0 {
        return Err(PropagatorError::NonPositiveTime(t_final - initial.t0));
    }
    let dx = grid.dx();
    if dx > initial.sigma / 16.0 {
        return Err(PropagatorError::GridResolution(format!(
            "spacing {dx} exceeds sigma/16 = {}",
            initial.sigma / 16.0
        )));
    }
    let k_needed = initial.k0.abs() + 8.0 / (2.0 * initial.sigma);
    if PI / dx < k_needed {
        return Err(PropagatorError::GridResolution(format!(
            "momentum cutoff {} below {k_needed}",
            PI / dx
        )));
    }
    for t in [initial.t0, t_final] {
        let centre = initial.x0 + initial.k0 * (t - initial.t0);
        if (centre - grid.center).abs() + 8.0 * initial.width_at(t) > 0.5 * grid.length {
            return Err(PropagatorError::GridResolution(format!(
                "packet at t = {t} is within 8 widths of the box edge"
            )));
        }
    }
    if let Some(v) = v {
        v.validate()?;
    }

    let mut planner = FftPlanner::new();
    let stepper = Stepper {
        fft: planner.plan_fft_forward(grid.points),
        ifft: planner.plan_fft_inverse(grid.points),
        k2: grid.wavenumbers().iter().map(|k| k * k).collect(),
    };
    let form = initial.initial_form();
    let mut psi: Vec<Complex> = (0..grid.points)
        .map(|j| form.eval(grid.x_min() + j as f64 * dx))
        .collect();

    let mut now = initial.t0;
    let mut steps = 0;
    if let Some(v) = v.filter(|v| !v.is_zero()) {
        let (start, end) = v.window();
        let (start, end) = (start.max(initial.t0), end.min(t_final));
        if end > start {
            if start > now {
                stepper.kinetic(&mut psi, start - now);
            }
            let n = ((end - start) / grid.max_step).ceil().max(1.0) as usize;
            let h = (end - start) / n as f64;
            let half_kick: Vec<Complex> = (0..grid.points)
                .map(|j| Complex::from_polar(1.0, -0.5 * h * v.profile(grid.x_min() + j as f64 * dx)))
                .collect();
            for _ in 0..n {
                psi.iter_mut().zip(&half_kick).for_each(|(z, p)| *z *= p);
                stepper.kinetic(&mut psi, h);
                psi.iter_mut().zip(&half_kick).for_each(|(z, p)| *z *= p);
            }
            steps = n;
            now = end;
        }
    }
    if t_final > now {
        stepper.kinetic(&mut psi, t_final - now);
    }
    Ok(GridWavefunction {
        x_min: grid.x_min(),
        dx,
        t: t_final,
        psi,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn packet() -> GaussianPacket {
        GaussianPacket {
            x0: -2.0,
            k0: 1.0,
            sigma: 1.0,
            t0: 0.0,
        }
    }

    #[test]
    fn free_evolution_matches_closed_form() {
        let p = packet();
        let wf = schrodinger_oracle(&p, None, 4.0, &OracleGrid::default()).unwrap();
        let worst = (0..wf.psi.len())
            .map(|j| (wf.psi[j] - p.analytic(wf.x(j), 4.0)).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        assert!((wf.value_at(2.0 + 0.3 * wf.dx) - p.analytic(2.0 + 0.3 * wf.dx, 4.0)).norm() < 1e-8);
    }

    #[test]
    fn unitary_over_many_steps() {
        let v = PotentialSpec::LocalizedKick {
            center: 0.0,
            time: 1.0,
            strength: 0.5,
            width: 0.5,
            duration: 1.0,
        };
        let wf = schrodinger_oracle(&packet(), Some(&v), 2.0, &OracleGrid::default()).unwrap();
        assert_eq!(wf.steps, 1000);
        assert!((wf.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn resolution_checks() {
        let coarse = OracleGrid {
            points: 256,
            ..OracleGrid::default()
        };
        assert!(matches!(
            schrodinger_oracle(&packet(), None, 1.0, &coarse),
            Err(PropagatorError::GridResolution(_))
        ));
        let small = OracleGrid {
            length: 10.0,
            points: 1024,
            ..OracleGrid::default()
        };
        assert!(matches!(
            schrodinger_oracle(&packet(), None, 4.0, &small),
            Err(PropagatorError::GridResolution(_))
        ));
    }
}
