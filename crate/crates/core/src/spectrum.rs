//! Oscillating-mirror centroid signals and their power spectra.
//!
//! Mirror `n` oscillates as `g_n(t) = delta_n sin(2 pi f_n t)`. The detector
//! records the post-selected centroid of one transverse pointer shared by all
//! mirrors; a path `k` displaces it by `S_k(t) = sum_{n on k} g_n(t)`.
//! First-order mode uses `sum_n g_n(t) Re(P_n)_w`; exact mode evaluates the
//! Gaussian overlap moments of the shared pointer at every sample.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interferometer::{enumerate_paths_to, path_amplitude, InterferometerGraph, Mirror};
use crate::numeric::{fmt17, loglog_slope};
use crate::pointer::{gaussian_moments, ZERO_NORM_TOL};
use crate::tsvf::{weak_values, TsvfError};
use crate::Complex;

/// Default mirror frequencies in Hz. With the default record (1024 Hz for
/// 4 s) each sits on an exact bin, and no small integer combination of them
/// up to fifth order lands within one bin of another mirror's frequency.
pub const DEFAULT_FREQUENCIES: [(Mirror, f64); 5] = [
    (Mirror::A, 21.5),
    (Mirror::B, 29.25),
    (Mirror::C, 35.75),
    (Mirror::E, 38.0),
    (Mirror::F, 38.5),
];

/// Minimum number of oscillation periods each mirror must complete.
pub const MIN_CYCLES: f64 = 8.0;

/// Largest fraction of exact-mode samples that may be skipped for a
/// vanishing post-selection weight.
pub const MAX_SKIPPED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("mirror {mirror} at {frequency} Hz violates Nyquist for sample rate {sample_rate} Hz")]
    Nyquist {
        mirror: Mirror,
        frequency: f64,
        sample_rate: f64,
    },
    #[error("mirror {mirror} completes only {cycles} cycles (need at least {MIN_CYCLES})")]
    TooFewCycles { mirror: Mirror, cycles: f64 },
    #[error("mirrors {0} and {1} share a frequency")]
    DuplicateFrequency(Mirror, Mirror),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("signal is empty")]
    EmptySignal,
    #[error("signal has {0} samples; at least 16 are needed")]
    SignalTooShort(usize),
    #[error("post-selection weight vanished at {skipped} of {total} samples")]
    DarkPortZeroNorm { skipped: usize, total: usize },
    #[error("no path reaches `{0}`")]
    NoPath(String),
    #[error(transparent)]
    Tsvf(#[from] TsvfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalMode {
    #[default]
    FirstOrder,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorOscillation {
    /// Hz.
    pub frequency: f64,
    /// Tilt amplitude, in pointer units.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationConfig {
    pub mirrors: BTreeMap<Mirror, MirrorOscillation>,
    /// Hz.
    pub sample_rate: f64,
    /// Seconds.
    pub duration: f64,
    /// Width of the shared pointer.
    pub sigma: f64,
    pub mode: SignalMode,
    pub detector: String,
}

impl Default for OscillationConfig {
    fn default() -> Self {
        Self::with_delta(0.05)
    }
}

impl OscillationConfig {
    /// Default frequencies and record, the same `delta` on every mirror.
    pub fn with_delta(delta: f64) -> Self {
        Self {
            mirrors: DEFAULT_FREQUENCIES
                .iter()
                .map(|&(m, frequency)| (m, MirrorOscillation { frequency, delta }))
                .collect(),
            sample_rate: 1024.0,
            duration: 4.0,
            sigma: 1.0,
            mode: SignalMode::FirstOrder,
            detector: "D".to_string(),
        }
    }

    /// Copy with every tilt amplitude replaced by `delta`.
    pub fn scaled(&self, delta: f64) -> Self {
        let mut out = self.clone();
        for osc in out.mirrors.values_mut() {
            osc.delta = delta;
        }
        out
    }

    pub fn samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SpectrumError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("sample_rate", self.sample_rate)?;
        positive("duration", self.duration)?;
        positive("sigma", self.sigma)?;
        let n = self.samples();
        if n < 16 {
            return Err(SpectrumError::SignalTooShort(n));
        }
        for (&m, osc) in &self.mirrors {
            positive(&format!("frequency of {m}"), osc.frequency)?;
            if !(osc.delta >= 0.0 && osc.delta.is_finite()) {
                return Err(SpectrumError::InvalidParameter(format!(
                    "delta of {m} must be non-negative, got {}",
                    osc.delta
                )));
            }
            if self.sample_rate <= 2.0 * osc.frequency {
                return Err(SpectrumError::Nyquist {
                    mirror: m,
                    frequency: osc.frequency,
                    sample_rate: self.sample_rate,
                });
            }
            let cycles = self.duration * osc.frequency;
            if cycles < MIN_CYCLES {
                return Err(SpectrumError::TooFewCycles { mirror: m, cycles });
            }
        }
        let list: Vec<_> = self.mirrors.iter().collect();
        for (i, (a, oa)) in list.iter().enumerate() {
            for (b, ob) in &list[i + 1..] {
                if oa.frequency == ob.frequency {
                    return Err(SpectrumError::DuplicateFrequency(**a, **b));
                }
            }
        }
        Ok(())
    }

    fn coupling(&self, m: Mirror, t: f64) -> f64 {
        self.mirrors
            .get(&m)
            .map(|o| o.delta * (2.0 * std::f64::consts::PI * o.frequency * t).sin())
            .unwrap_or(0.0)
    }
}

/// Sampled centroid signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub sample_rate: f64,
    pub values: Vec<f64>,
    /// Exact-mode samples whose post-selection weight vanished; their value
    /// is set to 0.
    pub skipped: Vec<usize>,
}

impl Signal {
    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.sample_rate
    }

    /// `time,centroid`, optionally preceded by `# ` comment lines.
    pub fn to_csv(&self, header: Option<&str>) -> String {
        let mut out = comment_block(header);
        out.push_str("time,centroid\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{}", fmt17(self.time(i)), fmt17(*v));
        }
        out
    }
}

fn comment_block(header: Option<&str>) -> String {
    header
        .map(|h| h.lines().map(|l| format!("# {l}\n")).collect())
        .unwrap_or_default()
}

/// Centroid time series at the configured detector.
pub fn simulate_signal(graph: &InterferometerGraph, cfg: &OscillationConfig) -> Result<Signal, SpectrumError> {
    cfg.validate()?;
    let n = cfg.samples();
    let mirrors = graph.mirror_symbols();
    let mut values = Vec::with_capacity(n);
    let mut skipped = Vec::new();
    match cfg.mode {
        SignalMode::FirstOrder => {
            let wv = weak_values(graph, &cfg.detector)?;
            for i in 0..n {
                let t = i as f64 / cfg.sample_rate;
                values.push(mirrors.iter().map(|&m| cfg.coupling(m, t) * wv.per_mirror[&m].re).sum());
            }
        }
        SignalMode::Exact => {
            let paths = enumerate_paths_to(graph, &cfg.detector);
            if paths.is_empty() {
                return Err(SpectrumError::NoPath(cfg.detector.clone()));
            }
            let amps: Vec<Complex> = paths
                .iter()
                .map(|p| path_amplitude(graph, p).expect("enumerated path"))
                .collect();
            let on_path: Vec<Vec<Mirror>> = paths.iter().map(|p| p.mirrors(graph)).collect();
            for i in 0..n {
                let t = i as f64 / cfg.sample_rate;
                let shifts: Vec<f64> = on_path
                    .iter()
                    .map(|ms| ms.iter().map(|&m| cfg.coupling(m, t)).sum())
                    .collect();
                let (norm, mean) = gaussian_moments(&amps, &[shifts], &[cfg.sigma]);
                if norm.abs() < ZERO_NORM_TOL {
                    skipped.push(i);
                    values.push(0.0);
                } else {
                    values.push(mean[0] / norm);
                }
            }
            if skipped.len() as f64 > MAX_SKIPPED_FRACTION * n as f64 {
                return Err(SpectrumError::DarkPortZeroNorm {
                    skipped: skipped.len(),
                    total: n,
                });
            }
            if !skipped.is_empty() {
                log::warn!("{} samples skipped for vanishing post-selection weight", skipped.len());
            }
        }
    }
    Ok(Signal {
        sample_rate: cfg.sample_rate,
        values,
        skipped,
    })
}

/// One-sided Hann periodogram.
///
/// `power` is normalised so that its sum equals `mean_square`, the mean
/// square of the windowed, zero-padded record. Peak values are calibrated
/// separately as `|X_k|^2 / (sum w)^2`, which reads `a^2 / 4` for a
/// bin-centred sinusoid of amplitude `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub sample_rate: f64,
    pub n_samples: usize,
    pub n_fft: usize,
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub mean_square: f64,
    /// Window-calibrated power per bin, used for peak readout.
    pub calibrated: Vec<f64>,
    pub peak_power: BTreeMap<Mirror, f64>,
    /// Calibrated power at `f_E + f_F`, when both are configured.
    pub intermod_power: Option<f64>,
}

pub fn power_spectrum(signal: &[f64], sample_rate: f64) -> Result<SpectrumResult, SpectrumError> {
    if signal.is_empty() {
        return Err(SpectrumError::EmptySignal);
    }
    if signal.len() < 16 {
        return Err(SpectrumError::SignalTooShort(signal.len()));
    }
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(SpectrumError::InvalidParameter(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    let n = signal.len();
    let n_fft = n.next_power_of_two();
    let window: Vec<f64> = (0..n)
        .map(|j| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos())
        .collect();
    let window_sum: f64 = window.iter().sum();
    let mut buf: Vec<Complex> = signal
        .iter()
        .zip(&window)
        .map(|(x, w)| Complex::new(x * w, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n_fft)
        .collect();
    let mean_square = buf.iter().map(|z| z.re * z.re).sum::<f64>() / n_fft as f64;
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);

    let half = n_fft / 2;
    let scale = (n_fft as f64).powi(2);
    let mut freqs = Vec::with_capacity(half + 1);
    let mut power = Vec::with_capacity(half + 1);
    let mut calibrated = Vec::with_capacity(half + 1);
    for (k, x) in buf.iter().take(half + 1).enumerate() {
        let p = x.norm_sqr();
        let fold = if k == 0 || k == half { 1.0 } else { 2.0 };
        freqs.push(k as f64 * sample_rate / n_fft as f64);
        power.push(fold * p / scale);
        calibrated.push(p / (window_sum * window_sum));
    }
    Ok(SpectrumResult {
        sample_rate,
        n_samples: n,
        n_fft,
        freqs,
        power,
        mean_square,
        calibrated,
        peak_power: BTreeMap::new(),
        intermod_power: None,
    })
}

impl SpectrumResult {
    pub fn bin_of(&self, frequency: f64) -> usize {
        let k = (frequency * self.n_fft as f64 / self.sample_rate).round();
        (k.max(0.0) as usize).min(self.calibrated.len() - 1)
    }

    /// Calibrated power in the bin nearest `frequency`.
    pub fn power_at(&self, frequency: f64) -> f64 {
        self.calibrated[self.bin_of(frequency)]
    }

    /// Fills `peak_power` for every configured mirror and `intermod_power`
    /// for `f_E + f_F`.
    pub fn annotate(mut self, cfg: &OscillationConfig) -> Self {
        self.peak_power = cfg
            .mirrors
            .iter()
            .map(|(&m, o)| (m, self.power_at(o.frequency)))
            .collect();
        self.intermod_power = match (cfg.mirrors.get(&Mirror::E), cfg.mirrors.get(&Mirror::F)) {
            (Some(e), Some(f)) if e.frequency + f.frequency <= self.sample_rate / 2.0 => {
                Some(self.power_at(e.frequency + f.frequency))
            }
            _ => None,
        };
        self
    }

    /// `freq,power`, optionally preceded by `# ` comment lines.
    pub fn to_csv(&self, header: Option<&str>) -> String {
        let mut out = comment_block(header);
        out.push_str("freq,power\n");
        for (f, p) in self.freqs.iter().zip(&self.power) {
            let _ = writeln!(out, "{},{}", fmt17(*f), fmt17(*p));
        }
        out
    }
}

/// Signal and annotated spectrum for one configuration.
pub fn run_spectrum(
    graph: &InterferometerGraph,
    cfg: &OscillationConfig,
) -> Result<(Signal, SpectrumResult), SpectrumError> {
    let signal = simulate_signal(graph, cfg)?;
    let spectrum = power_spectrum(&signal.values, cfg.sample_rate)?.annotate(cfg);
    Ok((signal, spectrum))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub deltas: Vec<f64>,
    pub peak_power: BTreeMap<Mirror, Vec<f64>>,
    /// Log-log slope of peak power against delta; `None` when a mirror's
    /// peak vanishes.
    pub slopes: BTreeMap<Mirror, Option<f64>>,
}

/// Peak power against tilt amplitude in exact mode, with log-log slopes.
pub fn peak_scaling(
    graph: &InterferometerGraph,
    cfg: &OscillationConfig,
    deltas: &[f64],
) -> Result<ScalingResult, SpectrumError> {
    if cfg.mode != SignalMode::Exact {
        return Err(SpectrumError::InvalidParameter(
            "peak scaling runs in exact mode".into(),
        ));
    }
    if deltas.len() < 4 {
        return Err(SpectrumError::InvalidParameter(
            "need at least four delta values".into(),
        ));
    }
    if deltas.windows(2).any(|w| !(w[1] < w[0])) || !(deltas[deltas.len() - 1] > 0.0) {
        return Err(SpectrumError::InvalidParameter(
            "deltas must be positive and decreasing".into(),
        ));
    }
    if deltas[0] / deltas[deltas.len() - 1] < 10.0 {
        return Err(SpectrumError::InvalidParameter(
            "deltas must span at least a decade".into(),
        ));
    }
    let mut peak_power: BTreeMap<Mirror, Vec<f64>> = BTreeMap::new();
    for &d in deltas {
        let (_, spectrum) = run_spectrum(graph, &cfg.scaled(d))?;
        for (m, p) in spectrum.peak_power {
            peak_power.entry(m).or_default().push(p);
        }
    }
    let slopes = peak_power
        .iter()
        .map(|(&m, ps)| (m, loglog_slope(deltas, ps)))
        .collect();
    Ok(ScalingResult {
        deltas: deltas.to_vec(),
        peak_power,
        slopes,
    })
}
