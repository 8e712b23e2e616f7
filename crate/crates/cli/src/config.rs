//! TOML run configuration. Every field is optional; command-line flags
//! override the file, and built-in defaults fill the rest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use weaktrace::interferometer::{parse_layout, NestedMzi};
use weaktrace::spectrum::{MirrorOscillation, OscillationConfig, SignalMode};
use weaktrace::{InterferometerGraph, Mirror};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Layout file; relative paths resolve against the config file.
    pub layout: Option<PathBuf>,
    pub detector: Option<String>,
    #[serde(default)]
    pub nested: NestedSection,
    #[serde(default)]
    pub expand: ExpandSection,
    #[serde(default)]
    pub pointer: PointerSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub propagator: PropagatorSection,
}

/// Parameters of the built-in nested interferometer, used when no layout
/// file is given.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NestedSection {
    pub inner_phase: Option<f64>,
    pub outer_split: Option<f64>,
    pub inner_split: Option<f64>,
    pub outer_phase: Option<f64>,
    pub all_ports: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Amplitudes {
    Unit,
    Physical,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandSection {
    pub order: Option<u32>,
    pub amplitudes: Option<Amplitudes>,
    pub normalize: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointerSection {
    pub g: Option<Vec<f64>>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub delta: Option<f64>,
    pub sample_rate: Option<f64>,
    pub duration: Option<f64>,
    pub sigma: Option<f64>,
    pub mode: Option<SignalMode>,
    /// Hz per mirror symbol; mirrors left out do not oscillate.
    pub frequencies: Option<BTreeMap<Mirror, f64>>,
    pub scaling_deltas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorSection {
    pub semigroup_tol: Option<f64>,
    pub born_rel_tol: Option<f64>,
    pub born_slope: Option<f64>,
    pub born_slope_tol: Option<f64>,
    pub slices: Option<Vec<usize>>,
    pub strengths: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some(layout) = cfg.layout.take() {
            let base = path.parent().unwrap_or(Path::new(""));
            cfg.layout = Some(if layout.is_relative() {
                base.join(layout)
            } else {
                layout
            });
        }
        Ok(cfg)
    }

    pub fn detector(&self) -> &str {
        self.detector.as_deref().unwrap_or("D")
    }

    pub fn graph(&self) -> Result<InterferometerGraph, CliError> {
        match &self.layout {
            Some(path) => {
                if self.nested.inner_phase.is_some() {
                    return Err(CliError::Config(
                        "inner phase applies to the built-in interferometer, not to a layout file".into(),
                    ));
                }
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read layout {}: {e}", path.display())))?;
                parse_layout(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            }
            None => {
                let d = NestedMzi::default();
                let n = &self.nested;
                let setting = NestedMzi {
                    inner_phase: n.inner_phase.unwrap_or(d.inner_phase),
                    outer_split: n.outer_split.unwrap_or(d.outer_split),
                    inner_split: n.inner_split.unwrap_or(d.inner_split),
                    outer_phase: n.outer_phase.unwrap_or(d.outer_phase),
                    all_ports: n.all_ports.unwrap_or(d.all_ports),
                };
                for (name, t) in [
                    ("outer_split", setting.outer_split),
                    ("inner_split", setting.inner_split),
                ] {
                    if !(0.0..=1.0).contains(&t) {
                        return Err(CliError::Config(format!("{name} must lie in [0, 1], got {t}")));
                    }
                }
                Ok(setting.build())
            }
        }
    }

    pub fn oscillation(&self) -> OscillationConfig {
        let s = &self.spectrum;
        let mut cfg = OscillationConfig::with_delta(s.delta.unwrap_or(0.05));
        if let Some(freqs) = &s.frequencies {
            let delta = s.delta.unwrap_or(0.05);
            cfg.mirrors = freqs
                .iter()
                .map(|(&m, &frequency)| (m, MirrorOscillation { frequency, delta }))
                .collect();
        }
        cfg.sample_rate = s.sample_rate.unwrap_or(cfg.sample_rate);
        cfg.duration = s.duration.unwrap_or(cfg.duration);
        cfg.sigma = s.sigma.unwrap_or(cfg.sigma);
        cfg.mode = s.mode.unwrap_or(cfg.mode);
        cfg.detector = self.detector().to_string();
        cfg
    }
}
