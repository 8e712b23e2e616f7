mod commands;
mod config;
mod error;
mod propcheck;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Amplitudes, RunConfig};
use error::CliError;
use weaktrace::spectrum::SignalMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "weaktrace",
    version,
    about = "Weak-value experiments on nested interferometers"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Layout file; defaults to the built-in nested interferometer.
    #[arg(long, global = true)]
    layout: Option<PathBuf>,
    #[arg(long, global = true)]
    detector: Option<String>,
    /// Static phase on mirror B of the built-in interferometer (pi is dark).
    #[arg(long, global = true, allow_hyphen_values = true)]
    inner_phase: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List every source-to-detector path.
    Paths,
    /// Print the truncated interaction expansion at the detector.
    Expand {
        #[arg(long)]
        order: Option<u32>,
        #[arg(long, value_enum)]
        amplitudes: Option<Amplitudes>,
        /// Divide by the constant term.
        #[arg(long)]
        normalize: bool,
        /// One line per order (text format only).
        #[arg(long)]
        by_order: bool,
    },
    /// Per-mirror and cumulative weak values at the detector.
    Weakvalues,
    /// Exact pointer means against the first-order law.
    PointerShift {
        /// Coupling strength; repeat for several.
        #[arg(long = "g")]
        g: Vec<f64>,
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Centroid spectrum of the oscillating-mirror signal.
    Spectrum {
        #[arg(long)]
        delta: Option<f64>,
        /// Use the exact post-selected centroid instead of the linear one.
        #[arg(long)]
        exact: bool,
        /// Report log-log slopes of peak power against delta.
        #[arg(long)]
        scaling: bool,
        /// Also write the sampled centroid as CSV.
        #[arg(long)]
        signal_out: Option<PathBuf>,
    },
    /// Semigroup, time-slicing and Born-series checks.
    PropagatorCheck {
        #[arg(long)]
        semigroup_tol: Option<f64>,
        #[arg(long)]
        born_tol: Option<f64>,
        /// Write the split-step oracle wavefunction as CSV.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = cli.global;
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if g.layout.is_some() {
        cfg.layout = g.layout.clone();
    }
    if g.detector.is_some() {
        cfg.detector = g.detector.clone();
    }
    if g.inner_phase.is_some() {
        cfg.nested.inner_phase = g.inner_phase;
    }
    let graph = cfg.graph()?;
    let detector = cfg.detector().to_string();
    let out = g.out.as_deref();

    match cli.command {
        Command::Paths => emit(out, &commands::paths(&graph, g.format)?),
        Command::Expand {
            order,
            amplitudes,
            normalize,
            by_order,
        } => {
            let opts = commands::ExpandOptions {
                order: order.or(cfg.expand.order).unwrap_or(weaktrace::epsilon::DEFAULT_ORDER),
                amplitudes: amplitudes.or(cfg.expand.amplitudes).unwrap_or(Amplitudes::Physical),
                normalize: normalize || cfg.expand.normalize.unwrap_or(false),
                by_order,
            };
            emit(out, &commands::expand(&graph, &detector, &opts, g.format)?)
        }
        Command::Weakvalues => emit(out, &commands::weakvalues(&graph, &detector, g.format)?),
        Command::PointerShift { g: couplings, sigma } => {
            let couplings = if couplings.is_empty() {
                cfg.pointer.g.clone().unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4])
            } else {
                couplings
            };
            let sigma = sigma.or(cfg.pointer.sigma).unwrap_or(1.0);
            emit(
                out,
                &commands::pointer_shift(&graph, &detector, &couplings, sigma, g.format)?,
            )
        }
        Command::Spectrum {
            delta,
            exact,
            scaling,
            signal_out,
        } => {
            if delta.is_some() {
                cfg.spectrum.delta = delta;
            }
            if exact {
                cfg.spectrum.mode = Some(SignalMode::Exact);
            }
            if scaling {
                return emit(out, &commands::scaling(&graph, &cfg, g.format)?);
            }
            let result = commands::spectrum(&graph, &cfg, g.format)?;
            if let Some(path) = signal_out {
                write_file(&path, &result.signal_csv)?;
            }
            emit(out, &result.report)
        }
        Command::PropagatorCheck {
            semigroup_tol,
            born_tol,
            export,
        } => {
            let mut settings = propcheck::Settings::from_section(&cfg.propagator);
            settings.semigroup_tol = semigroup_tol.unwrap_or(settings.semigroup_tol);
            settings.born_rel_tol = born_tol.unwrap_or(settings.born_rel_tol);
            let (lines, wavefunction) = propcheck::run(&settings)?;
            if let Some(path) = export {
                write_file(&path, &wavefunction.to_csv())?;
            }
            let report = match g.format {
                Format::Text => propcheck::to_text(&lines),
                Format::Csv => propcheck::to_csv(&lines),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&lines).expect("report serializes");
                    s.push('\n');
                    s
                }
            };
            emit(out, &report)?;
            match lines.iter().filter(|l| !l.pass).count() {
                0 => Ok(()),
                n => Err(CliError::CheckFailed(n)),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
