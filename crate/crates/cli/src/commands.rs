use std::fmt::Write as _;

use serde_json::json;

use weaktrace::epsilon::{detector_expansion, AmplitudeMode};
use weaktrace::interferometer::{enumerate_paths, path_amplitude};
use weaktrace::numeric::fmt17;
use weaktrace::pointer::shift_vs_weakvalue;
use weaktrace::spectrum::{peak_scaling, run_spectrum, ScalingResult, SignalMode, SpectrumResult};
use weaktrace::tsvf::weak_values;
use weaktrace::{Complex, InterferometerGraph, Mirror};

use crate::config::{Amplitudes, RunConfig};
use crate::error::CliError;
use crate::Format;

fn json_string<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn complex_json(z: Complex) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn paths(graph: &InterferometerGraph, format: Format) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for p in enumerate_paths(graph) {
        let amp = path_amplitude(graph, &p)?;
        rows.push((
            p.detector().to_string(),
            p.mirror_key(graph),
            p.labels.join(" -> "),
            amp,
        ));
    }
    Ok(match format {
        Format::Text => rows
            .iter()
            .map(|(det, key, labels, _)| format!("{det} [{key}] {labels}\n"))
            .collect(),
        Format::Csv => {
            let mut out = String::from("detector,mirrors,labels,amplitude_re,amplitude_im\n");
            for (det, key, labels, amp) in &rows {
                let _ = writeln!(out, "{det},{key},{labels},{},{}", fmt17(amp.re), fmt17(amp.im));
            }
            out
        }
        Format::Json => json_string(
            &rows
                .iter()
                .map(|(det, key, labels, amp)| {
                    json!({
                        "detector": det,
                        "mirrors": key,
                        "labels": labels.split(" -> ").collect::<Vec<_>>(),
                        "amplitude": complex_json(*amp),
                    })
                })
                .collect::<Vec<_>>(),
        ),
    })
}

pub struct ExpandOptions {
    pub order: u32,
    pub amplitudes: Amplitudes,
    pub normalize: bool,
    pub by_order: bool,
}

pub fn expand(
    graph: &InterferometerGraph,
    detector: &str,
    opts: &ExpandOptions,
    format: Format,
) -> Result<String, CliError> {
    let mode = match opts.amplitudes {
        Amplitudes::Unit => AmplitudeMode::Unit,
        Amplitudes::Physical => AmplitudeMode::Physical,
    };
    if graph.element(detector).is_none() {
        return Err(CliError::Config(format!(
            "`{detector}` is not an element of this network"
        )));
    }
    let mut poly = detector_expansion(graph, detector, opts.order, mode)?;
    if opts.normalize {
        poly = poly
            .normalized()
            .ok_or_else(|| CliError::Physics(format!("amplitude at `{detector}` vanishes; cannot normalize")))?;
    }
    Ok(match format {
        Format::Text if opts.by_order => poly.display_by_order(),
        Format::Text => format!("{poly}\n"),
        Format::Csv => {
            let mut out = String::from("monomial,degree,re,im\n");
            for (m, c) in poly.terms() {
                let _ = writeln!(out, "{m},{},{},{}", m.degree(), fmt17(c.re), fmt17(c.im));
            }
            out
        }
        Format::Json => {
            let mut s = poly.to_json();
            s.push('\n');
            s
        }
    })
}

pub fn weakvalues(graph: &InterferometerGraph, detector: &str, format: Format) -> Result<String, CliError> {
    let wv = weak_values(graph, detector)?;
    Ok(match format {
        Format::Text => {
            let mut out = format!(
                "detector {}, post-selection probability {}\n",
                wv.detector,
                fmt17(wv.post_selection_probability)
            );
            for (m, w) in &wv.per_mirror {
                let _ = writeln!(out, "P_{m:<8} {:>25} {:>25}", fmt17(w.re), fmt17(w.im));
            }
            for (k, w) in &wv.cumulative {
                let _ = writeln!(out, "sum {k:<6} {:>25} {:>25}", fmt17(w.re), fmt17(w.im));
            }
            out
        }
        Format::Csv => {
            let mut out = String::from("kind,key,re,im\n");
            for (m, w) in &wv.per_mirror {
                let _ = writeln!(out, "mirror,{m},{},{}", fmt17(w.re), fmt17(w.im));
            }
            for (k, w) in &wv.cumulative {
                let _ = writeln!(out, "cumulative,{k},{},{}", fmt17(w.re), fmt17(w.im));
            }
            let _ = writeln!(
                out,
                "probability,{},{},{}",
                wv.detector,
                fmt17(wv.post_selection_probability),
                fmt17(0.0)
            );
            out
        }
        Format::Json => {
            let mut s = wv.to_json();
            s.push('\n');
            s
        }
    })
}

pub fn pointer_shift(
    graph: &InterferometerGraph,
    detector: &str,
    g_values: &[f64],
    sigma: f64,
    format: Format,
) -> Result<String, CliError> {
    let table = shift_vs_weakvalue(graph, detector, g_values, sigma)?;
    Ok(match format {
        Format::Csv => table.to_csv(),
        Format::Json => json_string(&table),
        Format::Text => {
            let mut out = format!("detector {}, sigma {}\n", table.detector, fmt17(table.sigma));
            for r in &table.rows {
                let _ = writeln!(
                    out,
                    "{} g={} shift={} g*Re(w)={} residual={}",
                    r.mirror,
                    fmt17(r.g),
                    fmt17(r.mean_shift),
                    fmt17(r.first_order_prediction),
                    fmt17(r.residual)
                );
            }
            for (m, s) in &table.residual_slopes {
                let _ = writeln!(
                    out,
                    "residual slope {m}: {}",
                    s.map(fmt17).unwrap_or_else(|| "none".into())
                );
            }
            out
        }
    })
}

pub struct SpectrumOutput {
    pub report: String,
    pub signal_csv: String,
}

fn peak_lines(power: &SpectrumResult) -> String {
    let mut out = String::new();
    let reference = power.peak_power.get(&Mirror::C).copied();
    for (m, p) in &power.peak_power {
        let _ = write!(out, "peak {m} {}", fmt17(*p));
        if let Some(c) = reference.filter(|&c| c > 0.0) {
            let _ = write!(out, " relative_to_C {}", fmt17(p / c));
        }
        out.push('\n');
    }
    if let Some(p) = power.intermod_power {
        let _ = writeln!(out, "intermod E+F {}", fmt17(p));
    }
    out
}

pub fn spectrum(graph: &InterferometerGraph, cfg: &RunConfig, format: Format) -> Result<SpectrumOutput, CliError> {
    let osc = cfg.oscillation();
    let (signal, power) = run_spectrum(graph, &osc)?;
    let header = format!(
        "detector {}, mode {}, {} samples at {} Hz\n{}",
        osc.detector,
        match osc.mode {
            SignalMode::FirstOrder => "first-order",
            SignalMode::Exact => "exact",
        },
        power.n_samples,
        fmt17(power.sample_rate),
        peak_lines(&power).trim_end()
    );
    let report = match format {
        Format::Csv => power.to_csv(Some(&header)),
        Format::Text => format!("{header}\n"),
        Format::Json => json_string(&power),
    };
    Ok(SpectrumOutput {
        report,
        signal_csv: signal.to_csv(Some(&header)),
    })
}

pub fn scaling(graph: &InterferometerGraph, cfg: &RunConfig, format: Format) -> Result<String, CliError> {
    let mut osc = cfg.oscillation();
    osc.mode = SignalMode::Exact;
    let deltas = cfg
        .spectrum
        .scaling_deltas
        .clone()
        .unwrap_or_else(|| vec![0.1, 0.05, 0.02, 0.01]);
    let result = peak_scaling(graph, &osc, &deltas)?;
    Ok(match format {
        Format::Json => json_string(&result),
        Format::Csv => scaling_csv(&result),
        Format::Text => {
            let mut out = String::new();
            for (m, s) in &result.slopes {
                let _ = writeln!(out, "slope {m}: {}", s.map(fmt17).unwrap_or_else(|| "none".into()));
            }
            out
        }
    })
}

fn scaling_csv(result: &ScalingResult) -> String {
    let mirrors: Vec<&Mirror> = result.peak_power.keys().collect();
    let mut out = String::new();
    for (m, s) in &result.slopes {
        let _ = writeln!(out, "# slope {m}: {}", s.map(fmt17).unwrap_or_else(|| "none".into()));
    }
    out.push_str("delta");
    for m in &mirrors {
        let _ = write!(out, ",{m}");
    }
    out.push('\n');
    for (i, d) in result.deltas.iter().enumerate() {
        out.push_str(&fmt17(*d));
        for m in &mirrors {
            let _ = write!(out, ",{}", fmt17(result.peak_power[m][i]));
        }
        out.push('\n');
    }
    out
}
