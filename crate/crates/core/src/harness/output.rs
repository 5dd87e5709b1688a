//! CSV and gnuplot-style output.
//!
//! All numbers are written with 9 significant digits, `-inf` for a zero
//! deviation and `nan` where every trial diverged. Lines end in LF.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::ExperimentResult;

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Formats `v` with 9 significant digits, `%g` style.
pub fn fmt_sig9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        trim_zeros(&s).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Long-format trace: one row per (iteration, algorithm).
pub fn trace_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("iter,algorithm,nmsd_db,emse_db\n");
    for n in 0..result.horizon {
        for a in &result.algorithms {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                n + 1,
                a.label,
                fmt_sig9(a.nmsd_trace_db[n]),
                fmt_sig9(a.emse_trace_db[n])
            );
        }
    }
    out
}

pub fn summary_csv(result: &ExperimentResult) -> String {
    let mut out =
        String::from("algorithm,steady_nmsd_db,steady_emse_db,diverged_trials,trials,runtime_s\n");
    for a in &result.algorithms {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            a.label,
            fmt_sig9(a.steady_nmsd_db),
            fmt_sig9(a.steady_emse_db),
            a.diverged_trials,
            a.trials,
            fmt_sig9(a.runtime_s)
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Nmsd,
    Emse,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::Nmsd => "nmsd",
            Metric::Emse => "emse",
        }
    }
}

/// Wide table: `iter` then one column per algorithm, aligned on iteration.
/// `comment` selects the gnuplot variant (whitespace separated, `#` header).
pub fn wide_table(result: &ExperimentResult, metric: Metric, gnuplot: bool) -> String {
    let sep = if gnuplot { " " } else { "," };
    let mut out = String::new();
    if gnuplot {
        let _ = writeln!(out, "# {} (dB) per iteration", metric.name());
        out.push_str("# iter");
        for a in &result.algorithms {
            let _ = write!(out, " {}", a.label.replace(' ', "_"));
        }
    } else {
        out.push_str("iter");
        for a in &result.algorithms {
            let _ = write!(out, ",{}_{}_db", a.label, metric.name());
        }
    }
    out.push('\n');
    for n in 0..result.horizon {
        let _ = write!(out, "{}", n + 1);
        for a in &result.algorithms {
            let v = match metric {
                Metric::Nmsd => a.nmsd_trace_db[n],
                Metric::Emse => a.emse_trace_db[n],
            };
            let _ = write!(out, "{sep}{}", fmt_sig9(v));
        }
        out.push('\n');
    }
    out
}

fn write_all(dir: &Path, files: Vec<(String, String)>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn check_non_empty(result: &ExperimentResult) -> Result<()> {
    if result.algorithms.is_empty() || result.horizon == 0 {
        return Err(Error::InvalidArgument("no traces to write".into()));
    }
    Ok(())
}

/// Writes `trace.csv` and `summary.csv`.
pub fn write_experiment(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    check_non_empty(result)?;
    write_all(
        dir,
        vec![
            (TRACE_FILE.into(), trace_csv(result)),
            (SUMMARY_FILE.into(), summary_csv(result)),
        ],
    )
}

/// Writes `nmsd.csv`, `nmsd.dat`, `emse.csv` and `emse.dat`.
///
/// Nothing is written when there are no traces.
pub fn emit_plot_data(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    check_non_empty(result)?;
    let mut files = Vec::new();
    for metric in [Metric::Nmsd, Metric::Emse] {
        files.push((
            format!("{}.csv", metric.name()),
            wide_table(result, metric, false),
        ));
        files.push((
            format!("{}.dat", metric.name()),
            wide_table(result, metric, true),
        ));
    }
    write_all(dir, files)
}

/// One row per (swept value, algorithm).
pub fn sweep_csv(param: &str, rows: &[(f64, ExperimentResult)], gnuplot: bool) -> String {
    let mut out = String::new();
    if gnuplot {
        let _ = writeln!(out, "# steady-state metrics versus {param}");
        let _ = writeln!(out, "# {param} algorithm steady_nmsd_db steady_nmsd_median_db steady_emse_db diverged_trials trials");
    } else {
        let _ = writeln!(
            out,
            "{param},algorithm,steady_nmsd_db,steady_nmsd_median_db,steady_emse_db,diverged_trials,trials"
        );
    }
    let sep = if gnuplot { " " } else { "," };
    for (value, res) in rows {
        for a in &res.algorithms {
            let label = if gnuplot {
                a.label.replace(' ', "_")
            } else {
                a.label.clone()
            };
            let fields = [
                fmt_sig9(*value),
                label,
                fmt_sig9(a.steady_nmsd_db),
                fmt_sig9(a.steady_nmsd_median_db),
                fmt_sig9(a.steady_emse_db),
                a.diverged_trials.to_string(),
                a.trials.to_string(),
            ];
            out.push_str(&fields.join(sep));
            out.push('\n');
        }
    }
    out
}

/// Writes `sweep.csv` and `sweep.dat`.
pub fn write_sweep(
    param: &str,
    rows: &[(f64, ExperimentResult)],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if rows.is_empty() || rows.iter().any(|(_, r)| r.algorithms.is_empty()) {
        return Err(Error::InvalidArgument("no sweep results to write".into()));
    }
    write_all(
        dir,
        vec![
            (SWEEP_FILE.into(), sweep_csv(param, rows, false)),
            ("sweep.dat".into(), sweep_csv(param, rows, true)),
        ],
    )
}
