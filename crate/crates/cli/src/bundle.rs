//! Result bundles: everything a fit produces, as plot-ready files.
//!
//! | file                 | contents                                   |
//! |----------------------|--------------------------------------------|
//! | `rational.json`      | the barycentric rational                   |
//! | `trace.csv`          | one row per iteration                      |
//! | `error_curve.csv`    | `x_re, x_im, residual` for every sample    |
//! | `extreme_points.csv` | the collapsed extreme-point set            |
//! | `certificate.json`   | duality certificate and run summary        |
//! | `run_meta.json`      | timestamp and command line (not compared)  |

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use bdlawson::diagnostics::{theorem_bound_check, BoundCheck};
use bdlawson::lawson::IterationTrace;
use bdlawson::{
    BarycentricRational, DualityCertificate, InterpolationData, SampleSet, SolveResult,
    TerminationReason,
};
use serde::{Deserialize, Serialize};

use crate::format::{num, to_json};
use crate::CliError;

pub const RATIONAL: &str = "rational.json";
pub const TRACE: &str = "trace.csv";
pub const ERROR_CURVE: &str = "error_curve.csv";
pub const EXTREME_POINTS: &str = "extreme_points.csv";
pub const CERTIFICATE: &str = "certificate.json";
pub const RUN_META: &str = "run_meta.json";

/// Files compared byte-for-byte when checking determinism.
pub const DETERMINISTIC_FILES: [&str; 5] =
    [RATIONAL, TRACE, ERROR_CURVE, EXTREME_POINTS, CERTIFICATE];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub termination: TerminationReason,
    pub iterations: usize,
    pub best_index: usize,
    pub failure: Option<String>,
    pub degree: usize,
    pub ell: usize,
    pub samples: usize,
    pub max_error: f64,
    pub relative_gap: f64,
    pub extreme_points: usize,
    pub extreme_threshold: f64,
    pub bound_check: BoundCheck,
    pub interp_residuals: Vec<f64>,
    pub max_interp_violation: f64,
    pub certificate: DualityCertificate,
}

impl RunSummary {
    pub fn new(result: &SolveResult, interp: &InterpolationData) -> Self {
        let rat = &result.rational;
        RunSummary {
            termination: result.trace.termination,
            iterations: result.trace.records.len().saturating_sub(1),
            best_index: result.trace.best_index,
            failure: result.trace.failure.clone(),
            degree: rat.degree(),
            ell: rat.ell(),
            samples: result.report.residuals.len(),
            max_error: result.report.max_error,
            relative_gap: result.certificate.relative_gap,
            extreme_points: result.extremes.len(),
            extreme_threshold: result.extremes.threshold,
            bound_check: theorem_bound_check(&result.extremes, rat.degree(), rat.ell()),
            interp_residuals: result.report.interp_residuals.clone(),
            max_interp_violation: result.report.max_interp_violation(interp),
            certificate: result.certificate.clone(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "termination={} verdict={} e={} gap={} iterations={} extreme_points={}",
            serde_json::to_value(self.termination)
                .expect("enum serializes")
                .as_str()
                .unwrap_or("?"),
            serde_json::to_value(self.certificate.verdict)
                .expect("enum serializes")
                .as_str()
                .unwrap_or("?"),
            num(self.max_error),
            num(self.relative_gap),
            self.iterations,
            self.extreme_points
        )
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| io_err(&p, e))
}

pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::from("k,d,e,gap,active_weights,sigma_gap,rho\n");
    for r in &trace.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.k,
            num(r.d),
            num(r.e),
            num(r.gap),
            r.active_weights,
            num(r.sigma_gap),
            num(r.rho)
        ));
    }
    out
}

pub fn write_bundle(
    dir: &Path,
    samples: &SampleSet,
    interp: &InterpolationData,
    result: &SolveResult,
    command: &[String],
) -> Result<RunSummary, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    write(dir, RATIONAL, &json(&result.rational)?)?;
    write(dir, TRACE, &trace_csv(&result.trace))?;

    let mut curve = String::from("x_re,x_im,residual\n");
    for (x, r) in samples.nodes().iter().zip(&result.report.residuals) {
        curve.push_str(&format!("{},{},{}\n", num(x.re), num(x.im), num(*r)));
    }
    write(dir, ERROR_CURVE, &curve)?;

    let mut ext = String::from("index,x_re,x_im,residual\n");
    for &j in &result.extremes.indices {
        let x = samples.nodes()[j];
        ext.push_str(&format!(
            "{j},{},{},{}\n",
            num(x.re),
            num(x.im),
            num(result.report.residuals[j])
        ));
    }
    write(dir, EXTREME_POINTS, &ext)?;

    let summary = RunSummary::new(result, interp);
    write(dir, CERTIFICATE, &json(&summary)?)?;

    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "created_unix": created,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
    });
    write(dir, RUN_META, &json(&meta)?)?;
    Ok(summary)
}

pub fn read_rational(path: &Path) -> Result<BarycentricRational, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: malformed model: {e}", path.display())))
}

pub fn read_summary(dir: &Path) -> Result<RunSummary, CliError> {
    let p = dir.join(CERTIFICATE);
    let text =
        fs::read_to_string(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
}

/// Residuals recorded in a bundle's error curve.
pub fn read_error_curve(dir: &Path) -> Result<Vec<f64>, CliError> {
    let p = dir.join(ERROR_CURVE);
    let mut reader =
        csv::Reader::from_path(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
    reader
        .records()
        .map(|r| {
            let r = r.map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            r.get(2)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Input(format!("{}: bad residual row", p.display())))
        })
        .collect()
}

fn json<T: Serialize + ?Sized>(v: &T) -> Result<String, CliError> {
    to_json(v).map_err(|e| CliError::Output(e.to_string()))
}
