//! The run report and its serializations: full JSON, the flat check
//! table as CSV, and plot-ready data files.

use crate::config::ScenarioConfig;
use crate::CliError;
use dnlab::dtn::{BranchTrace, Crossing};
use dnlab::verify::{CheckResult, CheckStatus, PayneRecord};
use dnlab::Tolerances;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureSummary {
    pub nodes: usize,
    pub interior: usize,
    pub boundary: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectraExcerpt {
    pub neumann: Vec<f64>,
    pub dirichlet: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub grid_points: usize,
    pub crossings: Vec<Crossing>,
    /// Whether the crossing inventory matches the spectra: one +→−
    /// crossing per Neumann multiplicity and one −→+ per Dirichlet
    /// multiplicity (counted in the complement of the common subspace)
    /// strictly inside the window.
    pub consistent_with_spectra: bool,
    /// Empirical `max |Δν|/Δμ` over the matched branches (continuity
    /// witness; reported, not asserted).
    pub max_branch_slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergeLevel {
    pub cells_per_side: usize,
    pub h: f64,
    pub dirichlet: Vec<f64>,
    pub neumann: Vec<f64>,
    pub dirichlet_rel_err: Vec<f64>,
    pub neumann_rel_err: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergeSummary {
    pub levels: Vec<ConvergeLevel>,
    pub dirichlet_targets: Vec<f64>,
    pub neumann_targets: Vec<f64>,
    pub fitted_orders: Vec<f64>,
    pub payne_margins: Vec<f64>,
}

/// The complete run record. Serialization order is the declaration
/// order, stable across runs; the timing block is the only
/// nondeterministic field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub command: String,
    pub config: ScenarioConfig,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub fixture: FixtureSummary,
    pub checks: Vec<CheckResult>,
    pub spectra: Option<SpectraExcerpt>,
    pub sweep: Option<SweepSummary>,
    pub payne: Option<Vec<PayneRecord>>,
    pub converge: Option<ConvergeSummary>,
    pub timings_ms: BTreeMap<String, u64>,
}

impl Report {
    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| !c.passed())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Plotdata,
}

impl std::str::FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "plotdata" => Ok(Format::Plotdata),
            other => Err(CliError::Config(format!("unknown format {other:?}"))),
        }
    }
}

pub fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn status_str(s: &CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "fail",
        CheckStatus::Skipped { .. } => "skipped",
    }
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// Flat check table: `check,lambda,status,lhs,rhs,residual`.
pub fn to_csv(report: &Report) -> String {
    let mut out = String::from("check,lambda,status,lhs,rhs,residual\n");
    for c in &report.checks {
        let lambda = c
            .lambda
            .map(|l| format!("{l:.17e}"))
            .or_else(|| c.interval.map(|(a, b)| format!("{a:.6}..{b:.6}")))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{lambda},{},{},{},{}\n",
            c.name,
            status_str(&c.status),
            opt(&c.lhs),
            opt(&c.rhs),
            c.residual.map(|r| format!("{r:.6e}")).unwrap_or_default(),
        ));
    }
    out
}

/// Counting-function step data: `lambda,N_N,N_D`.
pub fn counting_to_csv(rows: &[(f64, usize, usize)]) -> String {
    let mut out = String::from("lambda,N_N,N_D\n");
    for &(lam, nn, nd) in rows {
        out.push_str(&format!("{lam:.17e},{nn},{nd}\n"));
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// Emit the report in the requested format. `plotdata` writes the branch
/// trace (when the run produced one) and the counting-function step file,
/// derived from the output stem.
pub fn emit(
    report: &Report,
    format: Format,
    path: Option<&Path>,
    trace: Option<&BranchTrace>,
    counting: Option<&[(f64, usize, usize)]>,
) -> Result<Vec<std::path::PathBuf>, CliError> {
    match format {
        Format::Json => {
            let text = to_json(report);
            match path {
                Some(p) => {
                    write_file(p, &text)?;
                    Ok(vec![p.to_path_buf()])
                }
                None => {
                    print!("{text}");
                    Ok(vec![])
                }
            }
        }
        Format::Csv => {
            let text = to_csv(report);
            match path {
                Some(p) => {
                    write_file(p, &text)?;
                    Ok(vec![p.to_path_buf()])
                }
                None => {
                    print!("{text}");
                    Ok(vec![])
                }
            }
        }
        Format::Plotdata => {
            let base = path.ok_or_else(|| CliError::Config("plotdata output requires --out".into()))?;
            let stem = base.with_extension("");
            let mut written = Vec::new();
            if let Some(t) = trace {
                let p = stem.with_file_name(format!(
                    "{}_trace.csv",
                    stem.file_name().unwrap_or_default().to_string_lossy()
                ));
                write_file(&p, &dnlab::dtn::trace_to_csv(t))?;
                written.push(p);
            }
            if let Some(rows) = counting {
                let p = stem.with_file_name(format!(
                    "{}_counting.csv",
                    stem.file_name().unwrap_or_default().to_string_lossy()
                ));
                write_file(&p, &counting_to_csv(rows))?;
                written.push(p);
            }
            if written.is_empty() {
                return Err(CliError::Config(
                    "this run produced no plotdata (use the sweep or spectrum command)".into(),
                ));
            }
            Ok(written)
        }
    }
}
