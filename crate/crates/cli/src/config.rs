//! Scenario configuration: flat structured text with sections, parsed
//! from TOML. Unknown keys are rejected; all tolerances have defaults and
//! are echoed into the report.

use crate::CliError;
use dnlab::mesh::{self, BoundaryEnds, DomainSpec, MassMode};
use dnlab::Tolerances;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub domain: DomainSection,
    #[serde(default)]
    pub form: FormSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// `interval` | `grid` | `graph`.
    pub kind: String,
    /// Interval: total node count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// Interval: `last` (default) or `both`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
    /// Grid dimensions (full rectangle when no mask file is given).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    /// Grid: mask file (`#` in, `.` out), resolved next to the config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
    /// Interval/grid spacing override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Graph: edge-list file, resolved next to the config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FormSection {
    pub shift: f64,
    /// `identity` | `lumped`.
    pub mass: String,
}

impl Default for FormSection {
    fn default() -> Self {
        FormSection { shift: 1.0, mass: "identity".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    /// Explicit verify probes; empty selects the automatic protocol.
    pub lambdas: Vec<f64>,
    pub eigenvalue_depth: usize,
    pub random_lambdas: usize,
    pub random_intervals: usize,
    pub filonov_samples: usize,
    pub monotone_vectors: usize,
    pub payne_k_max: usize,
    /// `report` (default) or `assert` (continuum-convergence mode).
    pub payne: String,
    pub sweep_from: f64,
    pub sweep_to: f64,
    pub sweep_steps: usize,
    /// Spectrum excerpt length.
    pub spectrum_k: usize,
    /// Converge ladder: cells per side (h = 1/level).
    pub levels: Vec<usize>,
    pub converge_k: usize,
    pub converge_payne_k: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 0,
            lambdas: Vec::new(),
            eigenvalue_depth: 10,
            random_lambdas: 10,
            random_intervals: 5,
            filonov_samples: 100,
            monotone_vectors: 4,
            payne_k_max: 5,
            payne: "report".into(),
            sweep_from: 0.5,
            sweep_to: 4.5,
            sweep_steps: 200,
            spectrum_k: 10,
            levels: vec![16, 32, 64],
            converge_k: 5,
            converge_payne_k: 10,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSection {
    pub cluster_rel: Option<f64>,
    pub pencil_zero_rel: Option<f64>,
    pub zero_pivot_factor: Option<f64>,
    pub rank_slack: Option<f64>,
    pub common_angle: Option<f64>,
    pub ineq_tol: Option<f64>,
    pub mono_tol: Option<f64>,
    pub proj_tol: Option<f64>,
}

impl ToleranceSection {
    pub fn resolve(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.cluster_rel {
            t.cluster_rel = v;
        }
        if let Some(v) = self.pencil_zero_rel {
            t.pencil_zero_rel = v;
        }
        if self.zero_pivot_factor.is_some() {
            t.zero_pivot_factor = self.zero_pivot_factor;
        }
        if let Some(v) = self.rank_slack {
            t.rank_slack = v;
        }
        if let Some(v) = self.common_angle {
            t.common_angle = v;
        }
        if let Some(v) = self.ineq_tol {
            t.ineq_tol = v;
        }
        if let Some(v) = self.mono_tol {
            t.mono_tol = v;
        }
        if let Some(v) = self.proj_tol {
            t.proj_tol = v;
        }
        t
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<String>,
    /// `json` | `csv` | `plotdata`.
    pub format: Option<String>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<(Self, std::path::PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ScenarioConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok((cfg, dir))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self.domain.kind.as_str() {
            "interval" => {
                if self.domain.nodes.unwrap_or(0) < 2 {
                    return Err(CliError::Config("interval domain needs nodes >= 2".into()));
                }
            }
            "grid" => {
                if self.domain.mask.is_none()
                    && (self.domain.rows.unwrap_or(0) == 0 || self.domain.cols.unwrap_or(0) == 0)
                {
                    return Err(CliError::Config("grid domain needs rows/cols or a mask file".into()));
                }
            }
            "graph" => {
                if self.domain.graph.is_none() {
                    return Err(CliError::Config("graph domain needs a graph file".into()));
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown domain kind {other:?} (expected interval|grid|graph)"
                )))
            }
        }
        if self.form.shift < 0.0 || !self.form.shift.is_finite() {
            return Err(CliError::Config(format!("shift must be >= 0, got {}", self.form.shift)));
        }
        match self.form.mass.as_str() {
            "identity" | "lumped" => {}
            other => return Err(CliError::Config(format!("unknown mass mode {other:?}"))),
        }
        match self.run.payne.as_str() {
            "report" | "assert" => {}
            other => return Err(CliError::Config(format!("run.payne must be report|assert, got {other:?}"))),
        }
        if self.run.sweep_steps < 2 {
            return Err(CliError::Config("run.sweep_steps must be >= 2".into()));
        }
        if self.run.sweep_from >= self.run.sweep_to {
            return Err(CliError::Config("need run.sweep_from < run.sweep_to".into()));
        }
        if self.run.levels.iter().any(|&l| l < 2) {
            return Err(CliError::Config("converge levels must be >= 2 cells per side".into()));
        }
        if let Some(f) = self.output.format.as_deref() {
            if !matches!(f, "json" | "csv" | "plotdata") {
                return Err(CliError::Config(format!("unknown output format {f:?}")));
            }
        }
        Ok(())
    }

    pub fn mass_mode(&self) -> MassMode {
        match self.form.mass.as_str() {
            "lumped" => MassMode::Lumped,
            _ => MassMode::Identity,
        }
    }

    /// Build the domain described by the `[domain]` section; file
    /// references resolve relative to `base_dir`.
    pub fn build_domain(&self, base_dir: &Path) -> Result<DomainSpec, CliError> {
        let d = &self.domain;
        let domain = match d.kind.as_str() {
            "interval" => {
                let ends = match d.boundary.as_deref() {
                    None | Some("last") => BoundaryEnds::Last,
                    Some("both") => BoundaryEnds::Both,
                    Some(other) => {
                        return Err(CliError::Config(format!(
                            "interval boundary must be last|both, got {other:?}"
                        )))
                    }
                };
                mesh::build_interval(d.nodes.unwrap(), d.h.unwrap_or(1.0), ends)?
            }
            "grid" => {
                let mask = match &d.mask {
                    Some(rel) => Some(mesh::load_mask(&base_dir.join(rel))?),
                    None => None,
                };
                let (rows, cols) = match &mask {
                    Some(m) => (m.len(), m[0].len()),
                    None => (d.rows.unwrap(), d.cols.unwrap()),
                };
                mesh::build_grid(rows, cols, mask.as_deref(), d.h)?
            }
            "graph" => mesh::load_graph(&base_dir.join(d.graph.as_ref().unwrap()))?,
            _ => unreachable!("validated"),
        };
        Ok(domain)
    }
}
