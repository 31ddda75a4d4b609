//! Command dispatch: load a domain, run the requested computation, and
//! package a [`Report`].

use crate::config::ScenarioConfig;
use crate::report::{
    ConvergeLevel, ConvergeSummary, FixtureSummary, Report, SpectraExcerpt, SweepSummary,
};
use crate::CliError;
use dnlab::dtn::{self, BranchTrace};
use dnlab::eigensolve;
use dnlab::mesh::{self, FormPair, IndexSplit};
use dnlab::verify::{self, CheckResult, CheckStatus, PayneRecord, ProblemSpectra, SuiteOptions};
use dnlab::Tolerances;
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Sweep,
    Verify,
    Converge,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
            Command::Converge => "converge",
        }
    }
}

pub struct RunOutput {
    pub report: Report,
    pub trace: Option<BranchTrace>,
    pub counting: Option<Vec<(f64, usize, usize)>>,
}

fn assemble(cfg: &ScenarioConfig, base_dir: &Path) -> Result<(FormPair, IndexSplit), CliError> {
    let domain = cfg.build_domain(base_dir)?;
    Ok(mesh::assemble(&domain, cfg.form.shift, cfg.mass_mode())?)
}

fn excerpt(spectra: &ProblemSpectra, k: usize) -> SpectraExcerpt {
    SpectraExcerpt {
        neumann: spectra.neumann.values.iter().take(k).copied().collect(),
        dirichlet: spectra.dirichlet.values.iter().take(k).copied().collect(),
    }
}

fn counting_rows(spectra: &ProblemSpectra, from: f64, to: f64, points: usize) -> Vec<(f64, usize, usize)> {
    (0..=points)
        .map(|i| {
            let lam = from + (to - from) * i as f64 / points as f64;
            (lam, spectra.neumann.counting(lam), spectra.dirichlet.counting(lam))
        })
        .collect()
}

/// Compare a crossing inventory to the spectra: strictly inside the
/// window, every Neumann multiplicity (in the complement of the common
/// subspace) must appear as a +→− crossing and every Dirichlet one as
/// −→+, and each crossing bracket must contain an eigenvalue of the
/// matching problem.
fn crossings_consistent(
    form: &FormPair,
    spectra: &ProblemSpectra,
    trace: &BranchTrace,
    from: f64,
    to: f64,
    tols: &Tolerances,
) -> bool {
    let margin = (to - from) * 1e-6;
    let mut want_n = 0usize;
    let mut want_d = 0usize;
    for lam in spectra.union_distinct(tols) {
        if lam > from + margin && lam < to - margin {
            let data = spectra.at(form, lam, tols);
            want_n += data.n_n;
            want_d += data.n_d;
        }
    }
    let got_n = trace.crossings.iter().filter(|c| c.from_positive).count();
    let got_d = trace.crossings.iter().filter(|c| !c.from_positive).count();
    if (got_n, got_d) != (want_n, want_d) {
        return false;
    }
    trace.crossings.iter().all(|c| {
        let spectrum = if c.from_positive { &spectra.neumann } else { &spectra.dirichlet };
        let pad = (c.mu_hi - c.mu_lo).max(tols.cluster_tol(c.mu_lo));
        spectrum
            .values
            .iter()
            .any(|&v| v >= c.mu_lo - pad && v <= c.mu_hi + pad)
    })
}

pub fn run_scenario(
    command: Command,
    cfg: &ScenarioConfig,
    base_dir: &Path,
    seed_override: Option<u64>,
) -> Result<RunOutput, CliError> {
    let tols = cfg.tolerances.resolve();
    let seed = seed_override.unwrap_or(cfg.run.seed);
    let mut timings: BTreeMap<String, u64> = BTreeMap::new();
    let started = Instant::now();

    let mut checks: Vec<CheckResult> = Vec::new();
    let mut spectra_excerpt = None;
    let mut sweep_summary = None;
    let mut payne: Option<Vec<PayneRecord>> = None;
    let mut converge_summary = None;
    let mut trace = None;
    let mut counting = None;

    let fixture = if command == Command::Converge {
        let side = cfg.run.levels.iter().copied().max().unwrap_or(16) + 1;
        FixtureSummary {
            nodes: side * side,
            interior: (side - 2) * (side - 2),
            boundary: side * side - (side - 2) * (side - 2),
        }
    } else {
        let (fp, split) = assemble(cfg, base_dir)?;
        let fixture = FixtureSummary {
            nodes: fp.n(),
            interior: split.interior.len(),
            boundary: split.boundary.len(),
        };
        timings.insert("assemble".into(), started.elapsed().as_millis() as u64);

        match command {
            Command::Spectrum => {
                let t = Instant::now();
                let spectra = ProblemSpectra::compute(&fp, &split, &tols)?;
                timings.insert("eigensolve".into(), t.elapsed().as_millis() as u64);
                spectra_excerpt = Some(excerpt(&spectra, cfg.run.spectrum_k));
                let top = spectra.neumann.values.last().copied().unwrap_or(1.0);
                counting = Some(counting_rows(&spectra, 0.0, 1.05 * top, 400));
            }
            Command::Sweep => {
                let t = Instant::now();
                let spectra = ProblemSpectra::compute(&fp, &split, &tols)?;
                let tr = dtn::blambda_branches(
                    &fp,
                    &split,
                    cfg.run.sweep_from,
                    cfg.run.sweep_to,
                    cfg.run.sweep_steps,
                    &tols,
                )?;
                timings.insert("sweep".into(), t.elapsed().as_millis() as u64);
                let consistent =
                    crossings_consistent(&fp, &spectra, &tr, cfg.run.sweep_from, cfg.run.sweep_to, &tols);
                sweep_summary = Some(SweepSummary {
                    from: cfg.run.sweep_from,
                    to: cfg.run.sweep_to,
                    steps: cfg.run.sweep_steps,
                    grid_points: tr.mu.len(),
                    crossings: tr.crossings.clone(),
                    consistent_with_spectra: consistent,
                    max_branch_slope: tr.max_branch_slope(),
                });
                checks.push(CheckResult {
                    name: "sweep_crossings_vs_spectra".into(),
                    status: if consistent { CheckStatus::Pass } else { CheckStatus::Fail },
                    lambda: None,
                    interval: Some((cfg.run.sweep_from, cfg.run.sweep_to)),
                    lhs: Some(tr.crossings.len() as i64),
                    rhs: None,
                    residual: None,
                    diagnostics: vec![format!("{} crossings located", tr.crossings.len())],
                });
                spectra_excerpt = Some(excerpt(&spectra, cfg.run.spectrum_k));
                counting = Some(counting_rows(&spectra, cfg.run.sweep_from, cfg.run.sweep_to, 400));
                trace = Some(tr);
            }
            Command::Verify => {
                let t = Instant::now();
                let opts = SuiteOptions {
                    seed,
                    eigenvalue_depth: cfg.run.eigenvalue_depth,
                    random_lambdas: cfg.run.random_lambdas,
                    random_intervals: cfg.run.random_intervals,
                    filonov_samples: cfg.run.filonov_samples,
                    monotone_vectors: cfg.run.monotone_vectors,
                    payne_k_max: cfg.run.payne_k_max,
                    assert_payne: cfg.run.payne == "assert",
                    crossing_count: 5,
                };
                let (mut suite, records) = verify::run_suite(&fp, &split, &opts, &tols)?;
                // user-supplied probes, in addition to the protocol
                if !cfg.run.lambdas.is_empty() {
                    let spectra = ProblemSpectra::compute(&fp, &split, &tols)?;
                    for &lam in &cfg.run.lambdas {
                        suite.push(verify::check_haynsworth(&fp, &split, &spectra, lam, &tols)?);
                        suite.push(verify::check_kernel_dim(&fp, &split, &spectra, lam, &tols)?);
                    }
                }
                timings.insert("verify".into(), t.elapsed().as_millis() as u64);
                checks = suite;
                payne = Some(records);
            }
            Command::Converge => unreachable!(),
        }
        fixture
    };

    if command == Command::Converge {
        let t = Instant::now();
        let shift = cfg.form.shift;
        let pi2 = std::f64::consts::PI.powi(2);
        let kd = cfg.run.converge_k;
        let d_multipliers = continuum_multipliers(kd, true);
        let n_multipliers = continuum_multipliers(kd, false);
        let d_targets: Vec<f64> = d_multipliers.iter().map(|m| m * pi2 + shift).collect();
        let n_targets: Vec<f64> = n_multipliers.iter().map(|m| m * pi2 + shift).collect();

        let mut levels = Vec::new();
        for &lv in &cfg.run.levels {
            let (neu, dir) = eigensolve::square_lumped_spectra(lv, shift)?;
            let d_err: Vec<f64> = (0..kd)
                .map(|k| ((dir[k] - d_targets[k]) / d_targets[k]).abs())
                .collect();
            let n_err: Vec<f64> = (0..kd)
                .map(|k| ((neu[k] - n_targets[k]) / n_targets[k].max(1.0)).abs())
                .collect();
            levels.push(ConvergeLevel {
                cells_per_side: lv,
                h: 1.0 / lv as f64,
                dirichlet: dir.iter().take(kd.max(cfg.run.converge_payne_k + 1)).copied().collect(),
                neumann: neu.iter().take(kd.max(cfg.run.converge_payne_k + 1) + 1).copied().collect(),
                dirichlet_rel_err: d_err,
                neumann_rel_err: n_err,
            });
        }
        // least-squares order fit on the Dirichlet errors
        let hs: Vec<f64> = levels.iter().map(|l| l.h.ln()).collect();
        let hbar = hs.iter().sum::<f64>() / hs.len() as f64;
        let den: f64 = hs.iter().map(|h| (h - hbar) * (h - hbar)).sum();
        let mut orders = Vec::new();
        for k in 0..kd {
            let ls: Vec<f64> = levels.iter().map(|l| l.dirichlet_rel_err[k].max(1e-300).ln()).collect();
            let lbar = ls.iter().sum::<f64>() / ls.len() as f64;
            let num: f64 = hs.iter().zip(&ls).map(|(h, l)| (h - hbar) * (l - lbar)).sum();
            orders.push(num / den);
        }
        let finest = levels.last().expect("nonempty ladder");
        let d_rel = finest.dirichlet_rel_err.iter().copied().fold(0.0f64, f64::max);
        let n_rel = finest.neumann_rel_err.iter().copied().fold(0.0f64, f64::max);
        let orders_ok = orders.iter().all(|&o| (o - 2.0).abs() <= 0.3);
        let mut payne_margins = Vec::new();
        let mut payne_ok = true;
        for k in 1..=cfg.run.converge_payne_k {
            let m = finest.dirichlet[k - 1] - finest.neumann[k];
            payne_margins.push(m);
            if m <= 0.0 {
                payne_ok = false;
            }
        }
        timings.insert("converge".into(), t.elapsed().as_millis() as u64);

        let mk = |name: &str, pass: bool, residual: f64| CheckResult {
            name: name.into(),
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            lambda: None,
            interval: None,
            lhs: None,
            rhs: None,
            residual: Some(residual),
            diagnostics: Vec::new(),
        };
        checks.push(mk("converge_dirichlet_within_1pct", d_rel <= 0.01, d_rel));
        checks.push(mk("converge_neumann_within_3pct", n_rel <= 0.03, n_rel));
        checks.push(mk(
            "converge_order_2",
            orders_ok,
            orders.iter().map(|o| (o - 2.0).abs()).fold(0.0f64, f64::max),
        ));
        checks.push(mk(
            "converge_payne_chain",
            payne_ok,
            payne_margins.iter().copied().fold(f64::INFINITY, f64::min),
        ));
        converge_summary = Some(ConvergeSummary {
            levels,
            dirichlet_targets: d_targets,
            neumann_targets: n_targets,
            fitted_orders: orders,
            payne_margins,
        });
    }

    timings.insert("total".into(), started.elapsed().as_millis() as u64);
    let report = Report {
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.name().into(),
        config: cfg.clone(),
        tolerances: tols,
        seed,
        fixture,
        checks,
        spectra: spectra_excerpt,
        sweep: sweep_summary,
        payne,
        converge: converge_summary,
        timings_ms: timings,
    };
    Ok(RunOutput {
        report,
        trace,
        counting,
    })
}

/// Sorted continuum multipliers m²+n² of the unit-square Laplacian
/// (Dirichlet: m,n ≥ 1; Neumann: m,n ≥ 0).
fn continuum_multipliers(k: usize, dirichlet: bool) -> Vec<f64> {
    let lo = if dirichlet { 1usize } else { 0usize };
    let mut v: Vec<f64> = (lo..=20)
        .flat_map(|m| (lo..=20).map(move |n| (m * m + n * n) as f64))
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.truncate(k);
    v
}

