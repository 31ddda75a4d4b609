//! Executable embodiments of the counting-function identities and
//! inequalities as pass/fail checks.
//!
//! Every integer identity is evaluated with each side computed by an
//! independent algorithmic path — LDLᵀ inertia for counting functions,
//! the eigensolver for multiplicities, principal angles for common
//! eigenvectors, the `G_λ` pencil for signatures — so a pass certifies
//! cross-oracle agreement rather than self-consistency of one code path.

use crate::dtn;
use crate::eigensolve::{self, Problem, Spectrum};
use crate::inertia::{self, InertiaTriple};
use crate::mesh::{FormPair, IndexSplit};
use crate::{Error, Result, Tolerances};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped { reason: String },
}

/// Outcome of one check. Integer-identity checks pass iff `lhs == rhs`
/// exactly; inequality checks pass iff the one-sided `residual` is within
/// its stated tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub lambda: Option<f64>,
    pub interval: Option<(f64, f64)>,
    pub lhs: Option<i64>,
    pub rhs: Option<i64>,
    pub residual: Option<f64>,
    pub diagnostics: Vec<String>,
}

impl CheckResult {
    fn integer_identity(name: &str, lambda: Option<f64>, lhs: i64, rhs: i64) -> Self {
        CheckResult {
            name: name.into(),
            status: if lhs == rhs { CheckStatus::Pass } else { CheckStatus::Fail },
            lambda,
            interval: None,
            lhs: Some(lhs),
            rhs: Some(rhs),
            residual: None,
            diagnostics: Vec::new(),
        }
    }

    fn skipped(name: &str, lambda: Option<f64>, reason: String) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Skipped { reason },
            lambda,
            interval: None,
            lhs: None,
            rhs: None,
            residual: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self.status, CheckStatus::Pass | CheckStatus::Skipped { .. })
    }

    fn and_fail_if(mut self, cond: bool, note: String) -> Self {
        if cond {
            self.status = CheckStatus::Fail;
            self.diagnostics.push(note);
        }
        self
    }
}

/// Interlacing bookkeeping for one Dirichlet index `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayneRecord {
    pub k: usize,
    pub lambda_d_k: f64,
    pub lambda_n_k_plus_1: Option<f64>,
    /// `dim G⁻` at `λ_{D,k}`.
    pub p_k: usize,
    /// Dirichlet multiplicity at `λ_{D,k}` minus the common part.
    pub q_k: usize,
    /// `λ_{D,k} − λ_{N,k+q_k+p_k−1}` (strict bound, cluster-first `k` only).
    pub margin_strict: Option<f64>,
    /// `λ_{D,k} − λ_{N,k+p_k}` (weak bound, every `k`).
    pub margin_weak: Option<f64>,
    /// Whether `λ_{N,k+1} ≤ λ_{D,k}` — reported always, asserted only in
    /// continuum-convergence mode.
    pub payne_holds: Option<bool>,
}

/// Both spectra of one fixture, computed once with vectors.
#[derive(Clone, Debug)]
pub struct ProblemSpectra {
    pub neumann: Spectrum,
    pub dirichlet: Spectrum,
}

/// The per-λ multiplicity data entering the identities.
#[derive(Clone, Copy, Debug, Default)]
pub struct LambdaData {
    /// Full Neumann / Dirichlet multiplicities at λ.
    pub mult_n: usize,
    pub mult_d: usize,
    /// Common-eigenvector dimension `n_{N,D}(λ)`.
    pub n_nd: usize,
    /// Multiplicities in the complement of the common subspace.
    pub n_n: usize,
    pub n_d: usize,
}

impl ProblemSpectra {
    pub fn compute(form: &FormPair, split: &IndexSplit, tols: &Tolerances) -> Result<Self> {
        Ok(ProblemSpectra {
            neumann: eigensolve::problem_spectrum(form, split, Problem::Neumann, tols)?,
            dirichlet: eigensolve::problem_spectrum(form, split, Problem::Dirichlet, tols)?,
        })
    }

    pub fn at(&self, form: &FormPair, lambda: f64, tols: &Tolerances) -> LambdaData {
        let mult_n = self.neumann.multiplicity_at(lambda);
        let mult_d = self.dirichlet.multiplicity_at(lambda);
        let n_nd = if mult_n > 0 && mult_d > 0 {
            eigensolve::common_eigenspace(form, &self.neumann, &self.dirichlet, lambda, tols).0
        } else {
            0
        };
        LambdaData {
            mult_n,
            mult_d,
            n_nd,
            n_n: mult_n - n_nd,
            n_d: mult_d - n_nd,
        }
    }

    /// Distinct eigenvalues of both problems merged (cluster means).
    pub fn union_distinct(&self, tols: &Tolerances) -> Vec<f64> {
        let mut all = self.neumann.distinct();
        all.extend(self.dirichlet.distinct());
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out: Vec<f64> = Vec::new();
        for v in all {
            match out.last() {
                Some(&last) if (v - last).abs() <= tols.cluster_tol(v) => {}
                _ => out.push(v),
            }
        }
        out
    }

    pub fn is_eigenvalue(&self, lambda: f64) -> bool {
        self.neumann.multiplicity_at(lambda) > 0 || self.dirichlet.multiplicity_at(lambda) > 0
    }

    /// Distance from `λ` to the nearest *other* distinct eigenvalue.
    pub fn gap_around(&self, lambda: f64, tols: &Tolerances) -> f64 {
        self.union_distinct(tols)
            .iter()
            .filter(|&&v| (v - lambda).abs() > tols.cluster_tol(lambda))
            .fold(f64::INFINITY, |g, &v| g.min((v - lambda).abs()))
    }
}

/// Draw non-eigenvalue probes inside the spectral range, nudging any
/// collision off by 10 cluster tolerances.
pub fn random_noneigen_lambdas(
    spectra: &ProblemSpectra,
    count: usize,
    rng: &mut ChaCha8Rng,
    tols: &Tolerances,
) -> Vec<f64> {
    let lo = 0.5 * spectra.neumann.values.first().copied().unwrap_or(0.5);
    let hi = 1.2 * spectra.neumann.values.last().copied().unwrap_or(1.0);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut lam = rng.gen_range(lo..hi);
        for _ in 0..100 {
            if !spectra.is_eigenvalue(lam) {
                break;
            }
            lam += 10.0 * tols.cluster_tol(lam);
        }
        out.push(lam);
    }
    out
}

/// Random eigenvalue-free-endpoint intervals `(a, b)` with `a < b`.
pub fn random_intervals(
    spectra: &ProblemSpectra,
    count: usize,
    rng: &mut ChaCha8Rng,
    tols: &Tolerances,
) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let pts = random_noneigen_lambdas(spectra, 2, rng, tols);
        let (a, b) = (pts[0].min(pts[1]), pts[0].max(pts[1]));
        if b - a > tols.cluster_tol(a) * 100.0 {
            out.push((a, b));
        }
    }
    out
}

/// The lowest distinct eigenvalues that are simple: multiplicity one in
/// exactly one of the two problems.
pub fn lowest_simple_eigenvalues(
    spectra: &ProblemSpectra,
    count: usize,
    tols: &Tolerances,
) -> Vec<f64> {
    spectra
        .union_distinct(tols)
        .into_iter()
        .filter(|&v| spectra.neumann.multiplicity_at(v) + spectra.dirichlet.multiplicity_at(v) == 1)
        .take(count)
        .collect()
}

/// Distinct eigenvalues of either problem below each problem's
/// `k_max`-th eigenvalue — the standard probe set for the identities.
pub fn eigenvalue_probes(spectra: &ProblemSpectra, k_max: usize, tols: &Tolerances) -> Vec<f64> {
    let cap = |s: &Spectrum| s.values.get(k_max - 1).copied().unwrap_or(f64::INFINITY);
    let cap = cap(&spectra.neumann).max(cap(&spectra.dirichlet));
    spectra
        .union_distinct(tols)
        .into_iter()
        .filter(|&v| v <= cap + tols.cluster_tol(v))
        .collect()
}

/// `N_N(λ) = N_D(λ) + n_D(λ) + dim G_λ⁻`, every term by an independent
/// path (LDLᵀ counts, eigensolver multiplicities, pencil signature).
pub fn check_haynsworth(
    form: &FormPair,
    split: &IndexSplit,
    spectra: &ProblemSpectra,
    lambda: f64,
    tols: &Tolerances,
) -> Result<CheckResult> {
    let (nn, _) = inertia::count_below(form, split, Problem::Neumann, lambda, Some(tols.cluster_rel));
    let (nd, nd_at) = inertia::count_below(form, split, Problem::Dirichlet, lambda, Some(tols.cluster_rel));
    let data = spectra.at(form, lambda, tols);
    let frame = dtn::glambda_frame(form, split, lambda, None, tols);
    let sig = dtn::blambda_signature(&frame, tols)?;
    let mut res = CheckResult::integer_identity(
        "haynsworth",
        Some(lambda),
        nn as i64,
        (nd + data.n_d + sig.n_minus) as i64,
    );
    res.diagnostics.push(format!(
        "N_N={nn} N_D={nd} n_D={} dimG-={} (n_zero={} mult_D(inertia)={nd_at})",
        data.n_d, sig.n_minus, sig.n_zero
    ));
    if frame.rank_warning {
        res.diagnostics.push("ill-conditioned-rank warning from G_lambda".into());
    }
    // away from Dirichlet eigenvalues the two-term Schur route must agree
    if data.mult_d == 0 {
        if let Ok(map) = dtn::schur_dtn(form, split, lambda) {
            let si = dtn::dtn_inertia(form, &map, tols);
            res = res.and_fail_if(
                si.n_minus != sig.n_minus,
                format!("Schur route n_-(S)={} != pencil dimG-={}", si.n_minus, sig.n_minus),
            );
            res.diagnostics.push(format!("two-term route: N_N = N_D + n_-(S): {nn} = {nd} + {}", si.n_minus));
        }
    }
    Ok(res)
}

/// Kernel law `dim G_λ⁰ = n_N(λ) + n_D(λ) + n_{N,D}(λ)`, plus the
/// inclusion: every eigenvector of either problem at λ lies in `G_λ` with
/// vanishing b-form value.
pub fn check_kernel_dim(
    form: &FormPair,
    split: &IndexSplit,
    spectra: &ProblemSpectra,
    lambda: f64,
    tols: &Tolerances,
) -> Result<CheckResult> {
    let data = spectra.at(form, lambda, tols);
    let frame = dtn::glambda_frame(form, split, lambda, None, tols);
    let sig = dtn::blambda_signature(&frame, tols)?;
    let mut res = CheckResult::integer_identity(
        "kernel_dim",
        Some(lambda),
        sig.n_zero as i64,
        (data.n_n + data.n_d + data.n_nd) as i64,
    );
    res.diagnostics.push(format!(
        "n_N={} n_D={} n_ND={} dimG={} sig={sig}",
        data.n_n, data.n_d, data.n_nd, frame.dim()
    ));
    // the inclusion E_N(λ)H + E_D(λ)H ⊂ G_λ⁰
    let a = &form.k - lambda * &form.m;
    let scale = form.k.norm();
    let mut max_resid: f64 = 0.0;
    let t = tols.cluster_tol(lambda);
    for (spectrum, problem) in [(&spectra.neumann, Problem::Neumann), (&spectra.dirichlet, Problem::Dirichlet)] {
        let basis = eigensolve::eigenspace_from_spectrum(spectrum, problem, lambda, t).basis;
        for c in 0..basis.ncols() {
            let v = basis.column(c).into_owned();
            let interior = split.interior_rows(&a) * &v;
            let b_val = (v.transpose() * &a * &v)[(0, 0)].abs();
            max_resid = max_resid.max(interior.norm() / scale).max(b_val / scale);
        }
    }
    res.residual = Some(max_resid);
    res = res.and_fail_if(
        max_resid > 1e-8,
        format!("eigenvector b-form residual {max_resid:.3e} exceeds 1e-8"),
    );
    Ok(res)
}

/// Branch-crossing pattern at an eigenvalue: `n_D` branches pass − → +
/// and `n_N` branches pass + → − through zero, with
/// `n_N + n_D + n_{N,D}` zeros at λ itself.
pub fn check_crossing(
    form: &FormPair,
    split: &IndexSplit,
    spectra: &ProblemSpectra,
    lambda: f64,
    epsilon: Option<f64>,
    delta: Option<f64>,
    tols: &Tolerances,
) -> Result<CheckResult> {
    let data = spectra.at(form, lambda, tols);
    let frame = dtn::glambda_frame(form, split, lambda, None, tols);
    let sig = dtn::blambda_signature(&frame, tols)?;
    let mut res = CheckResult::integer_identity(
        "crossing",
        Some(lambda),
        sig.n_zero as i64,
        (data.n_n + data.n_d + data.n_nd) as i64,
    );

    // epsilon: half the smallest nonzero branch magnitude at lambda
    let nus = dtn::blambda_eigenvalues(&frame)?;
    let ztol = tols.pencil_zero_rel * nus.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let eps = epsilon.unwrap_or_else(|| {
        nus.iter()
            .filter(|v| v.abs() > ztol)
            .fold(f64::INFINITY, |m, v| m.min(v.abs()))
            / 2.0
    });

    let gap = spectra.gap_around(lambda, tols);
    if delta.is_none() && gap < 100.0 * tols.cluster_tol(lambda) {
        return Ok(CheckResult::skipped(
            "crossing",
            Some(lambda),
            format!("no admissible delta: nearest eigenvalue only {gap:.3e} away"),
        ));
    }
    let mut delta = delta.unwrap_or(if gap.is_finite() { gap / 2.0 } else { lambda.abs().max(1.0) / 2.0 });

    let mut ok = false;
    let mut detail = String::new();
    for _try in 0..40 {
        let probe = |mu: f64| -> Result<(usize, usize)> {
            let f = dtn::glambda_frame(form, split, mu, None, tols);
            let nu = dtn::blambda_eigenvalues(&f)?;
            let zt = tols.pencil_zero_rel * nu.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let neg = nu.iter().filter(|&&v| v < -zt && v > -eps).count();
            let pos = nu.iter().filter(|&&v| v > zt && v < eps).count();
            Ok((neg, pos))
        };
        let below = probe(lambda - delta / 2.0)?;
        let above = probe(lambda + delta / 2.0)?;
        detail = format!(
            "delta={delta:.3e} eps={eps:.3e} below=({},{}) above=({},{}) want below=({},{}) above=({},{})",
            below.0, below.1, above.0, above.1, data.n_d, data.n_n, data.n_n, data.n_d
        );
        if below == (data.n_d, data.n_n) && above == (data.n_n, data.n_d) {
            ok = true;
            break;
        }
        delta /= 2.0;
    }
    res.diagnostics.push(detail);
    res = res.and_fail_if(!ok, "sign pattern did not match after delta refinement".into());
    Ok(res)
}

/// Interval law: `dim G_b⁻ = dim G_a⁻ + #N-eigenvalues in [a,b) in 𝓗 −
/// #D-eigenvalues in (a,b] in 𝓗`, plus the per-eigenvalue jump law.
pub fn check_interval(
    form: &FormPair,
    split: &IndexSplit,
    spectra: &ProblemSpectra,
    a: f64,
    b: f64,
    tols: &Tolerances,
) -> Result<CheckResult> {
    if a >= b || a.is_nan() || b.is_nan() {
        return Err(Error::InvalidArgument(format!("need a < b, got [{a}, {b}]")));
    }
    for end in [a, b] {
        if spectra.is_eigenvalue(end) {
            return Err(Error::InvalidArgument(format!(
                "interval endpoint {end} is an eigenvalue; nudge it by ~{:.1e}",
                10.0 * tols.cluster_tol(end)
            )));
        }
    }
    let sig_at = |lam: f64| -> Result<InertiaTriple> {
        dtn::blambda_signature(&dtn::glambda_frame(form, split, lam, None, tols), tols)
    };
    let ga = sig_at(a)?;
    let gb = sig_at(b)?;
    let mut count_n = 0usize;
    let mut count_d = 0usize;
    let inside: Vec<f64> = spectra
        .union_distinct(tols)
        .into_iter()
        .filter(|&v| v > a && v < b)
        .collect();
    for &v in &inside {
        let data = spectra.at(form, v, tols);
        count_n += data.n_n;
        count_d += data.n_d;
    }
    let mut res = CheckResult::integer_identity(
        "interval",
        None,
        gb.n_minus as i64,
        ga.n_minus as i64 + count_n as i64 - count_d as i64,
    );
    res.interval = Some((a, b));
    res.lambda = None;
    res.diagnostics.push(format!(
        "dimG-(a)={} dimG-(b)={} #N[a,b)_H={count_n} #D(a,b]_H={count_d}",
        ga.n_minus, gb.n_minus
    ));
    // jump law: across each eigenvalue inside, dim G- jumps by n_N - n_D
    let mut walls = vec![a];
    walls.extend(inside.iter().copied());
    walls.push(b);
    for w in 0..inside.len() {
        let mid_lo = 0.5 * (walls[w] + walls[w + 1]);
        let mid_hi = 0.5 * (walls[w + 1] + walls[w + 2]);
        let lo = sig_at(mid_lo)?.n_minus as i64;
        let hi = sig_at(mid_hi)?.n_minus as i64;
        let data = spectra.at(form, inside[w], tols);
        let want = data.n_n as i64 - data.n_d as i64;
        res = res.and_fail_if(
            hi - lo != want,
            format!(
                "jump law at {}: dimG- {lo} -> {hi}, expected step {want}",
                inside[w]
            ),
        );
    }
    Ok(res)
}

fn numeric_rank_m(basis: &DMatrix<f64>, m: &DMatrix<f64>, rel: f64) -> usize {
    if basis.ncols() == 0 {
        return 0;
    }
    let g = basis.transpose() * m * basis;
    match eigensolve::eigh(&g) {
        Ok(s) => {
            let top = s.values.last().copied().unwrap_or(0.0).max(0.0);
            s.values.iter().filter(|&&v| v > rel * top.max(f64::MIN_POSITIVE)).count()
        }
        Err(_) => 0,
    }
}

/// Quadratic-form inequality `a[u] ≤ λ‖u‖²` on the span
/// `χ_{[0,λ]}(A_D)H + E_N(λ)H + G⁰_λ + G⁻_λ` by seeded sampling, plus the
/// dimension bound behind the counting inequality.
pub fn check_filonov(
    form: &FormPair,
    split: &IndexSplit,
    spectra: &ProblemSpectra,
    lambda: f64,
    n_samples: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<CheckResult> {
    if lambda <= 0.0 || lambda.is_nan() {
        return Err(Error::InvalidArgument(format!("need lambda > 0, got {lambda}")));
    }
    let n = form.n();
    let t = tols.cluster_tol(lambda);

    let mut cols: Vec<DVector<f64>> = Vec::new();
    // Dirichlet spectral subspace up to and including lambda
    let dvecs = spectra.dirichlet.vectors.as_ref().expect("vectors");
    for (i, &v) in spectra.dirichlet.values.iter().enumerate() {
        if v <= lambda + t {
            cols.push(dvecs.column(i).into_owned());
        }
    }
    // Neumann eigenspace at lambda
    let nb = eigensolve::eigenspace_from_spectrum(&spectra.neumann, Problem::Neumann, lambda, t).basis;
    for c in 0..nb.ncols() {
        cols.push(nb.column(c).into_owned());
    }
    // G⁰ + G⁻ from the pencil
    let frame = dtn::glambda_frame(form, split, lambda, None, tols);
    let pencil = eigensolve::eigh_gen(&frame.b_form, &frame.a_gram)?;
    let nus = &pencil.values;
    let ztol = tols.pencil_zero_rel * nus.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let pvecs = pencil.vectors.as_ref().expect("vectors");
    for (i, &nu) in nus.iter().enumerate() {
        if nu <= ztol {
            cols.push(&frame.basis * pvecs.column(i).into_owned());
        }
    }

    if cols.is_empty() {
        return Ok(CheckResult::skipped(
            "filonov",
            Some(lambda),
            "span is empty below the spectrum".into(),
        ));
    }

    let mut basis = DMatrix::zeros(n, cols.len());
    for (i, c) in cols.iter().enumerate() {
        basis.set_column(i, c);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::SeedableRng;
    let slack_scale = form.k.norm();
    let mut max_violation: f64 = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        let g = DVector::from_fn(cols.len(), |_, _| rng.gen_range(-1.0..1.0));
        let mut u = &basis * g;
        let nrm = u.norm();
        if nrm == 0.0 {
            continue;
        }
        u /= nrm;
        let q = form.a(&u, &u) - lambda * form.ip(&u, &u);
        let violation = q - tols.ineq_tol * slack_scale; // ‖u‖² = 1
        max_violation = max_violation.max(violation);
    }

    // dimension bound: dim span <= N_N(lambda) + mult_N(lambda)
    let (nn, _) = inertia::count_below(form, split, Problem::Neumann, lambda, Some(tols.cluster_rel));
    let dim_span = numeric_rank_m(&basis, &form.m, 1e-10);
    let bound = nn + spectra.neumann.multiplicity_at(lambda);

    let mut res = CheckResult {
        name: "filonov".into(),
        status: if max_violation <= 0.0 && dim_span <= bound {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        lambda: Some(lambda),
        interval: None,
        lhs: Some(dim_span as i64),
        rhs: Some(bound as i64),
        residual: Some(max_violation),
        diagnostics: vec![format!(
            "{} samples over a {}-column span, rank {dim_span} <= N_N + mult_N = {bound}",
            n_samples,
            cols.len()
        )],
    };
    if let CheckStatus::Fail = res.status {
        res.diagnostics.push(format!("max one-sided violation {max_violation:.3e}"));
    }
    Ok(res)
}

/// `n₋(R′(λ)) = N_N(λ) − N_D(λ)` at a non-eigenvalue λ.
pub fn check_resolvent(
    form: &FormPair,
    split: &IndexSplit,
    lambda: f64,
    tols: &Tolerances,
) -> Result<CheckResult> {
    let r = dtn::resolvent_difference(form, split, lambda, tols)?;
    let (nn, _) = inertia::count_below(form, split, Problem::Neumann, lambda, Some(tols.cluster_rel));
    let (nd, _) = inertia::count_below(form, split, Problem::Dirichlet, lambda, Some(tols.cluster_rel));
    let mut res = CheckResult::integer_identity(
        "resolvent",
        Some(lambda),
        r.inertia.n_minus as i64,
        nn as i64 - nd as i64,
    );
    res.diagnostics.push(format!("inertia(R')={} N_N={nn} N_D={nd}", r.inertia));
    Ok(res)
}

/// Paired mode: the jump of `n₋(R′)` across the eigenvalue `λ0` equals
/// `n_N(λ0) − n_D(λ0)`.
pub fn check_resolvent_jump(
    form: &FormPair,
    split: &IndexSplit,
    spectra: &ProblemSpectra,
    lambda0: f64,
    tols: &Tolerances,
) -> Result<CheckResult> {
    let gap = spectra.gap_around(lambda0, tols);
    let delta = if gap.is_finite() { gap / 2.0 } else { 0.5 };
    let lo = dtn::resolvent_difference(form, split, lambda0 - delta, tols)?;
    let hi = dtn::resolvent_difference(form, split, lambda0 + delta, tols)?;
    let data = spectra.at(form, lambda0, tols);
    let mut res = CheckResult::integer_identity(
        "resolvent_jump",
        Some(lambda0),
        hi.inertia.n_minus as i64 - lo.inertia.n_minus as i64,
        data.n_n as i64 - data.n_d as i64,
    );
    res.diagnostics.push(format!(
        "n_-(R') {} -> {} across {lambda0}",
        lo.inertia.n_minus, hi.inertia.n_minus
    ));
    Ok(res)
}

/// Interlacing chain. Items (1) and (2) of the eigenvalue-index
/// bookkeeping are asserted; the Payne form `λ_{N,k+1} ≤ λ_{D,k}` is
/// reported, and asserted only when `assert_payne` (continuum mode).
pub fn check_payne_chain(
    form: &FormPair,
    split: &IndexSplit,
    spectra: &ProblemSpectra,
    k_max: usize,
    assert_payne: bool,
    tols: &Tolerances,
) -> Result<(Vec<PayneRecord>, CheckResult)> {
    let dvals = &spectra.dirichlet.values;
    let nvals = &spectra.neumann.values;
    let kk = k_max.min(dvals.len());
    let mut records = Vec::with_capacity(kk);
    let mut res = CheckResult {
        name: "payne_chain".into(),
        status: CheckStatus::Pass,
        lambda: None,
        interval: None,
        lhs: None,
        rhs: None,
        residual: None,
        diagnostics: Vec::new(),
    };
    if kk < k_max {
        res.diagnostics.push(format!(
            "only {kk} Dirichlet eigenvalues computed; tail k in {}..{k_max} skipped",
            kk + 1
        ));
    }
    for k in 1..=kk {
        let lam_rep = {
            // cluster representative containing index k-1
            let idx = spectra.dirichlet.cluster_indices(dvals[k - 1]);
            idx.iter().map(|&i| dvals[i]).sum::<f64>() / idx.len() as f64
        };
        let data = spectra.at(form, lam_rep, tols);
        let frame = dtn::glambda_frame(form, split, lam_rep, None, tols);
        let sig = dtn::blambda_signature(&frame, tols)?;
        let p_k = sig.n_minus;
        let q_k = data.n_d;
        let ct = tols.cluster_tol(lam_rep);
        let cluster_first = k == 1 || dvals[k - 2] < lam_rep - ct;

        // (2): λ_{N,k+p_k} ≤ λ_{D,k}
        let margin_weak = nvals.get(k + p_k - 1).map(|&v| lam_rep - v);
        if let Some(m) = margin_weak {
            res = res.and_fail_if(
                m < -ct,
                format!("weak bound fails at k={k}: lambda_N,{} - lambda_D,{k} = {:.3e}", k + p_k, -m),
            );
        }
        // (1): λ_{N,k+q_k+p_k−1} < λ_{D,k} at cluster-first k
        let idx1 = k + q_k + p_k;
        let margin_strict = if cluster_first && idx1 >= 2 {
            nvals.get(idx1 - 2).map(|&v| lam_rep - v)
        } else {
            None
        };
        if let Some(m) = margin_strict {
            res = res.and_fail_if(
                m <= ct,
                format!("strict bound fails at k={k}: margin {m:.3e}"),
            );
        }
        // reported Payne form
        let lam_n_next = nvals.get(k).copied();
        let payne_holds = lam_n_next.map(|v| v <= lam_rep + ct);
        if assert_payne {
            if let Some(h) = payne_holds {
                res = res.and_fail_if(
                    !h,
                    format!(
                        "Payne form fails at k={k}: lambda_N,{} = {:.6} > lambda_D,{k} = {:.6}",
                        k + 1,
                        lam_n_next.unwrap(),
                        lam_rep
                    ),
                );
            }
        }
        records.push(PayneRecord {
            k,
            lambda_d_k: lam_rep,
            lambda_n_k_plus_1: lam_n_next,
            p_k,
            q_k,
            margin_strict,
            margin_weak,
            payne_holds,
        });
    }
    Ok((records, res))
}

/// `P′_B(0)v`: a-orthogonal projection of `v` onto `G₀` for the chosen
/// problem. Zero exactly when `v` satisfies the problem's boundary-row
/// equations (`v_Γ = 0` for D, `(Kv)_Γ = 0` for N).
pub fn project_g0(form: &FormPair, split: &IndexSplit, problem: Problem, v: &DVector<f64>) -> Result<DVector<f64>> {
    let kv = &form.k * v;
    match problem {
        Problem::Neumann => {
            let f = inertia::ldlt(&form.k, None);
            let mut rhs = DMatrix::zeros(form.n(), 1);
            for &i in &split.interior {
                rhs[(i, 0)] = kv[i];
            }
            let x = f.solve(&rhs)?;
            Ok(v - x.column(0).into_owned())
        }
        Problem::Dirichlet => {
            let f = inertia::ldlt(&split.ii(&form.k), None);
            let rhs = DMatrix::from_fn(split.interior.len(), 1, |r, _| kv[split.interior[r]]);
            let x = f.solve(&rhs)?;
            let mut out = v.clone();
            for (r, &i) in split.interior.iter().enumerate() {
                out[i] -= x[(r, 0)];
            }
            Ok(out)
        }
    }
}

/// `P′_B(λ)v = u₀ + λ R_B(λ) u₀` with `u₀ = P′_B(0)v`; lands in `G_λ`.
pub fn project_glambda(
    form: &FormPair,
    split: &IndexSplit,
    problem: Problem,
    lambda: f64,
    u0: &DVector<f64>,
) -> Result<DVector<f64>> {
    let a = &form.k - lambda * &form.m;
    match problem {
        Problem::Neumann => {
            let f = inertia::ldlt(&a, None);
            let rhs = DMatrix::from_fn(form.n(), 1, |r, _| (&form.m * u0)[r]);
            let x = f.solve(&rhs)?;
            Ok(u0 + lambda * x.column(0).into_owned())
        }
        Problem::Dirichlet => {
            let f = inertia::ldlt(&split.ii(&a), None);
            let mu = &form.m * u0;
            let rhs = DMatrix::from_fn(split.interior.len(), 1, |r, _| mu[split.interior[r]]);
            let x = f.solve(&rhs)?;
            let mut out = u0.clone();
            for (r, &i) in split.interior.iter().enumerate() {
                out[i] += lambda * x[(r, 0)];
            }
            Ok(out)
        }
    }
}

/// Monotonicity of `b[P′_B(λ)v]` on an eigenvalue-free grid:
/// nondecreasing for the Neumann problem, nonincreasing for Dirichlet;
/// strict when `v` violates the problem's boundary-row equations.
pub fn check_monotone(
    form: &FormPair,
    split: &IndexSplit,
    spectra: &ProblemSpectra,
    v: &DVector<f64>,
    lambda_grid: &[f64],
    problem: Problem,
    tols: &Tolerances,
) -> Result<CheckResult> {
    check_monotone_batch(form, split, spectra, std::slice::from_ref(v), lambda_grid, problem, tols)
}

/// [`check_monotone`] over a batch of probe vectors, sharing one
/// factorization per grid point.
pub fn check_monotone_batch(
    form: &FormPair,
    split: &IndexSplit,
    spectra: &ProblemSpectra,
    vs: &[DVector<f64>],
    lambda_grid: &[f64],
    problem: Problem,
    tols: &Tolerances,
) -> Result<CheckResult> {
    if lambda_grid.len() < 2 || lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("grid must be ascending with >= 2 points".into()));
    }
    if vs.is_empty() {
        return Err(Error::InvalidArgument("no probe vectors".into()));
    }
    let (lo, hi) = (lambda_grid[0], *lambda_grid.last().unwrap());
    let spectrum = match problem {
        Problem::Neumann => &spectra.neumann,
        Problem::Dirichlet => &spectra.dirichlet,
    };
    // the grid interval must avoid the chosen problem's spectrum entirely
    if spectrum
        .values
        .iter()
        .any(|&e| e >= lo - tols.cluster_tol(lo) && e <= hi + tols.cluster_tol(hi))
    {
        return Err(Error::InvalidArgument(format!(
            "grid [{lo}, {hi}] touches the {problem} spectrum"
        )));
    }

    let n = form.n();
    let mut u0s = DMatrix::zeros(n, vs.len());
    let mut strict_expected = Vec::with_capacity(vs.len());
    for (c, v) in vs.iter().enumerate() {
        u0s.set_column(c, &project_g0(form, split, problem, v)?);
        let strict = match problem {
            Problem::Neumann => {
                let kv = &form.k * v;
                split.boundary.iter().map(|&g| kv[g].abs()).fold(0.0f64, f64::max)
                    > 1e-10 * form.k.norm() * v.norm().max(1e-300)
            }
            Problem::Dirichlet => {
                split.boundary.iter().map(|&g| v[g].abs()).fold(0.0f64, f64::max)
                    > 1e-10 * v.norm().max(1e-300)
            }
        };
        strict_expected.push(strict);
    }

    // q[c][i] = b[P'_B(grid[i]) v_c], one factorization per grid point
    let mu0 = &form.m * &u0s;
    let mut q = vec![vec![0.0f64; lambda_grid.len()]; vs.len()];
    for (i, &lam) in lambda_grid.iter().enumerate() {
        let a = &form.k - lam * &form.m;
        let w_all = match problem {
            Problem::Neumann => {
                let f = inertia::ldlt(&a, None);
                let x = f.solve(&mu0)?;
                &u0s + lam * x
            }
            Problem::Dirichlet => {
                let f = inertia::ldlt(&split.ii(&a), None);
                let x = f.solve(&split.restrict_interior(&mu0))?;
                &u0s + lam * split.extend_interior(&x)
            }
        };
        let aw = &a * &w_all;
        for (c, qc) in q.iter_mut().enumerate() {
            qc[i] = w_all.column(c).dot(&aw.column(c));
        }
    }

    let mut max_rel_violation: f64 = 0.0;
    let mut strict_failures = 0usize;
    for (c, qc) in q.iter().enumerate() {
        let scale = qc.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let mut strictly = true;
        for w in qc.windows(2) {
            let step = match problem {
                Problem::Neumann => w[1] - w[0],
                Problem::Dirichlet => w[0] - w[1],
            };
            max_rel_violation = max_rel_violation.max(-step / scale);
            if step <= 0.0 {
                strictly = false;
            }
        }
        if strict_expected[c] && !strictly {
            strict_failures += 1;
        }
    }
    let pass = max_rel_violation <= tols.mono_tol && strict_failures == 0;
    let mut res = CheckResult {
        name: "monotone".into(),
        status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
        lambda: None,
        interval: Some((lo, hi)),
        lhs: None,
        rhs: None,
        residual: Some(max_rel_violation),
        diagnostics: vec![format!(
            "{problem}: {} vectors on {} points, strict failures {strict_failures}",
            vs.len(),
            lambda_grid.len()
        )],
    };
    if vs.len() == 1 && u0s.column(0).norm() <= 1e-14 * vs[0].norm().max(1e-300) {
        res.diagnostics
            .push("projector annihilates v (domain analogue); trace is identically zero".into());
    }
    Ok(res)
}

/// Identities of the a-orthogonal projection `Π₀` onto interior-supported
/// vectors: idempotence, a-self-adjointness, `(I−Π₀)H = G₀`,
/// `A_D⁻¹ = Π₀A_N⁻¹`, `dim range(I−Π₀) = |Γ|`, and agreement of
/// `(I−Π₀)` with the 0-harmonic extension on boundary indicators.
pub fn check_projection_identities(
    form: &FormPair,
    split: &IndexSplit,
    seed: u64,
    tols: &Tolerances,
) -> Result<CheckResult> {
    use rand::SeedableRng;
    let n = form.n();
    let kfac = inertia::ldlt(&form.k, None);
    let kii = inertia::ldlt(&split.ii(&form.k), None);

    // Π₀ = Ext ∘ K_II^{-1} ∘ (K·)_I as an explicit matrix
    let k_int_rows = split.interior_rows(&form.k);
    let x = kii.solve(&k_int_rows)?;
    let pi0 = split.extend_interior(&x);

    let scale = 1.0f64;
    let mut max_rel: f64 = 0.0;
    let mut track = |v: f64| max_rel = max_rel.max(v);

    track((&pi0 * &pi0 - &pi0).amax() / scale);
    let kpi = &form.k * &pi0;
    track((&kpi - kpi.transpose()).amax() / form.k.amax());
    let id = DMatrix::<f64>::identity(n, n);
    let complement = &id - &pi0;
    track((split.interior_rows(&form.k) * &complement).amax() / form.k.amax());

    // rank of the complementary projector (trace of a projector = rank)
    let rank = complement.trace().round() as i64;

    // A_D^{-1} f = Π₀ A_N^{-1} f on random data
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let f = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let mf = &form.m * &f;
        let full = kfac.solve(&DMatrix::from_fn(n, 1, |r, _| mf[r]))?;
        let ad = {
            let rhs = DMatrix::from_fn(split.interior.len(), 1, |r, _| mf[split.interior[r]]);
            let x = kii.solve(&rhs)?;
            split.extend_interior(&x)
        };
        let lhs = ad.column(0).into_owned();
        let rhs = &pi0 * full.column(0).into_owned();
        track((lhs - rhs).norm() / full.column(0).norm().max(1e-300));
    }

    // (I − Π₀) on boundary indicators equals the 0-harmonic extension
    let e0 = dtn::harmonic_extension(form, split, 0.0)?;
    for (c, &g) in split.boundary.iter().enumerate() {
        let ind = DVector::from_fn(n, |r, _| if r == g { 1.0 } else { 0.0 });
        let got = &complement * &ind;
        track((got - e0.column(c).into_owned()).norm());
    }

    // Π₀ fixes interior-supported vectors
    let mut v = DVector::zeros(n);
    v[split.interior[0]] = 1.0;
    track((&pi0 * &v - &v).norm());

    let pass = max_rel <= tols.proj_tol && rank == split.boundary.len() as i64;
    Ok(CheckResult {
        name: "projection_identities".into(),
        status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
        lambda: None,
        interval: None,
        lhs: Some(rank),
        rhs: Some(split.boundary.len() as i64),
        residual: Some(max_rel),
        diagnostics: vec![format!("max relative residual {max_rel:.3e}")],
    })
}

/// Options for [`run_suite`].
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Probe every eigenvalue below each problem's k-th.
    pub eigenvalue_depth: usize,
    pub random_lambdas: usize,
    pub random_intervals: usize,
    pub filonov_samples: usize,
    pub monotone_vectors: usize,
    pub payne_k_max: usize,
    /// Assert the Payne form (continuum-convergence mode) instead of
    /// reporting it.
    pub assert_payne: bool,
    pub crossing_count: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 0,
            eigenvalue_depth: 10,
            random_lambdas: 10,
            random_intervals: 5,
            filonov_samples: 100,
            monotone_vectors: 4,
            payne_k_max: 5,
            assert_payne: false,
            crossing_count: 5,
        }
    }
}

/// The full verification suite on one fixture, in declaration order.
pub fn run_suite(
    form: &FormPair,
    split: &IndexSplit,
    opts: &SuiteOptions,
    tols: &Tolerances,
) -> Result<(Vec<CheckResult>, Vec<PayneRecord>)> {
    use rand::SeedableRng;
    let spectra = ProblemSpectra::compute(form, split, tols)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();

    for lam in eigenvalue_probes(&spectra, opts.eigenvalue_depth, tols) {
        out.push(check_haynsworth(form, split, &spectra, lam, tols)?);
        out.push(check_kernel_dim(form, split, &spectra, lam, tols)?);
    }
    for lam in lowest_simple_eigenvalues(&spectra, opts.crossing_count, tols) {
        out.push(check_crossing(form, split, &spectra, lam, None, None, tols)?);
        out.push(check_resolvent_jump(form, split, &spectra, lam, tols)?);
    }
    for lam in random_noneigen_lambdas(&spectra, opts.random_lambdas, &mut rng, tols) {
        out.push(check_haynsworth(form, split, &spectra, lam, tols)?);
        out.push(check_resolvent(form, split, lam, tols)?);
    }
    for (a, b) in random_intervals(&spectra, opts.random_intervals, &mut rng, tols) {
        out.push(check_interval(form, split, &spectra, a, b, tols)?);
    }
    {
        let top = spectra.neumann.values.last().copied().unwrap_or(1.0);
        for frac in [0.35, 0.65, 0.95] {
            let mut lam = frac * top;
            for _ in 0..100 {
                if !spectra.is_eigenvalue(lam) {
                    break;
                }
                lam += 10.0 * tols.cluster_tol(lam);
            }
            if lam > 0.0 {
                out.push(check_filonov(form, split, &spectra, lam, opts.filonov_samples, opts.seed, tols)?);
            }
        }
    }
    // monotone traces inside the widest eigenvalue-free gap of each problem
    for problem in [Problem::Neumann, Problem::Dirichlet] {
        let spectrum = match problem {
            Problem::Neumann => &spectra.neumann,
            Problem::Dirichlet => &spectra.dirichlet,
        };
        let d = spectrum.distinct();
        let mut best: Option<(f64, f64)> = None;
        for w in d.windows(2) {
            if best.map(|(a, b)| b - a).unwrap_or(0.0) < w[1] - w[0] {
                best = Some((w[0], w[1]));
            }
        }
        if let Some((a, b)) = best {
            let (lo, hi) = (a + 0.15 * (b - a), b - 0.15 * (b - a));
            let grid: Vec<f64> = (0..20).map(|i| lo + (hi - lo) * i as f64 / 19.0).collect();
            let vs: Vec<DVector<f64>> = (0..opts.monotone_vectors)
                .map(|_| DVector::from_fn(form.n(), |_, _| rng.gen_range(-1.0..1.0)))
                .collect();
            out.push(check_monotone_batch(form, split, &spectra, &vs, &grid, problem, tols)?);
        }
    }
    out.push(check_projection_identities(form, split, opts.seed, tols)?);
    let (payne, payne_res) =
        check_payne_chain(form, split, &spectra, opts.payne_k_max, opts.assert_payne, tols)?;
    out.push(payne_res);
    Ok((out, payne))
}
