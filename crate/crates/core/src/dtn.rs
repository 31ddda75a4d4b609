//! The Dirichlet-to-Neumann Schur complement `S(λ)`, λ-harmonic
//! extensions, the pole-free pencil on the λ-harmonic subspace `G_λ`,
//! branch traces across λ-sweeps, and the resolvent difference.
//!
//! `S(λ)` has poles at Dirichlet eigenvalues; the pencil
//! `(b-form, a-Gram)` on `G_λ` does not — its eigenvalue branches pass
//! continuously through zero there, which is what the branch tracer
//! observes. Away from the poles the two carry the same signature, and
//! both are computed so every signature is cross-checked.

use crate::eigensolve::{self, Problem};
use crate::inertia::{self, InertiaTriple};
use crate::mesh::{FormPair, IndexSplit};
use crate::{Error, Result, Tolerances};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The Dirichlet-to-Neumann map at `λ`: Schur complement of the interior
/// block of `K − λM`.
#[derive(Clone, Debug)]
pub struct DtnMap {
    pub lambda: f64,
    pub s: DMatrix<f64>,
    /// Crude condition estimate of the interior solve behind the map.
    pub interior_condition: f64,
}

/// Basis of `G_λ` (nullspace of the interior rows of `K − λM`) with its
/// a-Gram and b-form matrices.
///
/// The basis itself is not canonical; only the pencil eigenvalues and the
/// inertia of `(b_form, a_gram)` are basis-invariant (congruence).
#[derive(Clone, Debug)]
pub struct GLambdaFrame {
    pub lambda: f64,
    /// Euclidean-orthonormal nullspace basis, one column per dimension.
    pub basis: DMatrix<f64>,
    /// `basisᵀ K basis` (symmetric positive definite).
    pub a_gram: DMatrix<f64>,
    /// `basisᵀ (K − λM) basis` (symmetric).
    pub b_form: DMatrix<f64>,
    /// Rank-decision values (pivoted R-diagonal magnitudes) and the
    /// threshold they were compared against.
    pub rank_values: Vec<f64>,
    pub rank_threshold: f64,
    /// Set when some rank-decision value fell within a factor 10 of the
    /// threshold on either side.
    pub rank_warning: bool,
}

impl GLambdaFrame {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Matched eigenvalue branches of the `G_μ` pencil across a μ-sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepFlag {
    Ok,
    Refined,
    /// The bisection depth limit was reached while chasing a crossing.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub branch: usize,
    /// `true`: the branch crosses + → − (a Neumann eigenvalue);
    /// `false`: − → + (a Dirichlet eigenvalue).
    pub from_positive: bool,
}

#[derive(Clone, Debug)]
pub struct BranchTrace {
    pub mu: Vec<f64>,
    /// Ascending pencil eigenvalues per grid point. Sorted per point, so
    /// nearest-value matching between consecutive points is the identity
    /// on indices.
    pub values: Vec<Vec<f64>>,
    pub flags: Vec<StepFlag>,
    pub crossings: Vec<Crossing>,
}

impl BranchTrace {
    /// Empirical Lipschitz estimate of the matched branches:
    /// `max |Δν| / Δμ` over consecutive grid points. Reported, never
    /// asserted — the grid can only witness continuity, not analyticity.
    pub fn max_branch_slope(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.mu.len().saturating_sub(1) {
            let dmu = self.mu[i + 1] - self.mu[i];
            if dmu <= 0.0 {
                continue;
            }
            let m = self.values[i].len().min(self.values[i + 1].len());
            for j in 0..m {
                worst = worst.max((self.values[i + 1][j] - self.values[i][j]).abs() / dmu);
            }
        }
        worst
    }
}

/// `R′(λ) = (A_N−λ)⁻¹ − (A_D−λ)⁻¹` represented as the symmetric matrix
/// `M(K−λM)⁻¹M − Ext(M_II(K_II−λM_II)⁻¹M_II)`, whose inertia equals the
/// operator's in the M-inner product by congruence.
///
/// The range of `R′` lies in `G_λ`, so the inertia is evaluated exactly
/// as the inertia of the compression onto a `G_λ` basis plus
/// `n − dim G_λ` structural zeros; `range_residual` records how well the
/// computed matrix satisfies the range law.
#[derive(Clone, Debug)]
pub struct ResolventDiff {
    pub lambda: f64,
    pub matrix: DMatrix<f64>,
    pub inertia: InertiaTriple,
    pub range_residual: f64,
}

fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (a + a.transpose())
}

/// λ-harmonic extension: column `g` holds boundary values = indicator of
/// boundary node `g` and interior values solving the interior rows of
/// `(K − λM) u = 0`.
pub fn harmonic_extension(form: &FormPair, split: &IndexSplit, lambda: f64) -> Result<DMatrix<f64>> {
    let a = &form.k - lambda * &form.m;
    let aii = split.ii(&a);
    let f = inertia::ldlt(&aii, None);
    if f.inertia.n_zero > 0 {
        return Err(Error::DirichletEigenvalue {
            lambda,
            n_zero: f.inertia.n_zero,
        });
    }
    let rhs = -split.ib(&a);
    let x = f.solve(&rhs)?;
    let n = split.n();
    let ng = split.boundary.len();
    let mut e = DMatrix::zeros(n, ng);
    for (r, &i) in split.interior.iter().enumerate() {
        for c in 0..ng {
            e[(i, c)] = x[(r, c)];
        }
    }
    for (c, &g) in split.boundary.iter().enumerate() {
        e[(g, c)] = 1.0;
    }
    Ok(e)
}

/// The Schur complement `S(λ) = A_ΓΓ − A_ΓI A_II⁻¹ A_IΓ` of `A = K − λM`.
pub fn schur_dtn(form: &FormPair, split: &IndexSplit, lambda: f64) -> Result<DtnMap> {
    let a = &form.k - lambda * &form.m;
    let aii = split.ii(&a);
    let f = inertia::ldlt(&aii, None);
    if f.inertia.n_zero > 0 {
        return Err(Error::DirichletEigenvalue {
            lambda,
            n_zero: f.inertia.n_zero,
        });
    }
    let aig = split.ib(&a);
    let x = f.solve(&aig)?;
    let s_raw = split.bb(&a) - aig.transpose() * x;
    let scale = s_raw.amax().max(f64::MIN_POSITIVE);
    let asym = (&s_raw - s_raw.transpose()).amax();
    if asym > 1e-6 * scale {
        return Err(Error::CrossCheck(format!(
            "Schur complement asymmetry {asym:.3e} at lambda = {lambda}"
        )));
    }
    Ok(DtnMap {
        lambda,
        s: sym(&s_raw),
        interior_condition: f.condition_estimate(),
    })
}

/// Householder QR with column pivoting of `b`, accumulating the full `Q`.
/// Returns `(q, rdiag)` where `rdiag` holds the pivoted `|R_ii|`.
fn qrcp_full_q(b: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = b.nrows();
    let m = b.ncols();
    let steps = n.min(m);
    let mut work = b.clone();
    let mut reflectors: Vec<(usize, DVector<f64>, f64)> = Vec::with_capacity(steps);
    let mut rdiag = Vec::with_capacity(steps);

    for j in 0..steps {
        // pivot: remaining column with the largest trailing norm (first wins ties)
        let mut best = j;
        let mut best_norm = -1.0;
        for c in j..m {
            let mut s = 0.0;
            for r in j..n {
                s += work[(r, c)] * work[(r, c)];
            }
            if s > best_norm {
                best_norm = s;
                best = c;
            }
        }
        if best != j {
            work.swap_columns(j, best);
        }
        let norm = best_norm.max(0.0).sqrt();
        rdiag.push(norm);
        if norm == 0.0 {
            continue;
        }
        let x0 = work[(j, j)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let mut v = DVector::zeros(n - j);
        for r in j..n {
            v[r - j] = work[(r, j)];
        }
        v[0] -= alpha;
        let vtv = v.dot(&v);
        if vtv == 0.0 {
            continue;
        }
        let tau = 2.0 / vtv;
        // apply H = I - tau v vᵀ to the remaining columns
        for c in j..m {
            let mut dot = 0.0;
            for r in j..n {
                dot += v[r - j] * work[(r, c)];
            }
            let dot = tau * dot;
            for r in j..n {
                work[(r, c)] -= dot * v[r - j];
            }
        }
        work[(j, j)] = alpha;
        reflectors.push((j, v, tau));
    }

    // Q = H_0 H_1 ... applied to the identity, last reflector first
    let mut q = DMatrix::<f64>::identity(n, n);
    for &(j, ref v, tau) in reflectors.iter().rev() {
        for c in 0..n {
            let mut dot = 0.0;
            for r in j..n {
                dot += v[r - j] * q[(r, c)];
            }
            let dot = tau * dot;
            for r in j..n {
                q[(r, c)] -= dot * v[r - j];
            }
        }
    }
    (q, rdiag)
}

/// Frame of `G_λ` — valid at every real `λ`, including Dirichlet
/// eigenvalues.
///
/// `tau_override` replaces the default rank threshold
/// `max(|I|, n) · ε · σ_max · rank_slack`.
pub fn glambda_frame(
    form: &FormPair,
    split: &IndexSplit,
    lambda: f64,
    tau_override: Option<f64>,
    tols: &Tolerances,
) -> GLambdaFrame {
    let n = split.n();
    let a = &form.k - lambda * &form.m;
    let rows = split.interior_rows(&a);
    let bt = rows.transpose(); // n × |I|
    let (q, rdiag) = qrcp_full_q(&bt);
    let sigma_max = rdiag.first().copied().unwrap_or(0.0);
    let tau = tau_override.unwrap_or_else(|| {
        let dim_factor = split.interior.len().max(n) as f64;
        dim_factor * f64::EPSILON * sigma_max.max(f64::MIN_POSITIVE) * tols.rank_slack
    });
    let mut rank = 0;
    for &v in &rdiag {
        if v > tau {
            rank += 1;
        } else {
            break;
        }
    }
    let rank_warning = rdiag.iter().any(|&v| v > tau / 10.0 && v < tau * 10.0);
    let cols: Vec<usize> = (rank..n).collect();
    let basis = q.select_columns(cols.iter());
    let a_gram = sym(&(basis.transpose() * &form.k * &basis));
    let b_form = sym(&(basis.transpose() * &a * &basis));
    GLambdaFrame {
        lambda,
        basis,
        a_gram,
        b_form,
        rank_values: rdiag,
        rank_threshold: tau,
        rank_warning,
    }
}

/// Ascending eigenvalues of the pencil `(b_form, a_gram)` — the spectrum
/// of the pole-free operator on `G_λ`.
pub fn blambda_eigenvalues(frame: &GLambdaFrame) -> Result<Vec<f64>> {
    let s = eigensolve::eigh_gen(&frame.b_form, &frame.a_gram)?;
    Ok(s.values)
}

fn pencil_zero_tol(values: &[f64], tols: &Tolerances) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    tols.pencil_zero_rel * scale.max(1.0)
}

/// `(dim G_λ⁻, dim G_λ⁰, dim G_λ⁺)`: sign counts of the pencil
/// eigenvalues, cross-checked against the LDLᵀ inertia of the b-form
/// (equal by Sylvester's law; a mismatch is reported as an error).
///
/// The b-form cutoff is scaled by the a-Gram so the two classifications
/// stay aligned even when the b-form is entirely near zero.
pub fn blambda_signature(frame: &GLambdaFrame, tols: &Tolerances) -> Result<InertiaTriple> {
    let nu = blambda_eigenvalues(frame)?;
    let t_nu = pencil_zero_tol(&nu, tols);
    let from_pencil = InertiaTriple::from_values(&nu, t_nu);
    let t_b = t_nu * frame.a_gram.amax().max(f64::MIN_POSITIVE);
    let from_ldlt = inertia::ldlt_scaled(&frame.b_form, t_b).inertia;
    if from_pencil != from_ldlt {
        return Err(Error::CrossCheck(format!(
            "pencil signature {from_pencil} != b-form LDLT inertia {from_ldlt} at lambda = {}",
            frame.lambda
        )));
    }
    Ok(from_pencil)
}

/// Inertia of `S(λ)` with a zero cutoff scaled by the full shifted
/// matrix — `S` itself is near zero at a Neumann eigenvalue when the
/// boundary is small, so its own norm is not a usable reference.
pub fn dtn_inertia(form: &FormPair, map: &DtnMap, tols: &Tolerances) -> InertiaTriple {
    let scale = (&form.k - map.lambda * &form.m).amax();
    inertia::ldlt_scaled(&map.s, tols.pencil_zero_rel * scale.max(f64::MIN_POSITIVE)).inertia
}

fn signed_classes(nu: &[f64], tol: f64) -> Vec<i8> {
    nu.iter()
        .map(|&v| {
            if v.abs() <= tol {
                0
            } else if v < 0.0 {
                -1
            } else {
                1
            }
        })
        .collect()
}

/// Pencil eigenvalue branches of `B_μ` over `[mu_from, mu_to]` on
/// `steps + 1` grid points, with adaptive bisection where a branch
/// changes sign.
pub fn blambda_branches(
    form: &FormPair,
    split: &IndexSplit,
    mu_from: f64,
    mu_to: f64,
    steps: usize,
    tols: &Tolerances,
) -> Result<BranchTrace> {
    if mu_from >= mu_to || mu_from.is_nan() || mu_to.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "need mu_from < mu_to, got [{mu_from}, {mu_to}]"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidArgument("need at least 2 sweep steps".into()));
    }

    let eval = |mu: f64| -> Result<Vec<f64>> {
        let frame = glambda_frame(form, split, mu, None, tols);
        blambda_eigenvalues(&frame)
    };

    let coarse: Vec<f64> = (0..=steps)
        .map(|i| mu_from + (mu_to - mu_from) * i as f64 / steps as f64)
        .collect();
    let coarse_vals: Vec<Vec<f64>> = coarse
        .par_iter()
        .map(|&mu| eval(mu))
        .collect::<Result<_>>()?;

    // refine each coarse interval that contains a sign change
    let mut mu_out: Vec<f64> = Vec::new();
    let mut val_out: Vec<Vec<f64>> = Vec::new();
    let mut flag_out: Vec<StepFlag> = Vec::new();

    const MAX_DEPTH: usize = 12;

    struct Refiner<'a> {
        eval: &'a dyn Fn(f64) -> Result<Vec<f64>>,
        tols: &'a Tolerances,
    }
    impl Refiner<'_> {
        /// Emits the open interval (a, b): interior refinement points only.
        #[allow(clippy::too_many_arguments)]
        fn refine(
            &self,
            mu_a: f64,
            va: &[f64],
            mu_b: f64,
            vb: &[f64],
            scale: &[f64],
            depth: usize,
            mu_out: &mut Vec<f64>,
            val_out: &mut Vec<Vec<f64>>,
            flag_out: &mut Vec<StepFlag>,
        ) -> Result<()> {
            let m = va.len().min(vb.len());
            let tol = pencil_zero_tol(va, self.tols).max(pencil_zero_tol(vb, self.tols));
            let needs = (0..m).any(|j| {
                let (a, b) = (va[j], vb[j]);
                a.abs() > tol
                    && b.abs() > tol
                    && a.signum() != b.signum()
                    && (a - b).abs() >= 0.1 * scale[j.min(scale.len().saturating_sub(1))]
            });
            if !needs {
                return Ok(());
            }
            let mid = 0.5 * (mu_a + mu_b);
            let vm = (self.eval)(mid)?;
            if depth + 1 >= MAX_DEPTH {
                mu_out.push(mid);
                val_out.push(vm);
                flag_out.push(StepFlag::Unresolved);
                return Ok(());
            }
            self.refine(mu_a, va, mid, &vm, scale, depth + 1, mu_out, val_out, flag_out)?;
            mu_out.push(mid);
            val_out.push(vm.clone());
            flag_out.push(StepFlag::Refined);
            self.refine(mid, &vm, mu_b, vb, scale, depth + 1, mu_out, val_out, flag_out)?;
            Ok(())
        }
    }
    let refiner = Refiner { eval: &eval, tols };

    for i in 0..coarse.len() {
        mu_out.push(coarse[i]);
        val_out.push(coarse_vals[i].clone());
        flag_out.push(StepFlag::Ok);
        if i + 1 < coarse.len() {
            let scale: Vec<f64> = coarse_vals[i]
                .iter()
                .zip(coarse_vals[i + 1].iter())
                .map(|(&a, &b)| a.abs().max(b.abs()).max(1e-300))
                .collect();
            refiner.refine(
                coarse[i],
                &coarse_vals[i],
                coarse[i + 1],
                &coarse_vals[i + 1],
                &scale,
                0,
                &mut mu_out,
                &mut val_out,
                &mut flag_out,
            )?;
        }
    }

    // crossing inventory per branch index
    let mut crossings = Vec::new();
    let nb = val_out.iter().map(|v| v.len()).min().unwrap_or(0);
    for j in 0..nb {
        let tol = val_out
            .iter()
            .map(|v| pencil_zero_tol(v, tols))
            .fold(0.0f64, f64::max);
        let classes: Vec<i8> = val_out.iter().map(|v| signed_classes(v, tol)[j]).collect();
        let mut last_signed: Option<(usize, i8)> = None;
        for (i, &c) in classes.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if let Some((ip, cp)) = last_signed {
                if cp != c {
                    crossings.push(Crossing {
                        mu_lo: mu_out[ip],
                        mu_hi: mu_out[i],
                        branch: j,
                        from_positive: cp > 0,
                    });
                }
            }
            last_signed = Some((i, c));
        }
    }
    crossings.sort_by(|a, b| a.mu_lo.partial_cmp(&b.mu_lo).unwrap());

    Ok(BranchTrace {
        mu: mu_out,
        values: val_out,
        flags: flag_out,
        crossings,
    })
}

/// Resolvent difference at a `λ` that is an eigenvalue of neither
/// problem.
pub fn resolvent_difference(
    form: &FormPair,
    split: &IndexSplit,
    lambda: f64,
    tols: &Tolerances,
) -> Result<ResolventDiff> {
    for problem in [Problem::Neumann, Problem::Dirichlet] {
        let (_, n_at) = inertia::count_below(form, split, problem, lambda, Some(tols.cluster_rel));
        if n_at > 0 {
            return Err(Error::SpectralPoint {
                lambda,
                problem: problem.to_string(),
            });
        }
    }
    let a = &form.k - lambda * &form.m;
    let full = inertia::ldlt(&a, None);
    let interior = inertia::ldlt(&split.ii(&a), None);
    // M (K-λM)^{-1} M
    let xn = full.solve(&form.m)?;
    let wn = &form.m * xn;
    // Ext( M_II (K_II-λM_II)^{-1} M_II )
    let mii = split.ii(&form.m);
    let xd = interior.solve(&mii)?;
    let wd_ii = &mii * xd;
    let n = split.n();
    let mut wd = DMatrix::zeros(n, n);
    for (r, &i) in split.interior.iter().enumerate() {
        for (c, &j) in split.interior.iter().enumerate() {
            wd[(i, j)] = wd_ii[(r, c)];
        }
    }
    let w = sym(&(wn - wd));

    // range law R'H ⊂ G_λ: W = B (BᵀWB) Bᵀ for an orthonormal basis B of
    // G_λ, which also exposes the nonzero spectrum at its natural scale
    let frame = glambda_frame(form, split, lambda, None, tols);
    let b = &frame.basis;
    let compressed = sym(&(b.transpose() * &w * b));
    let range_residual = (&w - b * &compressed * b.transpose()).amax() / w.amax().max(f64::MIN_POSITIVE);
    if range_residual > 1e-6 {
        return Err(Error::CrossCheck(format!(
            "resolvent difference violates the range law at lambda = {lambda} (residual {range_residual:.3e})"
        )));
    }
    let small = inertia::ldlt(&compressed, None).inertia;
    let inertia = InertiaTriple {
        n_minus: small.n_minus,
        n_zero: small.n_zero + n - frame.dim(),
        n_plus: small.n_plus,
    };
    Ok(ResolventDiff {
        lambda,
        matrix: w,
        inertia,
        range_residual,
    })
}

/// Long-format CSV export of a branch trace: `mu,branch,nu,flag`.
pub fn trace_to_csv(trace: &BranchTrace) -> String {
    let mut out = String::from("mu,branch,nu,flag\n");
    for (i, mu) in trace.mu.iter().enumerate() {
        let flag = match trace.flags[i] {
            StepFlag::Ok => "ok",
            StepFlag::Refined => "refined",
            StepFlag::Unresolved => "unresolved",
        };
        for (j, nu) in trace.values[i].iter().enumerate() {
            out.push_str(&format!("{mu:.17e},{j},{nu:.17e},{flag}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;
    use rand::Rng as _;
    use rand::SeedableRng as _;

    const LAM_D1: f64 = 1.381966011250105; // (5 - sqrt 5) / 2

    #[test]
    fn harmonic_extension_p3_hand_solve() {
        let (fp, split) = fixtures::p3();
        let e = harmonic_extension(&fp, &split, 0.0).unwrap();
        // oracle: [[2,-1],[-1,3]] u = (0, 1)ᵀ -> u = (1/5, 2/5)
        assert_relative_eq!(e[(0, 0)], 0.2, epsilon = 1e-12);
        assert_relative_eq!(e[(1, 0)], 0.4, epsilon = 1e-12);
        assert_relative_eq!(e[(2, 0)], 1.0, epsilon = 1e-12);

        let err = harmonic_extension(&fp, &split, LAM_D1).unwrap_err();
        match err {
            Error::DirichletEigenvalue { n_zero, .. } => assert_eq!(n_zero, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn harmonic_extension_ignores_boundary_free_component() {
        let (fp, split) = fixtures::p3_with_free_triangle();
        let e = harmonic_extension(&fp, &split, 0.0).unwrap();
        for node in 3..6 {
            assert!(e[(node, 0)].abs() <= 1e-12);
        }
    }

    #[test]
    fn schur_p3_exact_values() {
        let (fp, split) = fixtures::p3();
        // frozen oracles: exact rational hand evaluations
        let cases = [
            (0.9, 341.0 / 1310.0),
            (1.1, -261.0 / 710.0),
            (1.3, -567.0 / 190.0),
            (1.45, 5049.0 / 1180.0),
            (3.0, -2.0),
            (0.0, 1.6),
        ];
        for (lam, want) in cases {
            let s = schur_dtn(&fp, &split, lam).unwrap();
            assert_eq!(s.s.nrows(), 1);
            assert_relative_eq!(s.s[(0, 0)], want, max_relative = 1e-12);
        }
        // below the Neumann spectrum the Schur complement is positive definite
        let s = schur_dtn(&fp, &split, 0.5).unwrap();
        assert!(s.s[(0, 0)] > 0.0);
    }

    #[test]
    fn glambda_dimensions_and_signs() {
        let tols = Tolerances::default();
        let (fp, split) = fixtures::p3();

        let f3 = glambda_frame(&fp, &split, 3.0, None, &tols);
        assert_eq!(f3.dim(), 1);
        let nu = blambda_eigenvalues(&f3).unwrap();
        assert!(nu[0] < 0.0); // sign(nu) = sign(S(3)) = -1
        assert_eq!(
            blambda_signature(&f3, &tols).unwrap(),
            InertiaTriple { n_minus: 1, n_zero: 0, n_plus: 0 }
        );

        // at lambda = 0 the b-form equals the a-Gram: all pencil eigenvalues 1
        let f0 = glambda_frame(&fp, &split, 0.0, None, &tols);
        for nu in blambda_eigenvalues(&f0).unwrap() {
            assert_relative_eq!(nu, 1.0, epsilon = 1e-12);
        }
        assert_eq!(
            blambda_signature(&f0, &tols).unwrap(),
            InertiaTriple { n_minus: 0, n_zero: 0, n_plus: 1 }
        );

        // at the Neumann eigenvalue 1 the single branch sits at zero
        let f1 = glambda_frame(&fp, &split, 1.0, None, &tols);
        assert_eq!(
            blambda_signature(&f1, &tols).unwrap(),
            InertiaTriple { n_minus: 0, n_zero: 1, n_plus: 0 }
        );

        // at the Dirichlet eigenvalue the nullspace is the zero-extended
        // eigenvector; the b-form has exactly one zero eigenvalue
        let fd = glambda_frame(&fp, &split, LAM_D1, None, &tols);
        assert_eq!(fd.dim(), 1);
        assert_eq!(
            blambda_signature(&fd, &tols).unwrap(),
            InertiaTriple { n_minus: 0, n_zero: 1, n_plus: 0 }
        );
        // the basis vector is the Dirichlet eigenvector (vanishes on the boundary)
        assert!(fd.basis[(2, 0)].abs() <= 1e-9);
    }

    #[test]
    fn frame_basis_is_orthonormal_nullspace() {
        let tols = Tolerances::default();
        for (name, (fp, split)) in fixtures::standard_set() {
            for lam in [0.0, 1.0, 2.7] {
                let f = glambda_frame(&fp, &split, lam, None, &tols);
                let b = &f.basis;
                let eye = DMatrix::identity(b.ncols(), b.ncols());
                assert!((b.transpose() * b - eye).amax() <= 1e-12, "{name}");
                let rows = split.interior_rows(&(&fp.k - lam * &fp.m));
                let resid = rows * b;
                for c in 0..resid.ncols() {
                    assert!(
                        resid.column(c).norm() <= f.rank_threshold.max(1e-12),
                        "{name}: interior residual at lambda {lam}"
                    );
                }
                // a-Gram is SPD
                assert!(inertia::cholesky_ll(&f.a_gram).is_ok(), "{name}");
            }
        }
    }

    #[test]
    fn schur_inertia_matches_pencil_signature() {
        let tols = Tolerances::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(100);
        let mut checked = 0;
        for trial in 0..200 {
            let (fp, split) = fixtures::random_graph(&mut rng, 14, trial % 4 == 0);
            let lam = rng.gen_range(0.2..6.0);
            let s = match schur_dtn(&fp, &split, lam) {
                Ok(s) => s,
                Err(_) => continue, // landed on a Dirichlet eigenvalue
            };
            let si = dtn_inertia(&fp, &s, &tols);
            let frame = glambda_frame(&fp, &split, lam, None, &tols);
            let pi = blambda_signature(&frame, &tols).unwrap();
            // common eigenvectors only add zeros to the pencil
            assert_eq!(si.n_minus, pi.n_minus, "trial {trial}");
            assert_eq!(si.n_plus, pi.n_plus, "trial {trial}");
            assert!(pi.n_zero >= si.n_zero, "trial {trial}");
            checked += 1;
        }
        assert!(checked >= 190);
    }

    #[test]
    fn haynsworth_additivity_random() {
        // n_-(K - λM) = n_-(K_II - λM_II) + n_-(S(λ)) away from Dirichlet eigenvalues
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for trial in 0..100 {
            let (fp, split) = fixtures::random_graph(&mut rng, 20, false);
            let lam = rng.gen_range(0.2..6.0);
            let s = match schur_dtn(&fp, &split, lam) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let a = &fp.k - lam * &fp.m;
            let full = inertia::ldlt(&a, None).inertia;
            let part = inertia::ldlt(&split.ii(&a), None).inertia;
            let schur = inertia::ldlt(&s.s, None).inertia;
            assert_eq!(full.n_minus, part.n_minus + schur.n_minus, "trial {trial}");
        }
    }

    #[test]
    fn branch_patterns_through_crossings() {
        let tols = Tolerances::default();
        let (fp, split) = fixtures::p3();

        // across the Neumann eigenvalue 1: + -> 0 -> -
        let t = blambda_branches(&fp, &split, 0.9, 1.1, 2, &tols).unwrap();
        let first = t.values.first().unwrap()[0];
        let last = t.values.last().unwrap()[0];
        assert!(first > 0.0 && last < 0.0);
        assert_eq!(t.crossings.len(), 1);
        assert!(t.crossings[0].from_positive);

        // across the Dirichlet eigenvalue ~1.382 (an S-pole): - -> 0 -> +
        // and the branch stays bounded through it
        let t = blambda_branches(&fp, &split, 1.3, 1.45, 3, &tols).unwrap();
        let first = t.values.first().unwrap()[0];
        let last = t.values.last().unwrap()[0];
        assert!(first < 0.0 && last > 0.0);
        assert_eq!(t.crossings.len(), 1);
        assert!(!t.crossings[0].from_positive);
        for v in &t.values {
            assert!(v[0].abs() < 10.0, "branch blew up: {v:?}");
        }

        // eigenvalue-free window: constant signs, no crossings
        let t = blambda_branches(&fp, &split, 2.2, 2.8, 4, &tols).unwrap();
        assert!(t.crossings.is_empty());
        assert!(t.values.iter().all(|v| v[0] < 0.0));
    }

    #[test]
    fn branch_sweep_finds_all_p3_crossings() {
        let tols = Tolerances::default();
        let (fp, split) = fixtures::p3();
        let t = blambda_branches(&fp, &split, 0.5, 4.5, 200, &tols).unwrap();
        let expected = [
            (1.0, true),
            (LAM_D1, false),
            (2.0, true),
            ((5.0 + 5.0_f64.sqrt()) / 2.0, false),
            (4.0, true),
        ];
        assert_eq!(t.crossings.len(), expected.len());
        for (c, (lam, from_pos)) in t.crossings.iter().zip(expected) {
            assert!(
                c.mu_lo <= lam + 1e-9 && lam - 1e-9 <= c.mu_hi,
                "crossing bracket [{}, {}] misses {lam}",
                c.mu_lo,
                c.mu_hi
            );
            assert_eq!(c.from_positive, from_pos, "direction at {lam}");
        }
        let csv = trace_to_csv(&t);
        assert!(csv.starts_with("mu,branch,nu,flag\n"));
        // continuity witness: the pole-free branch has a finite slope
        let slope = t.max_branch_slope();
        assert!(slope.is_finite() && slope > 0.0);
    }

    #[test]
    fn resolvent_difference_p3() {
        let tols = Tolerances::default();
        let (fp, split) = fixtures::p3();

        let r = resolvent_difference(&fp, &split, 3.0, &tols).unwrap();
        assert_eq!(r.inertia.n_minus, 1); // N_N(3) - N_D(3) = 2 - 1

        let r = resolvent_difference(&fp, &split, 0.5, &tols).unwrap();
        assert_eq!(r.inertia.n_minus, 0);
        assert!(r.range_residual <= 1e-10);

        // at lambda = 0: R' = K^{-1} - Ext(K_II^{-1}), no negative part
        let r = resolvent_difference(&fp, &split, 0.0, &tols).unwrap();
        assert_eq!(r.inertia.n_minus, 0);

        // rank <= dim G_lambda = 1: columns lie in G_lambda
        let rows = split.interior_rows(&(&fp.k - 3.0 * &fp.m));
        let resid = rows * resolvent_difference(&fp, &split, 3.0, &tols).unwrap().matrix;
        assert!(resid.amax() <= 1e-10);
        let r3 = resolvent_difference(&fp, &split, 3.0, &tols).unwrap();
        assert_eq!(r3.inertia.n_minus + r3.inertia.n_plus, 1);

        // jump across the eigenvalue 1 equals n_N - n_D = 1
        let lo = resolvent_difference(&fp, &split, 0.9, &tols).unwrap();
        let hi = resolvent_difference(&fp, &split, 1.1, &tols).unwrap();
        assert_eq!(hi.inertia.n_minus - lo.inertia.n_minus, 1);

        assert!(matches!(
            resolvent_difference(&fp, &split, 1.0, &tols),
            Err(Error::SpectralPoint { .. })
        ));
    }

    #[test]
    fn resolvent_oracle_direct_assembly() {
        // independent oracle: direct inverse assembly via nalgebra
        let (fp, split) = fixtures::p3();
        let lam = 3.0;
        let a = &fp.k - lam * &fp.m;
        let inv_full = a.clone().try_inverse().unwrap();
        let inv_int = split.ii(&a).try_inverse().unwrap();
        let mut wd = DMatrix::zeros(3, 3);
        for (r, &i) in split.interior.iter().enumerate() {
            for (c, &j) in split.interior.iter().enumerate() {
                wd[(i, j)] = inv_int[(r, c)];
            }
        }
        let w_oracle = inv_full - wd;
        let tols = Tolerances::default();
        let r = resolvent_difference(&fp, &split, lam, &tols).unwrap();
        assert!((r.matrix - w_oracle).amax() <= 1e-10);
    }
}
