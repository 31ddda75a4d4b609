//! Dense symmetric and symmetric-definite generalized eigensolvers,
//! eigenspace extraction, counting functions, and common-eigenvector
//! detection.
//!
//! The backend is a cyclic Jacobi sweep: uniformly accurate and
//! deterministic, which the integer-exact identity checks depend on.
//! Generalized problems `K x = λ M x` are reduced by the Cholesky factor
//! of `M` and back-transformed.

use crate::mesh::{BoundaryEnds, FormPair, IndexSplit, MassMode};
use crate::{inertia, Error, Result, Tolerances};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Which eigenvalue problem a quantity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    /// The full pencil `(K, M)`; the boundary condition is natural.
    Neumann,
    /// The interior block `(K_II, M_II)`.
    Dirichlet,
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Problem::Neumann => write!(f, "neumann"),
            Problem::Dirichlet => write!(f, "dirichlet"),
        }
    }
}

/// Provenance tag on a [`Spectrum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumTag {
    Neumann,
    Dirichlet,
    Pencil,
    Plain,
}

/// Ascending eigenvalues with (optionally) M-orthonormal vectors.
///
/// For Dirichlet spectra the vectors are stored zero-extended to the full
/// node set.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Option<DMatrix<f64>>,
    pub tag: SpectrumTag,
    /// Relative cluster tolerance used for multiplicity decisions.
    pub cluster_rel: f64,
}

impl Spectrum {
    fn ctol(&self, lambda: f64) -> f64 {
        self.cluster_rel * lambda.abs().max(1.0)
    }

    /// Left-continuous counting function: values strictly below `λ`;
    /// values within the cluster tolerance of `λ` are not counted.
    pub fn counting(&self, lambda: f64) -> usize {
        let t = self.ctol(lambda);
        self.values.iter().filter(|&&v| v < lambda - t).count()
    }

    /// Multiplicity of the cluster at `λ` (0 when `λ` is not an eigenvalue).
    pub fn multiplicity_at(&self, lambda: f64) -> usize {
        let t = self.ctol(lambda);
        self.values.iter().filter(|&&v| (v - lambda).abs() <= t).count()
    }

    /// Column indices of the eigenvectors in the cluster at `λ`.
    pub fn cluster_indices(&self, lambda: f64) -> Vec<usize> {
        let t = self.ctol(lambda);
        (0..self.values.len())
            .filter(|&i| (self.values[i] - lambda).abs() <= t)
            .collect()
    }

    /// Cluster representatives: the mean of each multiplicity cluster.
    pub fn distinct(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.values.len() {
            let mut j = i;
            while j + 1 < self.values.len()
                && self.values[j + 1] - self.values[j] <= self.ctol(self.values[j])
            {
                j += 1;
            }
            out.push(self.values[i..=j].iter().sum::<f64>() / (j - i + 1) as f64);
            i = j + 1;
        }
        out
    }

    /// Eigenvalues (with multiplicity) inside a window. Endpoint
    /// membership is decided with the cluster tolerance.
    pub fn count_in_window(&self, a: f64, b: f64, include_a: bool, include_b: bool) -> usize {
        self.values
            .iter()
            .filter(|&&v| {
                let lo = if include_a { v >= a - self.ctol(a) } else { v > a + self.ctol(a) };
                let hi = if include_b { v <= b + self.ctol(b) } else { v < b - self.ctol(b) };
                lo && hi
            })
            .count()
    }
}

/// M-orthonormal basis of one eigenspace.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    pub lambda: f64,
    pub problem: Problem,
    /// Full-space columns (Dirichlet vectors zero-extended).
    pub basis: DMatrix<f64>,
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

fn offdiag_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            s += a[(p, q)] * a[(p, q)];
        }
    }
    (2.0 * s).sqrt()
}

/// Cyclic Jacobi on a symmetric matrix. Returns ascending eigenvalues and
/// orthonormal eigenvectors (columns), deterministically.
fn jacobi(mut a: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let mut v = DMatrix::<f64>::identity(n, n);
    if n <= 1 {
        let vals = if n == 1 { vec![a[(0, 0)]] } else { vec![] };
        return Ok((vals, v));
    }
    let tol = 1e-13 * a.norm().max(f64::MIN_POSITIVE);
    const MAX_SWEEPS: usize = 40;
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        if offdiag_norm(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // update the two rows/columns
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(p, k)] = a[(k, p)];
                        a[(k, q)] = s * akp + c * akq;
                        a[(q, k)] = a[(k, q)];
                    }
                }
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let off = offdiag_norm(&a);
    if !converged && off > tol {
        return Err(Error::SolverFailure {
            sweeps: MAX_SWEEPS,
            offdiag: off,
        });
    }
    // ascending sort, stable in the original index for determinism
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        a[(i, i)]
            .partial_cmp(&a[(j, j)])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let vals: Vec<f64> = idx.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        let mut column = v.column(i).into_owned();
        // deterministic sign: largest-magnitude entry positive
        let mut imax = 0;
        for r in 1..n {
            if column[r].abs() > column[imax].abs() {
                imax = r;
            }
        }
        if column[imax] < 0.0 {
            column.neg_mut();
        }
        vecs.set_column(col, &column);
    }
    Ok((vals, vecs))
}

/// Standard symmetric eigenproblem (symmetrized on entry).
pub fn eigh(s: &DMatrix<f64>) -> Result<Spectrum> {
    let sym = 0.5 * (s + s.transpose());
    let (values, vectors) = jacobi(sym)?;
    Ok(Spectrum {
        values,
        vectors: Some(vectors),
        tag: SpectrumTag::Plain,
        cluster_rel: Tolerances::default().cluster_rel,
    })
}

/// M-orthonormalize columns in place (modified Gram-Schmidt, two passes).
pub fn m_orthonormalize(x: &mut DMatrix<f64>, m: &DMatrix<f64>) {
    let cols = x.ncols();
    for _pass in 0..2 {
        for j in 0..cols {
            let mut col = x.column(j).into_owned();
            for i in 0..j {
                let ci = x.column(i);
                let proj = (ci.transpose() * m * &col)[(0, 0)];
                col -= proj * ci.into_owned();
            }
            let nrm = (col.transpose() * m * &col)[(0, 0)].max(0.0).sqrt();
            if nrm > 0.0 {
                col /= nrm;
            }
            x.set_column(j, &col);
        }
    }
}

/// Generalized symmetric-definite problem `K x = λ M x` via the Cholesky
/// reduction `M = L Lᵀ`; vectors are back-transformed and
/// re-M-orthonormalized.
pub fn eigh_gen(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Spectrum> {
    let l = inertia::cholesky_ll(m).map_err(|pivot| Error::InvalidMass { pivot })?;
    // C = L^{-1} K L^{-T}
    let w = l
        .solve_lower_triangular(k)
        .ok_or(Error::InvalidMass { pivot: 0 })?;
    let c = l
        .solve_lower_triangular(&w.transpose())
        .ok_or(Error::InvalidMass { pivot: 0 })?;
    let c = 0.5 * (&c + c.transpose());
    let (values, y) = jacobi(c)?;
    // X = L^{-T} Y
    let mut x = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or(Error::InvalidMass { pivot: 0 })?;
    m_orthonormalize(&mut x, m);
    Ok(Spectrum {
        values,
        vectors: Some(x),
        tag: SpectrumTag::Pencil,
        cluster_rel: Tolerances::default().cluster_rel,
    })
}

/// Left-continuous counting function of a computed spectrum.
pub fn counting(spectrum: &Spectrum, lambda: f64) -> usize {
    spectrum.counting(lambda)
}

/// Spectrum of the chosen problem; Dirichlet vectors are zero-extended.
pub fn problem_spectrum(
    form: &FormPair,
    split: &IndexSplit,
    problem: Problem,
    tol: &Tolerances,
) -> Result<Spectrum> {
    let mut s = match problem {
        Problem::Neumann => eigh_gen(&form.k, &form.m)?,
        Problem::Dirichlet => {
            let kii = split.ii(&form.k);
            let mii = split.ii(&form.m);
            let mut s = eigh_gen(&kii, &mii)?;
            if let Some(v) = s.vectors.take() {
                s.vectors = Some(split.extend_interior(&v));
            }
            s
        }
    };
    s.tag = match problem {
        Problem::Neumann => SpectrumTag::Neumann,
        Problem::Dirichlet => SpectrumTag::Dirichlet,
    };
    s.cluster_rel = tol.cluster_rel;
    Ok(s)
}

/// M-orthonormal basis of the eigenspace at `λ` (empty when `λ` is not an
/// eigenvalue within `tol_abs`).
pub fn eigenspace_basis(
    form: &FormPair,
    split: &IndexSplit,
    problem: Problem,
    lambda: f64,
    tol_abs: f64,
    tols: &Tolerances,
) -> Result<EigenBasis> {
    if tol_abs <= 0.0 || tol_abs.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "eigenspace tolerance must be positive, got {tol_abs}"
        )));
    }
    let spectrum = problem_spectrum(form, split, problem, tols)?;
    Ok(eigenspace_from_spectrum(&spectrum, problem, lambda, tol_abs))
}

/// Extract the eigenspace at `λ` from a precomputed spectrum.
pub fn eigenspace_from_spectrum(
    spectrum: &Spectrum,
    problem: Problem,
    lambda: f64,
    tol_abs: f64,
) -> EigenBasis {
    let v = spectrum
        .vectors
        .as_ref()
        .expect("spectrum must carry vectors");
    let cols: Vec<usize> = (0..spectrum.values.len())
        .filter(|&i| (spectrum.values[i] - lambda).abs() <= tol_abs)
        .collect();
    let basis = if cols.is_empty() {
        DMatrix::zeros(v.nrows(), 0)
    } else {
        v.select_columns(cols.iter())
    };
    EigenBasis {
        lambda,
        problem,
        basis,
    }
}

/// Dimension and basis of the common eigenspace at `λ`: Neumann
/// eigenvectors that are simultaneously Dirichlet eigenvectors, detected
/// by principal angles between the two eigenspaces in the M-inner
/// product.
pub fn common_eigenspace(
    form: &FormPair,
    neumann: &Spectrum,
    dirichlet: &Spectrum,
    lambda: f64,
    tols: &Tolerances,
) -> (usize, DMatrix<f64>) {
    let t = tols.cluster_tol(lambda);
    let vn = eigenspace_from_spectrum(neumann, Problem::Neumann, lambda, t).basis;
    let vd = eigenspace_from_spectrum(dirichlet, Problem::Dirichlet, lambda, t).basis;
    if vn.ncols() == 0 || vd.ncols() == 0 {
        return (0, DMatrix::zeros(form.n(), 0));
    }
    // cosines of the principal angles = singular values of V_Nᵀ M V_D
    let g = vn.transpose() * &form.m * &vd;
    let svd = g.svd(true, true);
    let v_t = svd.v_t.expect("svd requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] >= 1.0 - tols.common_angle)
        .collect();
    if keep.is_empty() {
        return (0, DMatrix::zeros(form.n(), 0));
    }
    // directions inside the Dirichlet eigenspace
    let w = v_t.transpose().select_columns(keep.iter());
    let mut basis = &vd * w;
    m_orthonormalize(&mut basis, &form.m);
    (keep.len(), basis)
}

/// Dirichlet/Neumann spectra of the lumped unit-square pencil via the
/// exact tensor decomposition: the 2-D pencil eigenvalues are pairwise
/// sums of the 1-D ones (shift counted once).
///
/// `intervals` is the number of cells per side (`h = 1/intervals`,
/// `intervals + 1` nodes per side covering the closed square).
pub fn square_lumped_spectra(intervals: usize, shift: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if intervals < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 cells per side".into(),
        ));
    }
    let n = intervals + 1;
    let h = 1.0 / intervals as f64;
    let domain = crate::mesh::build_interval(n, h, BoundaryEnds::Both)?;
    let (fp, split) = crate::mesh::assemble(&domain, shift, MassMode::Lumped)?;
    let tol = Tolerances::default();
    let neumann_1d = problem_spectrum(&fp, &split, Problem::Neumann, &tol)?;
    let dirichlet_1d = problem_spectrum(&fp, &split, Problem::Dirichlet, &tol)?;
    let sums = |v: &[f64]| {
        let mut out = Vec::with_capacity(v.len() * v.len());
        for &a in v {
            for &b in v {
                out.push(a + b - shift);
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out
    };
    Ok((sums(&neumann_1d.values), sums(&dirichlet_1d.values)))
}
