//! Numerical laboratory for comparing Dirichlet and Neumann eigenvalue
//! counting functions on discrete domains.
//!
//! The crate builds quadratic-form pairs (stiffness `K`, mass `M`) for
//! 1-D chains, masked 2-D grids and weighted graphs with designated
//! boundary vertices, then realizes the two classical eigenvalue
//! problems as exact matrix objects:
//!
//! * the **Neumann** problem is the full pencil `(K, M)`;
//! * the **Dirichlet** problem is the interior block `(K_II, M_II)`;
//! * the **Dirichlet-to-Neumann map** `S(λ)` is the Schur complement of
//!   the interior block of `K − λM`;
//! * the pole-free operator `B_λ` is the pencil `(b-form, a-Gram)` on the
//!   λ-harmonic subspace `G_λ` (vectors whose interior rows of `K − λM`
//!   vanish).
//!
//! On top of those, [`verify`] packages every identity and inequality
//! relating the two counting functions — Schur-complement inertia
//! additivity, the kernel law, eigenvalue branch crossings, interlacing
//! chains, the resolvent-difference law, and projection monotonicity —
//! as executable pass/fail checks with independent algorithmic paths for
//! each side of each identity.

pub mod dtn;
pub mod eigensolve;
pub mod fixtures;
pub mod inertia;
pub mod mesh;
pub mod verify;

pub use dtn::{BranchTrace, DtnMap, GLambdaFrame, ResolventDiff};
pub use eigensolve::{EigenBasis, Problem, Spectrum};
pub use inertia::{InertiaTriple, LdltFactorization};
pub use mesh::{DomainSpec, FormPair, IndexSplit, MassMode};
pub use verify::{CheckResult, CheckStatus, PayneRecord};

use serde::{Deserialize, Serialize};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("assembly failure: matrix not positive definite at pivot {pivot}")]
    AssemblyFailure { pivot: usize },
    #[error("mass matrix not positive definite at pivot {pivot}")]
    InvalidMass { pivot: usize },
    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal {offdiag:.3e})")]
    SolverFailure { sweeps: usize, offdiag: f64 },
    #[error("lambda = {lambda} is a Dirichlet eigenvalue (interior block singular, multiplicity {n_zero})")]
    DirichletEigenvalue { lambda: f64, n_zero: usize },
    #[error("lambda = {lambda} is a spectral point of the {problem} problem")]
    SpectralPoint { lambda: f64, problem: String },
    #[error("cross-check failed: {0}")]
    CrossCheck(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// The tolerance knobs shared by the whole laboratory.
///
/// Every check echoes the tolerances it ran with, so a report fully
/// determines its own reproduction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative eigenvalue cluster tolerance; two eigenvalues within
    /// `cluster_rel * max(1, |λ|)` belong to the same cluster.
    pub cluster_rel: f64,
    /// Relative zero-classification tolerance for pencil eigenvalues.
    pub pencil_zero_rel: f64,
    /// Zero-pivot factor for LDLᵀ (multiplied by `‖A‖_max`); `None`
    /// selects the default `dim · ε`.
    pub zero_pivot_factor: Option<f64>,
    /// Slack multiplier in the nullspace rank threshold
    /// `τ = max(|I|, n) · ε · σ_max · rank_slack`.
    pub rank_slack: f64,
    /// Principal-angle threshold: `cos θ ≥ 1 − common_angle` counts as a
    /// common direction.
    pub common_angle: f64,
    /// One-sided slack for the quadratic-form inequality checks,
    /// relative to `‖K‖_F · ‖u‖²`.
    pub ineq_tol: f64,
    /// One-sided slack for monotonicity checks, relative to the local
    /// scale of the traced quantity.
    pub mono_tol: f64,
    /// Relative tolerance for the projection identities.
    pub proj_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cluster_rel: 1e-9,
            pencil_zero_rel: 1e-9,
            zero_pivot_factor: None,
            rank_slack: 10.0,
            common_angle: 1e-8,
            ineq_tol: 1e-8,
            mono_tol: 1e-9,
            proj_tol: 1e-9,
        }
    }
}

impl Tolerances {
    /// Absolute cluster width at `λ`.
    pub fn cluster_tol(&self, lambda: f64) -> f64 {
        self.cluster_rel * lambda.abs().max(1.0)
    }
}
