//! Symmetric-indefinite LDLᵀ factorization with Bunch–Kaufman pivoting,
//! inertia triples via Sylvester's law, and counting-function evaluation
//! `N_B(λ) = n₋(K − λM)` without eigensolves.

use crate::mesh::{FormPair, IndexSplit};
use crate::{eigensolve::Problem, Error, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Classical Bunch–Kaufman pivoting constant.
const ALPHA: f64 = 0.6403882032022076; // (1 + sqrt(17)) / 8

/// Signature of a symmetric matrix or pencil: counts of negative, zero
/// and positive eigenvalues.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InertiaTriple {
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_plus: usize,
}

impl InertiaTriple {
    pub fn dim(&self) -> usize {
        self.n_minus + self.n_zero + self.n_plus
    }

    /// Classify a list of real values with an absolute zero cutoff.
    pub fn from_values(values: &[f64], zero_tol: f64) -> Self {
        let mut t = InertiaTriple::default();
        for &v in values {
            if v.abs() <= zero_tol {
                t.n_zero += 1;
            } else if v < 0.0 {
                t.n_minus += 1;
            } else {
                t.n_plus += 1;
            }
        }
        t
    }
}

impl std::fmt::Display for InertiaTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.n_minus, self.n_zero, self.n_plus)
    }
}

#[derive(Clone, Debug)]
enum DBlock {
    /// 1×1 pivot `d` at block start `k`.
    One { k: usize, d: f64 },
    /// 2×2 pivot `[[a, b], [b, c]]` at rows `k, k+1`.
    Two { k: usize, a: f64, b: f64, c: f64 },
}

/// `P A Pᵀ = L D Lᵀ` with unit lower-triangular `L` and block-diagonal
/// `D` of 1×1 and 2×2 blocks.
#[derive(Clone, Debug)]
pub struct LdltFactorization {
    n: usize,
    /// `perm[i]` = original index stored at permuted position `i`.
    perm: Vec<usize>,
    l: DMatrix<f64>,
    blocks: Vec<DBlock>,
    pub inertia: InertiaTriple,
    pub growth: f64,
    zero_tol_abs: f64,
}

/// Plain Cholesky `A = L Lᵀ`; returns the failing pivot index on
/// non-positive-definite input. Pivots below `n·ε·‖A‖_max` count as
/// failures so that singular PSD matrices are rejected despite rounding.
pub fn cholesky_ll(a: &DMatrix<f64>) -> std::result::Result<DMatrix<f64>, usize> {
    let n = a.nrows();
    let floor = n as f64 * f64::EPSILON * a.amax();
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= floor || !d.is_finite() {
            return Err(j);
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (a + a.transpose())
}

/// Bunch–Kaufman LDLᵀ of a symmetric matrix.
///
/// `zero_pivot_rel` is the relative zero-pivot cutoff (multiplied by
/// `‖A‖_max` internally); pass `None` for the default `n·ε`. Singular and
/// semidefinite inputs are handled by counting small pivots into
/// `n_zero`.
pub fn ldlt(a: &DMatrix<f64>, zero_pivot_rel: Option<f64>) -> LdltFactorization {
    let amax = a.amax().max(f64::MIN_POSITIVE);
    let rel = zero_pivot_rel.unwrap_or(a.nrows() as f64 * f64::EPSILON);
    ldlt_scaled(a, rel * amax)
}

/// [`ldlt`] with an explicit absolute zero-pivot cutoff — needed when the
/// matrix itself may be entirely near zero (the b-form at an eigenvalue)
/// and `‖A‖_max` is not a meaningful scale.
pub fn ldlt_scaled(a: &DMatrix<f64>, zero_tol_abs: f64) -> LdltFactorization {
    let n = a.nrows();
    let mut a = symmetrize(a);
    let amax = a.amax().max(f64::MIN_POSITIVE);

    let mut l = DMatrix::<f64>::identity(n, n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut blocks = Vec::new();
    let mut growth: f64 = 1.0;

    // symmetric swap of rows/cols q and r in the working matrix, the
    // already-computed part of L, and the permutation record
    let swap = |a: &mut DMatrix<f64>, l: &mut DMatrix<f64>, perm: &mut Vec<usize>, q: usize, r: usize, k: usize| {
        if q == r {
            return;
        }
        a.swap_rows(q, r);
        a.swap_columns(q, r);
        perm.swap(q, r);
        for c in 0..k {
            let t = l[(q, c)];
            l[(q, c)] = l[(r, c)];
            l[(r, c)] = t;
        }
    };

    let mut k = 0;
    while k < n {
        if k == n - 1 {
            let d = a[(k, k)];
            blocks.push(DBlock::One { k, d });
            k += 1;
            continue;
        }

        // largest off-diagonal magnitude in column k below the diagonal
        let mut lam = 0.0;
        let mut r = k + 1;
        for i in k + 1..n {
            if a[(i, k)].abs() > lam {
                lam = a[(i, k)].abs();
                r = i;
            }
        }

        let pivot_is_2x2;
        if a[(k, k)].abs() >= ALPHA * lam || lam <= zero_tol_abs {
            pivot_is_2x2 = false;
        } else {
            // largest off-diagonal magnitude in column r (rows k..n, excluding r)
            let mut sigma = 0.0;
            for i in k..n {
                if i != r && a[(i, r)].abs() > sigma {
                    sigma = a[(i, r)].abs();
                }
            }
            if a[(k, k)].abs() * sigma >= ALPHA * lam * lam {
                pivot_is_2x2 = false;
            } else if a[(r, r)].abs() >= ALPHA * sigma {
                swap(&mut a, &mut l, &mut perm, k, r, k);
                pivot_is_2x2 = false;
            } else {
                swap(&mut a, &mut l, &mut perm, k + 1, r, k);
                pivot_is_2x2 = true;
            }
        }

        if !pivot_is_2x2 {
            let d = a[(k, k)];
            blocks.push(DBlock::One { k, d });
            if d.abs() > zero_tol_abs {
                for i in k + 1..n {
                    let m = a[(i, k)] / d;
                    l[(i, k)] = m;
                    for j in k + 1..=i {
                        a[(i, j)] -= m * a[(j, k)];
                        a[(j, i)] = a[(i, j)];
                        growth = growth.max(a[(i, j)].abs() / amax);
                    }
                }
            }
            // entries below a zero pivot are themselves <= tol; drop them
            for i in k + 1..n {
                a[(i, k)] = 0.0;
                a[(k, i)] = 0.0;
            }
            k += 1;
        } else {
            let (pa, pb, pc) = (a[(k, k)], a[(k + 1, k)], a[(k + 1, k + 1)]);
            let det = pa * pc - pb * pb;
            blocks.push(DBlock::Two { k, a: pa, b: pb, c: pc });
            for i in k + 2..n {
                let (u, v) = (a[(i, k)], a[(i, k + 1)]);
                // [l1, l2] = [u, v] * inv([[pa, pb], [pb, pc]])
                let l1 = (u * pc - v * pb) / det;
                let l2 = (v * pa - u * pb) / det;
                l[(i, k)] = l1;
                l[(i, k + 1)] = l2;
                for j in k + 2..=i {
                    a[(i, j)] -= l1 * a[(j, k)] + l2 * a[(j, k + 1)];
                    a[(j, i)] = a[(i, j)];
                    growth = growth.max(a[(i, j)].abs() / amax);
                }
            }
            for i in k + 2..n {
                a[(i, k)] = 0.0;
                a[(k, i)] = 0.0;
                a[(i, k + 1)] = 0.0;
                a[(k + 1, i)] = 0.0;
            }
            k += 2;
        }
    }

    let mut inertia = InertiaTriple::default();
    for b in &blocks {
        match *b {
            DBlock::One { d, .. } => {
                if d.abs() <= zero_tol_abs {
                    inertia.n_zero += 1;
                } else if d < 0.0 {
                    inertia.n_minus += 1;
                } else {
                    inertia.n_plus += 1;
                }
            }
            DBlock::Two { a, b, c, .. } => {
                let det = a * c - b * b;
                if det < 0.0 {
                    // Bunch-Kaufman 2x2 pivots are indefinite
                    inertia.n_minus += 1;
                    inertia.n_plus += 1;
                } else {
                    // degenerate block: classify its two eigenvalues
                    let tr = a + c;
                    let disc = ((a - c) * 0.5).hypot(b);
                    let e = [tr * 0.5 - disc, tr * 0.5 + disc];
                    let t = InertiaTriple::from_values(&e, zero_tol_abs);
                    inertia.n_minus += t.n_minus;
                    inertia.n_zero += t.n_zero;
                    inertia.n_plus += t.n_plus;
                }
            }
        }
    }

    LdltFactorization {
        n,
        perm,
        l,
        blocks,
        inertia,
        growth,
        zero_tol_abs,
    }
}

impl LdltFactorization {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol_abs
    }

    /// Reassemble `PᵀLDLᵀP` (for residual tests).
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut d = DMatrix::zeros(n, n);
        for b in &self.blocks {
            match *b {
                DBlock::One { k, d: v } => d[(k, k)] = v,
                DBlock::Two { k, a, b, c } => {
                    d[(k, k)] = a;
                    d[(k + 1, k)] = b;
                    d[(k, k + 1)] = b;
                    d[(k + 1, k + 1)] = c;
                }
            }
        }
        let ldl = &self.l * d * self.l.transpose();
        // undo the permutation: X[perm[i], perm[j]] = ldl[i, j]
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(self.perm[i], self.perm[j])] = ldl[(i, j)];
            }
        }
        out
    }

    /// Solve `A X = B`. Fails when the factorization found zero pivots.
    pub fn solve(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if self.inertia.n_zero > 0 {
            return Err(Error::CrossCheck(format!(
                "solve with singular LDLT ({} zero pivots)",
                self.inertia.n_zero
            )));
        }
        let n = self.n;
        // y = P b
        let mut x = DMatrix::zeros(n, b.ncols());
        for i in 0..n {
            for c in 0..b.ncols() {
                x[(i, c)] = b[(self.perm[i], c)];
            }
        }
        // L y = x (unit lower)
        for c in 0..x.ncols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for j in 0..i {
                    s -= self.l[(i, j)] * x[(j, c)];
                }
                x[(i, c)] = s;
            }
        }
        // D z = y blockwise
        for blk in &self.blocks {
            match *blk {
                DBlock::One { k, d } => {
                    for c in 0..x.ncols() {
                        x[(k, c)] /= d;
                    }
                }
                DBlock::Two { k, a, b, c: cc } => {
                    let det = a * cc - b * b;
                    for c in 0..x.ncols() {
                        let (u, v) = (x[(k, c)], x[(k + 1, c)]);
                        x[(k, c)] = (cc * u - b * v) / det;
                        x[(k + 1, c)] = (a * v - b * u) / det;
                    }
                }
            }
        }
        // Lᵀ w = z
        for c in 0..x.ncols() {
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for j in i + 1..n {
                    s -= self.l[(j, i)] * x[(j, c)];
                }
                x[(i, c)] = s;
            }
        }
        // out = Pᵀ w
        let mut out = DMatrix::zeros(n, b.ncols());
        for i in 0..n {
            for c in 0..b.ncols() {
                out[(self.perm[i], c)] = x[(i, c)];
            }
        }
        Ok(out)
    }

    /// Crude condition estimate: ratio of extreme block-pivot magnitudes.
    pub fn condition_estimate(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for b in &self.blocks {
            let mags: Vec<f64> = match *b {
                DBlock::One { d, .. } => vec![d.abs()],
                DBlock::Two { a, b, c, .. } => {
                    let tr = a + c;
                    let disc = ((a - c) * 0.5).hypot(b);
                    vec![(tr * 0.5 - disc).abs(), (tr * 0.5 + disc).abs()]
                }
            };
            for m in mags {
                lo = lo.min(m);
                hi = hi.max(m);
            }
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

/// The `λ`-shifted matrix of the chosen problem.
pub fn shifted_matrix(form: &FormPair, split: &IndexSplit, problem: Problem, lambda: f64) -> DMatrix<f64> {
    let a = &form.k - lambda * &form.m;
    match problem {
        Problem::Neumann => a,
        Problem::Dirichlet => split.ii(&a),
    }
}

/// Counting function via Sylvester's law: `(N_B(λ), multiplicity at λ)`
/// from the inertia of the shifted block pencil.
pub fn count_below(
    form: &FormPair,
    split: &IndexSplit,
    problem: Problem,
    lambda: f64,
    zero_pivot_rel: Option<f64>,
) -> (usize, usize) {
    let a = shifted_matrix(form, split, problem, lambda);
    let f = ldlt(&a, zero_pivot_rel);
    (f.inertia.n_minus, f.inertia.n_zero)
}

/// Vectorized [`count_below`]; grid points are independent and evaluated
/// in parallel, results in input order.
pub fn inertia_sweep(
    form: &FormPair,
    split: &IndexSplit,
    problem: Problem,
    lambdas: &[f64],
    zero_pivot_rel: Option<f64>,
) -> Vec<(f64, usize, usize)> {
    lambdas
        .par_iter()
        .map(|&lam| {
            let (c, m) = count_below(form, split, problem, lam, zero_pivot_rel);
            (lam, c, m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::eigh;
    use crate::fixtures;
    use proptest::prelude::*;
    use rand::Rng as _;
    use rand::SeedableRng as _;

    #[test]
    fn diagonal_inertia() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, -3.0, 0.0]));
        let f = ldlt(&a, None);
        assert_eq!(
            f.inertia,
            InertiaTriple { n_minus: 1, n_zero: 1, n_plus: 1 }
        );
    }

    #[test]
    fn two_by_two_exchange_block() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let f = ldlt(&a, None);
        assert_eq!(
            f.inertia,
            InertiaTriple { n_minus: 1, n_zero: 0, n_plus: 1 }
        );
        let r = (f.reconstruct() - &a).norm();
        assert!(r <= 1e-14);
    }

    #[test]
    fn p3_shifted_inertia_matches_spectrum() {
        let (fp, _split) = fixtures::p3();
        // K - 3M has eigenvalues {-2, -1, 1}
        let a = &fp.k - 3.0 * &fp.m;
        let f = ldlt(&a, None);
        assert_eq!(
            f.inertia,
            InertiaTriple { n_minus: 2, n_zero: 0, n_plus: 1 }
        );
        // oracle: sign counts from the eigensolver on the same matrix
        let s = eigh(&a).unwrap();
        let t = InertiaTriple::from_values(&s.values, f.zero_tol());
        assert_eq!(f.inertia, t);
    }

    #[test]
    fn count_below_p3() {
        let (fp, split) = fixtures::p3();
        assert_eq!(count_below(&fp, &split, Problem::Neumann, 3.0, None), (2, 0));
        assert_eq!(count_below(&fp, &split, Problem::Dirichlet, 3.0, None), (1, 0));
        assert_eq!(count_below(&fp, &split, Problem::Neumann, 0.0, None), (0, 0));
        assert_eq!(count_below(&fp, &split, Problem::Dirichlet, 0.0, None), (0, 0));
        // exactly at the eigenvalue 2: count 1, multiplicity 1
        assert_eq!(count_below(&fp, &split, Problem::Neumann, 2.0, None), (1, 1));
    }

    #[test]
    fn sweep_order_and_counts() {
        let (fp, split) = fixtures::p3();
        let out = inertia_sweep(&fp, &split, Problem::Neumann, &[0.5, 1.5, 2.5, 5.0], None);
        let counts: Vec<usize> = out.iter().map(|r| r.1).collect();
        assert_eq!(counts, vec![0, 1, 2, 3]);
        assert!(inertia_sweep(&fp, &split, Problem::Neumann, &[], None).is_empty());
    }

    #[test]
    fn sylvester_cross_check_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for trial in 0..300 {
            let n = rng.gen_range(2..=30);
            let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            a = symmetrize(&a);
            let f = ldlt(&a, None);
            let s = eigh(&a).unwrap();
            let t = InertiaTriple::from_values(&s.values, f.zero_tol());
            assert_eq!(f.inertia, t, "trial {trial}");
            let resid = (f.reconstruct() - &a).norm();
            assert!(resid <= 1e-10 * a.norm().max(1e-300), "trial {trial}: resid {resid}");
        }
    }

    #[test]
    fn solve_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 12;
        let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        a = symmetrize(&a);
        let b = DMatrix::from_fn(n, 3, |_, _| rng.gen_range(-1.0..1.0));
        let f = ldlt(&a, None);
        let x = f.solve(&b).unwrap();
        assert!((&a * x - &b).norm() <= 1e-9 * a.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reconstruction_and_inertia_sum(seed in 0u64..1000) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..=16);
            let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
            // occasionally force rank deficiency
            if n >= 2 && seed % 3 == 0 {
                let col = a.column(0).into_owned();
                a.set_column(n - 1, &col);
            }
            a = symmetrize(&a);
            let f = ldlt(&a, None);
            prop_assert_eq!(f.inertia.dim(), n);
            let resid = (f.reconstruct() - &a).norm();
            prop_assert!(resid <= 1e-10 * a.norm().max(1e-12));
        }
    }
}
