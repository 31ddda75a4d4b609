//! Acceptance suite: every counting-function identity and inequality the
//! laboratory exists to verify, run at its stated tolerance. One
//! pass/fail line is printed per criterion (visible with
//! `cargo test --test acceptance -- --nocapture`).

use dnlab::dtn;
use dnlab::eigensolve::{self, Problem};
use dnlab::fixtures;
use dnlab::inertia::{self, InertiaTriple};
use dnlab::mesh::{FormPair, IndexSplit};
use dnlab::verify::{self, CheckStatus, ProblemSpectra};
use dnlab::Tolerances;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(name: &str, pass: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

/// Draw a probe that is an eigenvalue of neither problem, using only the
/// fast inertia path (no eigensolves).
fn noneigen_probe(form: &FormPair, split: &IndexSplit, rng: &mut ChaCha8Rng, tols: &Tolerances) -> f64 {
    let top = form.k.amax() * 1.2;
    loop {
        let lam = rng.gen_range(0.1..top.max(0.2));
        let clear = [Problem::Neumann, Problem::Dirichlet].iter().all(|&p| {
            inertia::count_below(form, split, p, lam, Some(tols.cluster_rel)).1 == 0
        });
        if clear {
            return lam;
        }
    }
}

#[test]
fn haynsworth_friedlander_random_suite() {
    // N_N(λ) = N_D(λ) + n_-(S(λ)) with exact integer equality on 500
    // seeded random graphs at 10 non-eigenvalue probes each.
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_809);
    let started = std::time::Instant::now();
    let mut trials = 0usize;
    let mut failures = 0usize;
    for fixture_idx in 0..500 {
        let (fp, split) = fixtures::random_graph(&mut rng, 40, fixture_idx % 4 == 0);
        for _ in 0..10 {
            let lam = noneigen_probe(&fp, &split, &mut rng, &tols);
            let (nn, _) = inertia::count_below(&fp, &split, Problem::Neumann, lam, Some(tols.cluster_rel));
            let (nd, _) = inertia::count_below(&fp, &split, Problem::Dirichlet, lam, Some(tols.cluster_rel));
            let map = match dtn::schur_dtn(&fp, &split, lam) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let si = dtn::dtn_inertia(&fp, &map, &tols);
            trials += 1;
            if nn != nd + si.n_minus {
                failures += 1;
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    report(
        "haynsworth-friedlander random suite",
        failures == 0 && trials >= 4900 && elapsed <= 30.0,
        &format!("{trials} probes on 500 fixtures, {failures} failures, {elapsed:.1}s"),
    );
}

fn fixture_spectra() -> &'static [(&'static str, FormPair, IndexSplit, ProblemSpectra)] {
    static CELL: std::sync::OnceLock<Vec<(&'static str, FormPair, IndexSplit, ProblemSpectra)>> =
        std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        let tols = Tolerances::default();
        fixtures::standard_set()
            .into_iter()
            .map(|(name, (fp, split))| {
                let spectra = ProblemSpectra::compute(&fp, &split, &tols).unwrap();
                (name, fp, split, spectra)
            })
            .collect()
    })
}

#[test]
fn full_identity_at_eigenvalues() {
    // N_N(λ) = N_D(λ) + n_D(λ) + dim G_λ⁻ at every eigenvalue below the
    // 10th of both problems, on the whole curated fixture set.
    let tols = Tolerances::default();
    let mut checked = 0usize;
    for (name, fp, split, spectra) in fixture_spectra().iter() {
        for lam in verify::eigenvalue_probes(spectra, 10, &tols) {
            let r = verify::check_haynsworth(fp, split, spectra, lam, &tols).unwrap();
            assert_eq!(
                r.status,
                CheckStatus::Pass,
                "{name} at {lam}: {:?} {:?}",
                (r.lhs, r.rhs),
                r.diagnostics
            );
            checked += 1;
        }
    }
    report(
        "full identity at eigenvalues",
        checked >= 60,
        &format!("{checked} eigenvalue probes across 6 fixtures, all exact"),
    );
}

#[test]
fn kernel_law_at_eigenvalues() {
    // dim G_λ⁰ = n_N + n_D + n_{N,D} at the same probes, including a
    // fixture with n_{N,D} ≥ 1.
    let tols = Tolerances::default();
    let mut checked = 0usize;
    let mut saw_common = false;
    for (name, fp, split, spectra) in fixture_spectra().iter() {
        for lam in verify::eigenvalue_probes(spectra, 10, &tols) {
            let r = verify::check_kernel_dim(fp, split, spectra, lam, &tols).unwrap();
            assert_eq!(r.status, CheckStatus::Pass, "{name} at {lam}: {:?}", r.diagnostics);
            if spectra.at(fp, lam, &tols).n_nd >= 1 {
                saw_common = true;
            }
            checked += 1;
        }
    }
    report(
        "kernel law at eigenvalues",
        checked >= 60 && saw_common,
        &format!("{checked} probes, common-eigenvector fixture exercised = {saw_common}"),
    );
}

#[test]
fn crossing_patterns_and_p3_hand_values() {
    // Branch sign patterns at the 5 lowest simple eigenvalues of every
    // fixture, plus the frozen P3 Schur values to 1e-6 relative.
    let tols = Tolerances::default();
    let mut checked = 0usize;
    for (name, fp, split, spectra) in fixture_spectra().iter() {
        for lam in verify::lowest_simple_eigenvalues(spectra, 5, &tols) {
            let r = verify::check_crossing(fp, split, spectra, lam, None, None, &tols).unwrap();
            assert_eq!(r.status, CheckStatus::Pass, "{name} at {lam}: {:?}", r.diagnostics);
            checked += 1;
        }
    }
    // hand values: exact rational Schur evaluations on P3
    let (fp, split) = fixtures::p3();
    let hand = [
        (0.9, 341.0 / 1310.0),
        (1.1, -261.0 / 710.0),
        (1.3, -567.0 / 190.0),
        (1.45, 5049.0 / 1180.0),
    ];
    let mut max_rel: f64 = 0.0;
    for (lam, want) in hand {
        let got = dtn::schur_dtn(&fp, &split, lam).unwrap().s[(0, 0)];
        max_rel = max_rel.max(((got - want) / want).abs());
    }
    report(
        "crossing patterns + P3 hand values",
        checked >= 25 && max_rel <= 1e-6,
        &format!("{checked} crossings verified; S-value max rel err {max_rel:.2e}"),
    );
}

#[test]
fn resolvent_corollary() {
    // n_-(R'(λ)) = N_N(λ) − N_D(λ) at 20 random non-eigenvalue λ per
    // fixture; jump across a simple eigenvalue equals n_N − n_D.
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut checked = 0usize;
    let mut jumps = 0usize;
    for (name, fp, split, spectra) in fixture_spectra().iter() {
        for lam in verify::random_noneigen_lambdas(spectra, 20, &mut rng, &tols) {
            let r = verify::check_resolvent(fp, split, lam, &tols).unwrap();
            assert_eq!(
                r.status,
                CheckStatus::Pass,
                "{name} at {lam}: {:?} {:?}",
                (r.lhs, r.rhs),
                r.diagnostics
            );
            checked += 1;
        }
        for lam in verify::lowest_simple_eigenvalues(spectra, 2, &tols) {
            let r = verify::check_resolvent_jump(fp, split, spectra, lam, &tols).unwrap();
            assert_eq!(r.status, CheckStatus::Pass, "{name} jump at {lam}: {:?}", r.diagnostics);
            jumps += 1;
        }
    }
    report(
        "resolvent corollary",
        checked == 120 && jumps >= 10,
        &format!("{checked} probes + {jumps} jump checks, all exact"),
    );
}

#[test]
fn filonov_inequality() {
    // 1000 seeded samples per fixture at 3 λ each satisfy
    // uᵀKu ≤ λ·uᵀMu + 1e-8·‖K‖_F·‖u‖².
    let tols = Tolerances::default();
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut ran = 0usize;
    for (name, fp, split, spectra) in fixture_spectra().iter() {
        let top = *spectra.neumann.values.last().unwrap();
        for frac in [0.35, 0.65, 0.95] {
            let mut lam = frac * top;
            while spectra.is_eigenvalue(lam) {
                lam += 10.0 * tols.cluster_tol(lam);
            }
            let r = verify::check_filonov(fp, split, spectra, lam, 1000, 99, &tols).unwrap();
            match r.status {
                CheckStatus::Pass => {
                    worst = worst.max(r.residual.unwrap());
                    ran += 1;
                }
                CheckStatus::Skipped { .. } => {}
                CheckStatus::Fail => panic!("{name} at {lam}: {:?}", r.diagnostics),
            }
        }
    }
    report(
        "filonov inequality",
        ran >= 15 && worst <= 0.0,
        &format!("{ran} spans x 1000 samples, 0 violations (worst margin {worst:.2e})"),
    );
}

#[test]
fn monotone_projections() {
    // b[P'_N(λ)v] nondecreasing and b[P'_D(λ)v] nonincreasing on 50-point
    // eigenvalue-free grids for 20 random v per fixture.
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut ran = 0usize;
    for (name, fp, split, spectra) in fixture_spectra().iter() {
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
            let (a, b) = best.unwrap();
            let (lo, hi) = (a + 0.1 * (b - a), b - 0.1 * (b - a));
            let grid: Vec<f64> = (0..50).map(|i| lo + (hi - lo) * i as f64 / 49.0).collect();
            let vs: Vec<DVector<f64>> = (0..20)
                .map(|_| DVector::from_fn(fp.n(), |_, _| rng.gen_range(-1.0..1.0)))
                .collect();
            let r = verify::check_monotone_batch(fp, split, spectra, &vs, &grid, problem, &tols).unwrap();
            assert_eq!(r.status, CheckStatus::Pass, "{name}/{problem}: {:?}", r.diagnostics);
            worst = worst.max(r.residual.unwrap());
            ran += 1;
        }
    }
    report(
        "monotone projections",
        ran == 12 && worst <= 1e-9,
        &format!("12 fixture/problem traces x 20 vectors, max one-sided violation {worst:.2e}"),
    );
}

#[test]
fn continuum_convergence_and_payne() {
    // Unit-square ladder h = 1/16, 1/32, 1/64: first 5 Dirichlet
    // eigenvalues within 1% of pi^2{2,5,5,8,10}+c at the finest level
    // with fitted order 2 ± 0.3; Neumann within 3%; Payne chain
    // lambda_{N,k+1} < lambda_{D,k} for k <= 10 at h = 1/64.
    let started = std::time::Instant::now();
    let shift = 1.0;
    let pi2 = std::f64::consts::PI.powi(2);
    let d_targets: Vec<f64> = [2.0, 5.0, 5.0, 8.0, 10.0].iter().map(|m| m * pi2 + shift).collect();
    let n_targets: Vec<f64> = [0.0, 1.0, 1.0, 2.0, 4.0].iter().map(|m| m * pi2 + shift).collect();
    let levels = [16usize, 32, 64];
    let mut d_errs = vec![Vec::new(); 5];
    let mut finest: Option<(Vec<f64>, Vec<f64>)> = None;
    for &lv in &levels {
        let (neu, dir) = eigensolve::square_lumped_spectra(lv, shift).unwrap();
        for k in 0..5 {
            d_errs[k].push(((dir[k] - d_targets[k]) / d_targets[k]).abs());
        }
        if lv == 64 {
            finest = Some((neu, dir));
        }
    }
    let (neu, dir) = finest.unwrap();

    let d_rel_finest = d_errs.iter().map(|e| e[2]).fold(0.0f64, f64::max);
    let n_rel_finest = (0..5)
        .map(|k| ((neu[k] - n_targets[k]) / n_targets[k].max(1.0)).abs())
        .fold(0.0f64, f64::max);

    // least-squares slope of log err against log h per eigenvalue
    let hs: Vec<f64> = levels.iter().map(|&l| (1.0 / l as f64).ln()).collect();
    let hbar = hs.iter().sum::<f64>() / 3.0;
    let mut orders = Vec::new();
    for errs in &d_errs {
        let ls: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let lbar = ls.iter().sum::<f64>() / 3.0;
        let num: f64 = hs.iter().zip(&ls).map(|(h, l)| (h - hbar) * (l - lbar)).sum();
        let den: f64 = hs.iter().map(|h| (h - hbar) * (h - hbar)).sum();
        orders.push(num / den);
    }
    let orders_ok = orders.iter().all(|&o| (o - 2.0).abs() <= 0.3);

    // Payne chain at the finest level
    let mut payne_ok = true;
    for k in 1..=10usize {
        if neu[k] >= dir[k - 1] {
            payne_ok = false;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    report(
        "continuum convergence + payne",
        d_rel_finest <= 0.01 && n_rel_finest <= 0.03 && orders_ok && payne_ok && elapsed <= 300.0,
        &format!(
            "dirichlet max rel {d_rel_finest:.2e} (<=1%), neumann {n_rel_finest:.2e} (<=3%), orders {:?}, payne k<=10 {payne_ok}, {elapsed:.1}s",
            orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn cross_oracle_inertia_vs_eigensolver() {
    // LDLᵀ inertia agrees exactly with eigensolver sign counts on 300
    // random symmetric matrices at 10 shifts each; Schur inertia agrees
    // with the pencil signature on 200 random pencils.
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut matrix_trials = 0usize;
    for t in 0..300 {
        let n = rng.gen_range(2..=30);
        let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        a = 0.5 * (&a + a.transpose());
        let s = eigensolve::eigh(&a).unwrap();
        for _ in 0..10 {
            let shift = rng.gen_range(-2.0..2.0);
            let shifted = &a - shift * DMatrix::identity(n, n);
            let f = inertia::ldlt(&shifted, None);
            let vals: Vec<f64> = s.values.iter().map(|v| v - shift).collect();
            let want = InertiaTriple::from_values(&vals, f.zero_tol());
            assert_eq!(f.inertia, want, "matrix trial {t}");
            matrix_trials += 1;
        }
    }
    let mut pencil_trials = 0usize;
    for t in 0..400 {
        if pencil_trials >= 200 {
            break;
        }
        let (fp, split) = fixtures::random_graph(&mut rng, 16, t % 4 == 0);
        let lam = rng.gen_range(0.2..6.0);
        let map = match dtn::schur_dtn(&fp, &split, lam) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let si = dtn::dtn_inertia(&fp, &map, &tols);
        let frame = dtn::glambda_frame(&fp, &split, lam, None, &tols);
        let pi = dtn::blambda_signature(&frame, &tols).unwrap();
        assert_eq!((si.n_minus, si.n_plus), (pi.n_minus, pi.n_plus), "pencil trial {t}");
        pencil_trials += 1;
    }
    report(
        "cross-oracle inertia agreement",
        matrix_trials == 3000 && pencil_trials >= 200,
        &format!("{matrix_trials} shifted-matrix checks and {pencil_trials} Schur/pencil checks, all exact"),
    );
}
