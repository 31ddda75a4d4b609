//! Assembled reference fixtures used across the test and verification
//! suites, plus a seeded random-graph generator.

use crate::mesh::{self, BoundaryEnds, FormPair, IndexSplit, MassMode};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Path 0–1–2, unit weights, boundary {2}, shift 1, identity mass.
///
/// `K = [[2,-1,0],[-1,3,-1],[0,-1,2]]`; Neumann spectrum {1, 2, 4},
/// Dirichlet spectrum {(5±√5)/2}.
pub fn p3() -> (FormPair, IndexSplit) {
    let d = mesh::build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[2].into()).unwrap();
    mesh::assemble(&d, 1.0, MassMode::Identity).unwrap()
}

/// Ten-node chain with both ends in the boundary, h = 1.
pub fn interval10() -> (FormPair, IndexSplit) {
    let d = mesh::build_interval(10, 1.0, BoundaryEnds::Both).unwrap();
    mesh::assemble(&d, 1.0, MassMode::Identity).unwrap()
}

/// Full rows×cols grid, default spacing, identity mass.
pub fn grid(rows: usize, cols: usize) -> (FormPair, IndexSplit) {
    let d = mesh::build_grid(rows, cols, None, None).unwrap();
    mesh::assemble(&d, 1.0, MassMode::Identity).unwrap()
}

/// 7×7 grid with the top-right 3×3 block removed.
pub fn l_shaped() -> (FormPair, IndexSplit) {
    let mut mask = vec![vec![true; 7]; 7];
    for row in mask.iter_mut().take(3) {
        for cell in row.iter_mut().skip(4) {
            *cell = false;
        }
    }
    let d = mesh::build_grid(7, 7, Some(&mask), None).unwrap();
    mesh::assemble(&d, 1.0, MassMode::Identity).unwrap()
}

/// P3 disjoint-union a boundary-free triangle: the triangle eigenvectors
/// are common to both problems (n_{N,D} ≥ 1 at the triangle eigenvalues
/// 1 and 4).
pub fn p3_with_free_triangle() -> (FormPair, IndexSplit) {
    let d = mesh::build_graph(
        6,
        &[
            (0, 1, 1.0),
            (1, 2, 1.0),
            (3, 4, 1.0),
            (3, 5, 1.0),
            (4, 5, 1.0),
        ],
        &[2].into(),
    )
    .unwrap();
    mesh::assemble(&d, 1.0, MassMode::Identity).unwrap()
}

/// The curated fixture set exercised by the identity suites.
pub fn standard_set() -> Vec<(&'static str, (FormPair, IndexSplit))> {
    vec![
        ("p3", p3()),
        ("interval10", interval10()),
        ("grid8x8", grid(8, 8)),
        ("grid10x10", grid(10, 10)),
        ("l_shaped", l_shaped()),
        ("p3_free_triangle", p3_with_free_triangle()),
    ]
}

/// Seeded random connected graph (spanning tree plus extra edges) with a
/// random proper boundary subset; every fourth draw appends a
/// boundary-free triangle so common eigenvectors appear in randomized
/// suites.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize, with_free_component: bool) -> (FormPair, IndexSplit) {
    let n = rng.gen_range(4..=max_n.max(4));
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((j, i, rng.gen_range(0.3..2.0)));
    }
    let extra = rng.gen_range(0..n);
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let (a, b) = (a.min(b), a.max(b));
        if edges.iter().any(|e| e.0 == a && e.1 == b) {
            continue;
        }
        edges.push((a, b, rng.gen_range(0.3..2.0)));
    }
    let nb = rng.gen_range(1..=(n / 3).max(1));
    let mut boundary = BTreeSet::new();
    while boundary.len() < nb {
        boundary.insert(rng.gen_range(0..n));
    }
    let total = if with_free_component {
        let w = rng.gen_range(0.3..2.0);
        edges.push((n, n + 1, w));
        edges.push((n, n + 2, w));
        edges.push((n + 1, n + 2, w));
        n + 3
    } else {
        n
    };
    let d = mesh::build_graph(total, &edges, &boundary).unwrap();
    mesh::assemble(&d, 1.0, MassMode::Identity).unwrap()
}
