//! Discrete domains and quadratic-form assembly.
//!
//! A [`DomainSpec`] is a weighted graph with a designated boundary vertex
//! set; 1-D chains and masked 2-D grids are special cases that carry
//! geometry (the spacing `h`). [`assemble`] turns a domain into a
//! [`FormPair`] `(K, M)` — `K` the shifted weighted graph Laplacian,
//! `M` the mass matrix — together with the interior/boundary
//! [`IndexSplit`] that defines the Dirichlet and Neumann problems.

use crate::{Error, Result};
use nalgebra::DMatrix;
use std::collections::BTreeSet;

/// Domain kind tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    Interval1d,
    Grid2d,
    Graph,
}

/// Which ends of a 1-D chain are boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryEnds {
    /// Only the last node (the default fixture convention).
    Last,
    /// Both end nodes.
    Both,
}

/// Mass matrix convention.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MassMode {
    /// `M = I` (finite-difference convention; eigenvalues approximate the
    /// continuum directly for grid weights `1/h²`).
    #[default]
    Identity,
    /// Finite-volume / P1 lumping for interval and grid kinds:
    /// edge weight `(adjacent cells)/2 · h^(d−2)`, node mass
    /// `h^d · (adjacent cells)/2^d`. Second-order accurate for the
    /// natural boundary condition on rectangles.
    Lumped,
}

/// Geometry attached to interval/grid domains.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    None,
    Interval {
        h: f64,
    },
    Grid {
        rows: usize,
        cols: usize,
        h: f64,
        /// Row-major mask; `node_rc[v]` is the (row, col) of node `v`.
        mask: Vec<Vec<bool>>,
        node_rc: Vec<(usize, usize)>,
    },
}

/// A discrete domain: weighted graph, boundary set, components, geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub node_count: usize,
    /// Edges `(i, j, w)` with `i < j`, `w > 0`, no duplicates.
    pub adjacency: Vec<(usize, usize, f64)>,
    pub boundary: BTreeSet<usize>,
    pub geometry: Geometry,
    /// Connected-component label per node.
    pub component_ids: Vec<usize>,
    /// Components containing no boundary node. Their eigenvectors solve
    /// both the Dirichlet and the Neumann problem simultaneously.
    pub boundary_free_components: Vec<usize>,
}

impl DomainSpec {
    pub fn interior(&self) -> Vec<usize> {
        (0..self.node_count)
            .filter(|i| !self.boundary.contains(i))
            .collect()
    }
}

/// The pair realizing the form `a[u,v] = vᵀKu` and the inner product
/// `(u,v) = vᵀMu`. `K` is positive definite (Laplacian plus `c·M`),
/// `M` is positive definite and diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct FormPair {
    pub k: DMatrix<f64>,
    pub m: DMatrix<f64>,
    /// The recorded zero-order shift `c`; spectra can be un-shifted by
    /// subtracting it.
    pub shift: f64,
}

impl FormPair {
    pub fn n(&self) -> usize {
        self.k.nrows()
    }

    /// `vᵀ K u`.
    pub fn a(&self, u: &nalgebra::DVector<f64>, v: &nalgebra::DVector<f64>) -> f64 {
        (v.transpose() * &self.k * u)[(0, 0)]
    }

    /// `vᵀ M u`.
    pub fn ip(&self, u: &nalgebra::DVector<f64>, v: &nalgebra::DVector<f64>) -> f64 {
        (v.transpose() * &self.m * u)[(0, 0)]
    }
}

/// Interior/boundary partition with the block permutation it induces.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSplit {
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
    /// `perm = interior ++ boundary`: position in block order → original index.
    pub perm: Vec<usize>,
}

impl IndexSplit {
    pub fn new(n: usize, boundary: &BTreeSet<usize>) -> Result<Self> {
        if boundary.iter().any(|&b| b >= n) {
            return Err(Error::InvalidArgument(format!(
                "boundary index out of range (n = {n})"
            )));
        }
        let interior: Vec<usize> = (0..n).filter(|i| !boundary.contains(i)).collect();
        let boundary: Vec<usize> = boundary.iter().copied().collect();
        if interior.is_empty() {
            return Err(Error::InvalidDomain(
                "no interior nodes (boundary covers the whole domain)".into(),
            ));
        }
        if boundary.is_empty() {
            return Err(Error::InvalidDomain("empty boundary set".into()));
        }
        let mut perm = interior.clone();
        perm.extend_from_slice(&boundary);
        Ok(IndexSplit {
            interior,
            boundary,
            perm,
        })
    }

    pub fn n(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    /// Interior-interior block of `a`.
    pub fn ii(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        a.select_rows(self.interior.iter())
            .select_columns(self.interior.iter())
    }

    /// Interior-boundary block of `a`.
    pub fn ib(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        a.select_rows(self.interior.iter())
            .select_columns(self.boundary.iter())
    }

    /// Boundary-boundary block of `a`.
    pub fn bb(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        a.select_rows(self.boundary.iter())
            .select_columns(self.boundary.iter())
    }

    /// Rows of `a` at interior indices (all columns).
    pub fn interior_rows(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        a.select_rows(self.interior.iter())
    }

    /// Zero-extend a matrix whose rows live on the interior index set.
    pub fn extend_interior(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n();
        let mut out = DMatrix::zeros(n, x.ncols());
        for (r, &i) in self.interior.iter().enumerate() {
            for c in 0..x.ncols() {
                out[(i, c)] = x[(r, c)];
            }
        }
        out
    }

    /// Restrict full-space columns to the interior index set.
    pub fn restrict_interior(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        x.select_rows(self.interior.iter())
    }
}

fn union_find(n: usize, edges: &[(usize, usize, f64)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(i, j, _) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    // relabel components 0,1,2,... in order of first appearance
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut ids = vec![0usize; n];
    for (v, id) in ids.iter_mut().enumerate() {
        let root = find(&mut parent, v);
        if label[root] == usize::MAX {
            label[root] = next;
            next += 1;
        }
        *id = label[root];
    }
    ids
}

fn validate_edges(node_count: usize, edges: &[(usize, usize, f64)]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &(i, j, w) in edges {
        if i >= j {
            return Err(Error::InvalidArgument(format!(
                "edge ({i}, {j}) must have i < j"
            )));
        }
        if j >= node_count {
            return Err(Error::InvalidArgument(format!(
                "edge ({i}, {j}) out of range (n = {node_count})"
            )));
        }
        if w <= 0.0 || !w.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "edge ({i}, {j}) has nonpositive weight {w}"
            )));
        }
        if !seen.insert((i, j)) {
            return Err(Error::InvalidArgument(format!("duplicate edge ({i}, {j})")));
        }
    }
    Ok(())
}

fn finish_domain(
    kind: DomainKind,
    node_count: usize,
    adjacency: Vec<(usize, usize, f64)>,
    boundary: BTreeSet<usize>,
    geometry: Geometry,
) -> Result<DomainSpec> {
    validate_edges(node_count, &adjacency)?;
    if boundary.iter().any(|&b| b >= node_count) {
        return Err(Error::InvalidArgument("boundary index out of range".into()));
    }
    if boundary.len() == node_count {
        return Err(Error::InvalidDomain(
            "boundary covers all nodes; interior is empty".into(),
        ));
    }
    if boundary.is_empty() {
        return Err(Error::InvalidDomain("boundary set is empty".into()));
    }
    let component_ids = union_find(node_count, &adjacency);
    let n_comp = component_ids.iter().copied().max().unwrap_or(0) + 1;
    let mut touched = vec![false; n_comp];
    for &b in &boundary {
        touched[component_ids[b]] = true;
    }
    let boundary_free_components = (0..n_comp).filter(|&c| !touched[c]).collect();
    Ok(DomainSpec {
        kind,
        node_count,
        adjacency,
        boundary,
        geometry,
        component_ids,
        boundary_free_components,
    })
}

/// Path graph on `n_nodes` nodes with weights `1/h²`.
///
/// Boundary is the last node, or both ends with [`BoundaryEnds::Both`].
pub fn build_interval(n_nodes: usize, h: f64, ends: BoundaryEnds) -> Result<DomainSpec> {
    if n_nodes < 2 {
        return Err(Error::InvalidArgument(format!(
            "interval needs at least 2 nodes, got {n_nodes}"
        )));
    }
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("nonpositive spacing h = {h}")));
    }
    let w = 1.0 / (h * h);
    let adjacency = (0..n_nodes - 1).map(|i| (i, i + 1, w)).collect();
    let boundary: BTreeSet<usize> = match ends {
        BoundaryEnds::Last => [n_nodes - 1].into(),
        BoundaryEnds::Both => [0, n_nodes - 1].into(),
    };
    finish_domain(
        DomainKind::Interval1d,
        n_nodes,
        adjacency,
        boundary,
        Geometry::Interval { h },
    )
}

/// 4-neighbor lattice on the masked-in cells of a `rows × cols` grid.
///
/// Boundary = masked-in nodes with fewer than 4 masked-in neighbors
/// (one-layer boundary). Weights `1/h²` with `h = 1/(cols+1)` unless
/// `h_override` is given.
pub fn build_grid(
    rows: usize,
    cols: usize,
    mask: Option<&[Vec<bool>]>,
    h_override: Option<f64>,
) -> Result<DomainSpec> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mask: Vec<Vec<bool>> = match mask {
        Some(m) => {
            if m.len() != rows || m.iter().any(|r| r.len() != cols) {
                return Err(Error::InvalidArgument(format!(
                    "mask shape does not match {rows}x{cols}"
                )));
            }
            m.to_vec()
        }
        None => vec![vec![true; cols]; rows],
    };
    let h = match h_override {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => {
            return Err(Error::InvalidArgument(format!("nonpositive spacing h = {h}")))
        }
        None => 1.0 / (cols as f64 + 1.0),
    };
    // row-major numbering of masked-in cells
    let mut node_of = vec![vec![usize::MAX; cols]; rows];
    let mut node_rc = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if mask[r][c] {
                node_of[r][c] = node_rc.len();
                node_rc.push((r, c));
            }
        }
    }
    let n = node_rc.len();
    if n < 2 {
        return Err(Error::InvalidDomain(format!(
            "mask keeps {n} node(s); need at least 2"
        )));
    }
    let w = 1.0 / (h * h);
    let mut adjacency = Vec::new();
    let mut neighbor_count = vec![0usize; n];
    for (v, &(r, c)) in node_rc.iter().enumerate() {
        // count all four potential neighbors; emit each edge once (i < j)
        let nbrs = [
            (r.wrapping_sub(1), c),
            (r + 1, c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
        ];
        for &(nr, nc) in &nbrs {
            if nr < rows && nc < cols && mask[nr][nc] {
                neighbor_count[v] += 1;
                let u = node_of[nr][nc];
                if v < u {
                    adjacency.push((v, u, w));
                }
            }
        }
    }
    adjacency.sort_by_key(|e| (e.0, e.1));
    let boundary: BTreeSet<usize> = (0..n).filter(|&v| neighbor_count[v] < 4).collect();
    finish_domain(
        DomainKind::Grid2d,
        n,
        adjacency,
        boundary,
        Geometry::Grid {
            rows,
            cols,
            h,
            mask,
            node_rc,
        },
    )
}

/// Weighted graph with an explicit boundary set.
///
/// Components containing no boundary node are flagged; their eigenvectors
/// are common to the Dirichlet and Neumann problems.
pub fn build_graph(
    node_count: usize,
    edges: &[(usize, usize, f64)],
    boundary: &BTreeSet<usize>,
) -> Result<DomainSpec> {
    if node_count == 0 {
        return Err(Error::InvalidArgument("empty graph".into()));
    }
    finish_domain(
        DomainKind::Graph,
        node_count,
        edges.to_vec(),
        boundary.clone(),
        Geometry::None,
    )
}

/// Assemble `(K, M)` for a domain: `K = weighted graph Laplacian + c·M`.
///
/// With [`MassMode::Identity`], `M = I` and the stored adjacency weights
/// are used as-is. With [`MassMode::Lumped`] (interval/grid kinds only),
/// the finite-volume weights and trapezoid node masses are derived from
/// the geometry.
pub fn assemble(domain: &DomainSpec, shift: f64, mass_mode: MassMode) -> Result<(FormPair, IndexSplit)> {
    if shift < 0.0 || !shift.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "shift c must be a nonnegative real, got {shift}"
        )));
    }
    let n = domain.node_count;
    let (edges, mass): (Vec<(usize, usize, f64)>, Vec<f64>) = match (mass_mode, &domain.geometry) {
        (MassMode::Identity, _) => (domain.adjacency.clone(), vec![1.0; n]),
        (MassMode::Lumped, Geometry::Interval { h }) => {
            let w = 1.0 / h;
            let edges: Vec<_> = domain.adjacency.iter().map(|&(i, j, _)| (i, j, w)).collect();
            let mut cells = vec![0usize; n];
            for &(i, j, _) in &edges {
                cells[i] += 1;
                cells[j] += 1;
            }
            let mass = cells.iter().map(|&c| h * c as f64 / 2.0).collect();
            (edges, mass)
        }
        (MassMode::Lumped, Geometry::Grid { rows, cols, h, mask, node_rc }) => {
            // a cell exists when all four of its corner nodes are masked in
            let cell_at = |r: usize, c: usize| -> bool {
                r + 1 < *rows
                    && c + 1 < *cols
                    && mask[r][c]
                    && mask[r + 1][c]
                    && mask[r][c + 1]
                    && mask[r + 1][c + 1]
            };
            let mut node_cells = vec![0usize; n];
            for (v, &(r, c)) in node_rc.iter().enumerate() {
                for (cr, cc) in [
                    (r.wrapping_sub(1), c.wrapping_sub(1)),
                    (r.wrapping_sub(1), c),
                    (r, c.wrapping_sub(1)),
                    (r, c),
                ] {
                    if cr < *rows && cc < *cols && cell_at(cr, cc) {
                        node_cells[v] += 1;
                    }
                }
            }
            let mut edges = Vec::with_capacity(domain.adjacency.len());
            for &(i, j, _) in &domain.adjacency {
                let (ri, ci) = node_rc[i];
                let (rj, cj) = node_rc[j];
                // cells adjacent to the edge i-j
                let adj_cells = if ri == rj {
                    // horizontal edge at column min(ci,cj)
                    let c = ci.min(cj);
                    [(ri.wrapping_sub(1), c), (ri, c)]
                } else {
                    let r = ri.min(rj);
                    [(r, ci.wrapping_sub(1)), (r, ci)]
                };
                let count = adj_cells
                    .iter()
                    .filter(|&&(r, c)| r < *rows && c < *cols && cell_at(r, c))
                    .count();
                if count == 0 {
                    return Err(Error::InvalidDomain(format!(
                        "lumped assembly: edge ({i}, {j}) borders no complete grid cell"
                    )));
                }
                edges.push((i, j, count as f64 / 2.0));
            }
            if node_cells.contains(&0) {
                return Err(Error::InvalidDomain(
                    "lumped assembly: a node belongs to no complete grid cell".into(),
                ));
            }
            let mass = node_cells.iter().map(|&c| h * h * c as f64 / 4.0).collect();
            (edges, mass)
        }
        (MassMode::Lumped, Geometry::None) => {
            return Err(Error::InvalidArgument(
                "lumped mass requires interval or grid geometry".into(),
            ))
        }
    };

    let mut k = DMatrix::zeros(n, n);
    for &(i, j, w) in &edges {
        k[(i, i)] += w;
        k[(j, j)] += w;
        k[(i, j)] -= w;
        k[(j, i)] -= w;
    }
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(mass));
    k += shift * &m;

    // positive definiteness of both matrices, with the offending pivot
    crate::inertia::cholesky_ll(&m).map_err(|pivot| Error::InvalidMass { pivot })?;
    crate::inertia::cholesky_ll(&k).map_err(|pivot| Error::AssemblyFailure { pivot })?;

    let split = IndexSplit::new(n, &domain.boundary)?;
    Ok((FormPair { k, m, shift }, split))
}

/// Parse a mask file: one row per line, `#` = in, `.` = out, rectangular.
pub fn parse_mask(text: &str) -> Result<Vec<Vec<bool>>> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for ch in line.chars() {
            match ch {
                '#' => row.push(true),
                '.' => row.push(false),
                other => {
                    return Err(Error::Parse(format!(
                        "mask line {}: unexpected character {other:?}",
                        ln + 1
                    )))
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("mask file is empty".into()));
    }
    let w = rows[0].len();
    if rows.iter().any(|r| r.len() != w) {
        return Err(Error::Parse("mask rows have unequal lengths".into()));
    }
    Ok(rows)
}

/// Parse a graph file: header `nodes N boundary i,j,...`, then one edge
/// per line `i j w`.
pub fn parse_graph(text: &str) -> Result<DomainSpec> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("graph file is empty".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "nodes" || toks[2] != "boundary" {
        return Err(Error::Parse(format!(
            "graph header must be 'nodes N boundary i,j,...', got {header:?}"
        )));
    }
    let n: usize = toks[1]
        .parse()
        .map_err(|_| Error::Parse(format!("bad node count {:?}", toks[1])))?;
    let mut boundary = BTreeSet::new();
    for part in toks[3].split(',') {
        let idx: usize = part
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad boundary index {part:?}")))?;
        boundary.insert(idx);
    }
    let mut edges = Vec::new();
    for line in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(Error::Parse(format!("edge line must be 'i j w', got {line:?}")));
        }
        let i: usize = t[0].parse().map_err(|_| Error::Parse(format!("bad index {:?}", t[0])))?;
        let j: usize = t[1].parse().map_err(|_| Error::Parse(format!("bad index {:?}", t[1])))?;
        let w: f64 = t[2].parse().map_err(|_| Error::Parse(format!("bad weight {:?}", t[2])))?;
        let (i, j) = (i.min(j), i.max(j));
        edges.push((i, j, w));
    }
    build_graph(n, &edges, &boundary)
}

pub fn load_mask(path: &std::path::Path) -> Result<Vec<Vec<bool>>> {
    parse_mask(&std::fs::read_to_string(path)?)
}

pub fn load_graph(path: &std::path::Path) -> Result<DomainSpec> {
    parse_graph(&std::fs::read_to_string(path)?)
}
