//! Graph families and doubly-stochastic mixing matrices.
//!
//! The simulator communicates over a fixed graph whose weight matrix must be
//! primitive and doubly stochastic; the network then enters the analysis only
//! through `lambda`, the second-largest singular value of the weights.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::rng;

/// Tolerance for row/column sums of a doubly-stochastic matrix.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Attempts before giving up on a connected geometric graph.
pub const GEOMETRIC_MAX_ATTEMPTS: usize = 100;

/// Communication graph. An ordered pair `(i, j)` means node `j` sends to
/// node `i`; every node carries a self-loop so the induced weight matrix can
/// be primitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Build from the non-self-loop edge set; self-loops are added for all
    /// nodes. Fails if any endpoint is out of range or the graph is not
    /// strongly connected.
    pub fn new(n: usize, directed: bool, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Topology("node count must be >= 1".into()));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Topology(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            set.insert((i, j));
            if !directed {
                set.insert((j, i));
            }
        }
        for i in 0..n {
            set.insert((i, i));
        }
        let g = Graph { n, directed, edges: set };
        if !g.is_strongly_connected() {
            return Err(Error::Topology("graph is not strongly connected".into()));
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Nodes sending to `i`, including `i` itself.
    pub fn in_neighbors(&self, i: usize) -> Vec<usize> {
        self.edges
            .range((i, 0)..=(i, self.n - 1))
            .map(|&(_, j)| j)
            .collect()
    }

    /// In-degree counting the self-loop.
    pub fn in_degree(&self, i: usize) -> usize {
        self.edges.range((i, 0)..=(i, self.n - 1)).count()
    }

    /// Out-degree counting the self-loop.
    pub fn out_degree(&self, j: usize) -> usize {
        self.edges.iter().filter(|&&(_, s)| s == j).count()
    }

    /// Degree without the self-loop (the Metropolis degree).
    pub fn neighbor_degree(&self, i: usize) -> usize {
        self.in_degree(i) - 1
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges.iter().all(|&(i, j)| self.edges.contains(&(j, i)))
    }

    pub fn is_strongly_connected(&self) -> bool {
        reachable_from(self.n, &self.edges, 0).iter().all(|&r| r)
            && reachable_from(self.n, &transpose(&self.edges), 0).iter().all(|&r| r)
    }

    /// Edge-list text form: `n <count> directed|undirected`, then one `i j`
    /// pair per line. Undirected graphs list each pair once with `i <= j`.
    pub fn to_edge_list_string(&self) -> String {
        let mut s = String::new();
        let kind = if self.directed { "directed" } else { "undirected" };
        let _ = writeln!(s, "n {} {}", self.n, kind);
        for &(i, j) in &self.edges {
            if !self.directed && i > j {
                continue;
            }
            let _ = writeln!(s, "{i} {j}");
        }
        s
    }

    pub fn from_edge_list_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Topology("empty edge list".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "n" {
            return Err(Error::Topology(format!("bad header line: {header:?}")));
        }
        let n: usize = parts[1]
            .parse()
            .map_err(|_| Error::Topology(format!("bad node count: {:?}", parts[1])))?;
        let directed = match parts[2] {
            "directed" => true,
            "undirected" => false,
            other => return Err(Error::Topology(format!("bad graph kind: {other:?}"))),
        };
        let mut edges = Vec::new();
        for (ln, line) in lines {
            let mut it = line.split_whitespace();
            let (i, j) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => {
                    let i = a.parse().map_err(|_| Error::Topology(format!("line {}: bad node id", ln + 1)))?;
                    let j = b.parse().map_err(|_| Error::Topology(format!("line {}: bad node id", ln + 1)))?;
                    (i, j)
                }
                _ => return Err(Error::Topology(format!("line {}: expected `i j`", ln + 1))),
            };
            edges.push((i, j));
        }
        Graph::new(n, directed, edges)
    }
}

fn transpose(edges: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    edges.iter().map(|&(i, j)| (j, i)).collect()
}

fn reachable_from(n: usize, edges: &BTreeSet<(usize, usize)>, start: usize) -> Vec<bool> {
    // edges are (receiver, sender); walk sender -> receiver
    let mut out = vec![Vec::new(); n];
    for &(i, j) in edges {
        out[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for &w in &out[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Directed exponential graph: node `i` sends to `(i + 2^j) mod n` for each
/// power of two below `n`. Requires `n` a power of two so equal weights are
/// doubly stochastic.
pub fn build_exponential_graph(n: usize) -> Result<Graph> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Topology(format!(
            "exponential graph needs a power-of-two node count >= 2, got {n}"
        )));
    }
    let mut edges = Vec::new();
    let mut hop = 1;
    while hop < n {
        for i in 0..n {
            // (i + hop) receives from i
            edges.push(((i + hop) % n, i));
        }
        hop <<= 1;
    }
    Graph::new(n, true, edges)
}

/// Undirected 4-neighbor lattice.
pub fn build_grid_graph(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 || rows * cols < 2 {
        return Err(Error::Topology(format!("grid needs rows, cols >= 1 and rows*cols >= 2, got {rows}x{cols}")));
    }
    let idx = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((idx(r, c), idx(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((idx(r, c), idx(r + 1, c)));
            }
        }
    }
    Graph::new(rows * cols, false, edges)
}

/// Complete graph (every pair connected); with equal weights this gives
/// exact averaging, `lambda = 0`.
pub fn build_complete_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Topology("complete graph needs n >= 2".into()));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j));
        }
    }
    Graph::new(n, false, edges)
}

/// Default geometric radius targeting mean degree ~8 on the unit square.
pub fn default_geometric_radius(n: usize) -> f64 {
    (8.0 / (std::f64::consts::PI * n as f64)).sqrt().min(std::f64::consts::SQRT_2)
}

/// Random geometric graph on the unit square: nodes are uniform points,
/// connected when within `radius`. Redraws (up to [`GEOMETRIC_MAX_ATTEMPTS`])
/// until connected; a pure function of `(n, radius, seed)`.
pub fn build_geometric_graph(n: usize, radius: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Topology("geometric graph needs n >= 2".into()));
    }
    if !(radius > 0.0 && radius <= std::f64::consts::SQRT_2) {
        return Err(Error::Topology(format!("radius must lie in (0, sqrt(2)], got {radius}")));
    }
    let r2 = radius * radius;
    for attempt in 0..GEOMETRIC_MAX_ATTEMPTS {
        let mut g = rng::stream(seed, attempt as u64, u64::MAX);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (g.gen::<f64>(), g.gen::<f64>())).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = pts[i].0 - pts[j].0;
                let dy = pts[i].1 - pts[j].1;
                if dx * dx + dy * dy <= r2 {
                    edges.push((i, j));
                }
            }
        }
        if let Ok(graph) = Graph::new(n, false, edges) {
            return Ok(graph);
        }
    }
    Err(Error::Topology(format!(
        "no connected geometric graph in {GEOMETRIC_MAX_ATTEMPTS} attempts (n = {n}, radius = {radius}); increase the radius"
    )))
}

/// Doubly-stochastic mixing matrix with its cached connectivity `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    w: Vec<f64>,
    lambda: f64,
}

impl WeightMatrix {
    /// Validate a dense row-major matrix and cache its spectral gap.
    pub fn from_entries(n: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != n * n {
            return Err(Error::Topology(format!("expected {n}x{n} entries, got {}", w.len())));
        }
        let lambda = spectral_gap_of_entries(&w, n)?;
        Ok(WeightMatrix { n, w, lambda })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `lambda = ||W - J||`, the second-largest singular value.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn entries(&self) -> &[f64] {
        &self.w
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    /// `out = W * input`, applied blockwise to the n x p stacked state
    /// (the Kronecker lift is never materialized).
    pub fn mix(&self, input: &Mat, out: &mut Mat) {
        let n = self.n;
        let p = input.cols();
        assert_eq!(input.rows(), n);
        assert_eq!(out.rows(), n);
        assert_eq!(out.cols(), p);
        for i in 0..n {
            let wrow = &self.w[i * n..(i + 1) * n];
            let orow = out.row_mut(i);
            orow.iter_mut().for_each(|x| *x = 0.0);
            for (j, &wij) in wrow.iter().enumerate() {
                if wij == 0.0 {
                    continue;
                }
                let irow = input.row(j);
                for (o, v) in orow.iter_mut().zip(irow) {
                    *o += wij * v;
                }
            }
        }
    }

    /// Dense CSV form: n rows of n comma-separated decimals at 17
    /// significant digits (round-trips exactly in binary64).
    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            let row: Vec<String> = self.w[i * self.n..(i + 1) * self.n]
                .iter()
                .map(|v| format!("{v:.16e}"))
                .collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            rows.push(row.map_err(|_| Error::Topology(format!("weight csv line {}: bad number", ln + 1)))?);
        }
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Topology("weight csv must be square and non-empty".into()));
        }
        WeightMatrix::from_entries(n, rows.concat())
    }
}

/// Equal in-weights `1/d` on a regular balanced graph.
pub fn equal_weights(g: &Graph) -> Result<WeightMatrix> {
    let n = g.n();
    let d = g.in_degree(0);
    for i in 0..n {
        if g.in_degree(i) != d || g.out_degree(i) != d {
            return Err(Error::Topology(
                "equal weights need a regular balanced graph; use metropolis_weights instead".into(),
            ));
        }
    }
    let mut w = vec![0.0; n * n];
    let inv = 1.0 / d as f64;
    for (i, j) in g.edges() {
        w[i * n + j] = inv;
    }
    WeightMatrix::from_entries(n, w)
}

/// Metropolis weights on an undirected graph:
/// `w_ij = 1 / (1 + max(deg_i, deg_j))` off-diagonal, remainder on the
/// diagonal. Degrees exclude the self-loop.
pub fn metropolis_weights(g: &Graph) -> Result<WeightMatrix> {
    metropolis_entries(g).and_then(|w| WeightMatrix::from_entries(g.n(), w))
}

/// Lazy Metropolis weights `(I + W_metropolis) / 2`. This is the variant
/// whose 4x4-grid lambda matches the reported 0.93; the plain rule gives
/// 0.869 on the same grid.
pub fn lazy_metropolis_weights(g: &Graph) -> Result<WeightMatrix> {
    let n = g.n();
    let mut w = metropolis_entries(g)?;
    for v in w.iter_mut() {
        *v *= 0.5;
    }
    for i in 0..n {
        w[i * n + i] += 0.5;
    }
    WeightMatrix::from_entries(n, w)
}

fn metropolis_entries(g: &Graph) -> Result<Vec<f64>> {
    if !g.is_symmetric() {
        return Err(Error::Topology("metropolis weights need an undirected (symmetric) graph".into()));
    }
    let n = g.n();
    let deg: Vec<usize> = (0..n).map(|i| g.neighbor_degree(i)).collect();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        let mut off = 0.0;
        for j in g.in_neighbors(i) {
            if j == i {
                continue;
            }
            let wij = 1.0 / (1 + deg[i].max(deg[j])) as f64;
            w[i * n + j] = wij;
            off += wij;
        }
        w[i * n + i] = 1.0 - off;
    }
    Ok(w)
}

fn row_col_sum_errors(w: &[f64], n: usize) -> (f64, f64) {
    let mut row_err = 0.0_f64;
    let mut col_err = 0.0_f64;
    for i in 0..n {
        let rs: f64 = w[i * n..(i + 1) * n].iter().sum();
        row_err = row_err.max((rs - 1.0).abs());
    }
    for j in 0..n {
        let cs: f64 = (0..n).map(|i| w[i * n + j]).sum();
        col_err = col_err.max((cs - 1.0).abs());
    }
    (row_err, col_err)
}

fn spectral_gap_of_entries(w: &[f64], n: usize) -> Result<f64> {
    let (re, ce) = row_col_sum_errors(w, n);
    if re > STOCHASTIC_TOL || ce > STOCHASTIC_TOL {
        return Err(Error::Topology(format!(
            "matrix is not doubly stochastic (row err {re:.3e}, col err {ce:.3e}); lambda < 1 is not guaranteed"
        )));
    }
    if w.iter().any(|&v| v < 0.0) {
        return Err(Error::Topology("matrix has negative entries".into()));
    }
    let jval = 1.0 / n as f64;
    let deflated: Vec<f64> = w.iter().map(|&v| v - jval).collect();
    Ok(linalg::spectral_norm(&deflated, n))
}

/// `lambda = ||W - J||` for a doubly-stochastic matrix (power iteration on
/// the deflated matrix; see [`linalg::spectral_norm`]).
pub fn spectral_gap(w: &WeightMatrix) -> f64 {
    w.lambda()
}

/// Diagnostic report for an arbitrary candidate weight matrix.
#[derive(Debug, Clone)]
pub struct WeightReport {
    pub row_sum_err: f64,
    pub col_sum_err: f64,
    pub min_entry: f64,
    /// Positivity pattern strongly connected with all self-loops present.
    pub primitive: bool,
    pub lambda: Option<f64>,
    pub pass: bool,
}

/// Check Assumption-style contracts on raw entries: stochastic sums,
/// nonnegativity, primitivity of the positivity pattern, and `lambda < 1`.
pub fn validate_weight_matrix(n: usize, w: &[f64]) -> WeightReport {
    assert_eq!(w.len(), n * n, "shape mismatch");
    let (row_sum_err, col_sum_err) = row_col_sum_errors(w, n);
    let min_entry = w.iter().copied().fold(f64::INFINITY, f64::min);
    let self_loops = (0..n).all(|i| w[i * n + i] > 0.0);
    let edges: BTreeSet<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| w[i * n + j] > 0.0).map(move |j| (i, j)))
        .collect();
    let connected = reachable_from(n, &edges, 0).iter().all(|&r| r)
        && reachable_from(n, &transpose(&edges), 0).iter().all(|&r| r);
    let primitive = self_loops && connected;
    let sums_ok = row_sum_err <= STOCHASTIC_TOL && col_sum_err <= STOCHASTIC_TOL && min_entry >= 0.0;
    let lambda = if sums_ok {
        let jval = 1.0 / n as f64;
        let deflated: Vec<f64> = w.iter().map(|&v| v - jval).collect();
        Some(linalg::spectral_norm(&deflated, n))
    } else {
        None
    };
    let pass = sums_ok && primitive && lambda.map(|l| l < 1.0).unwrap_or(false);
    WeightReport { row_sum_err, col_sum_err, min_entry, primitive, lambda, pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_smallest_case() {
        let g = build_exponential_graph(2).unwrap();
        assert!(g.has_edge(1, 0) && g.has_edge(0, 1));
        assert!(g.has_edge(0, 0) && g.has_edge(1, 1));
        assert_eq!(g.in_degree(0), 2);
    }

    #[test]
    fn exponential_n4_offsets() {
        let g = build_exponential_graph(4).unwrap();
        // node 0 sends to {1, 2}
        assert!(g.has_edge(1, 0) && g.has_edge(2, 0));
        assert!(!g.has_edge(3, 0));
        for i in 0..4 {
            assert_eq!(g.in_degree(i) - 1, 2, "in-degree excluding self-loop");
        }
    }

    #[test]
    fn exponential_n16_degree() {
        let g = build_exponential_graph(16).unwrap();
        for i in 0..16 {
            assert_eq!(g.out_degree(i) - 1, 4);
            assert_eq!(g.in_degree(i) - 1, 4);
        }
    }

    #[test]
    fn exponential_rejects_non_power_of_two() {
        assert!(build_exponential_graph(12).is_err());
        assert!(build_exponential_graph(1).is_err());
    }

    #[test]
    fn grid_1x2_single_edge() {
        let g = build_grid_graph(1, 2).unwrap();
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
    }

    #[test]
    fn grid_4x4_edge_count_and_degrees() {
        let g = build_grid_graph(4, 4).unwrap();
        let undirected_edges = g.edges().filter(|&(i, j)| i < j).count();
        assert_eq!(undirected_edges, 24);
        assert_eq!(g.neighbor_degree(0), 2); // corner
        assert_eq!(g.neighbor_degree(5), 4); // interior
    }

    #[test]
    fn grid_2x2_is_a_cycle() {
        let g = build_grid_graph(2, 2).unwrap();
        assert_eq!(g.edges().filter(|&(i, j)| i < j).count(), 4);
        for i in 0..4 {
            assert_eq!(g.neighbor_degree(i), 2);
        }
    }

    #[test]
    fn geometric_max_radius_two_nodes() {
        let g = build_geometric_graph(2, std::f64::consts::SQRT_2, 1).unwrap();
        assert!(g.has_edge(0, 1));
    }

    #[test]
    fn geometric_is_deterministic() {
        let a = build_geometric_graph(50, 0.3, 7).unwrap();
        let b = build_geometric_graph(50, 0.3, 7).unwrap();
        assert_eq!(a, b);
        let c = build_geometric_graph(50, 0.3, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn geometric_rejects_tiny_radius() {
        let err = build_geometric_graph(64, 0.005, 3).unwrap_err();
        assert!(err.to_string().contains("radius"));
    }

    #[test]
    fn equal_weights_complete_graph_is_j() {
        let w = equal_weights(&build_complete_graph(5).unwrap()).unwrap();
        for v in w.entries() {
            assert!((v - 0.2).abs() < 1e-15);
        }
        assert!(w.lambda() < 1e-10);
    }

    #[test]
    fn equal_weights_two_nodes() {
        let w = equal_weights(&build_exponential_graph(2).unwrap()).unwrap();
        assert_eq!(w.entries(), &[0.5, 0.5, 0.5, 0.5]);
        assert!(w.lambda() < 1e-10);
    }

    #[test]
    fn equal_weights_exponential_16() {
        let w = equal_weights(&build_exponential_graph(16).unwrap()).unwrap();
        for i in 0..16 {
            let nz: Vec<f64> = (0..16).map(|j| w.get(i, j)).filter(|&v| v > 0.0).collect();
            assert_eq!(nz.len(), 5);
            assert!(nz.iter().all(|&v| (v - 0.2).abs() < 1e-15));
        }
        assert!((w.lambda() - 0.6).abs() < 1e-9, "lambda = {}", w.lambda());
    }

    #[test]
    fn equal_weights_rejects_irregular() {
        let g = build_grid_graph(4, 4).unwrap();
        let err = equal_weights(&g).unwrap_err();
        assert!(err.to_string().contains("metropolis"));
    }

    #[test]
    fn metropolis_two_nodes() {
        let w = metropolis_weights(&build_grid_graph(1, 2).unwrap()).unwrap();
        assert_eq!(w.entries(), &[0.5, 0.5, 0.5, 0.5]);
        assert!(w.lambda() < 1e-10);
    }

    #[test]
    fn metropolis_path_graph() {
        let g = Graph::new(3, false, [(0, 1), (1, 2)]).unwrap();
        let w = metropolis_weights(&g).unwrap();
        assert!((w.get(0, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((w.get(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((w.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn metropolis_rejects_directed() {
        let g = build_exponential_graph(4).unwrap();
        assert!(metropolis_weights(&g).is_err());
    }

    #[test]
    fn metropolis_grid_lambda_values() {
        let g = build_grid_graph(4, 4).unwrap();
        let plain = metropolis_weights(&g).unwrap();
        let lazy = lazy_metropolis_weights(&g).unwrap();
        assert!((plain.lambda() - 0.8686406182898111).abs() < 1e-6, "plain = {}", plain.lambda());
        assert!((lazy.lambda() - 0.9343203091449057).abs() < 1e-6, "lazy = {}", lazy.lambda());
    }

    #[test]
    fn metropolis_is_symmetric() {
        let g = build_grid_graph(3, 5).unwrap();
        let w = metropolis_weights(&g).unwrap();
        for i in 0..15 {
            for j in 0..15 {
                assert_eq!(w.get(i, j), w.get(j, i));
            }
        }
    }

    #[test]
    fn spectral_gap_symmetric_two_node() {
        let w = WeightMatrix::from_entries(2, vec![0.75, 0.25, 0.25, 0.75]).unwrap();
        assert!((w.lambda() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn spectral_gap_rejects_identity_style_inputs() {
        // identity is doubly stochastic but not primitive; construction
        // succeeds with lambda = 1 reported by validate, while from_entries
        // accepts it (sums are fine) -- validate_weight_matrix must fail it.
        let rep = validate_weight_matrix(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(!rep.pass);
        assert!(!rep.primitive);
    }

    #[test]
    fn spectral_gap_rejects_nonstochastic() {
        let err = WeightMatrix::from_entries(2, vec![0.8, 0.25, 0.25, 0.75]).unwrap_err();
        assert!(err.to_string().contains("doubly stochastic"));
    }

    #[test]
    fn validate_passes_metropolis_grid() {
        let w = metropolis_weights(&build_grid_graph(4, 4).unwrap()).unwrap();
        let rep = validate_weight_matrix(16, w.entries());
        assert!(rep.pass);
        assert!(rep.row_sum_err < 1e-12 && rep.col_sum_err < 1e-12);
    }

    #[test]
    fn validate_reports_scaled_row() {
        let w = metropolis_weights(&build_grid_graph(2, 2).unwrap()).unwrap();
        let mut bad = w.entries().to_vec();
        for j in 0..4 {
            bad[j] *= 1.01;
        }
        let rep = validate_weight_matrix(4, &bad);
        assert!(!rep.pass);
        assert!((rep.row_sum_err - 0.01).abs() < 1e-10);
    }

    #[test]
    fn validate_fails_permutation() {
        // 3-cycle permutation: doubly stochastic but periodic (no self-loops)
        let p = [0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let rep = validate_weight_matrix(3, &p);
        assert!(!rep.primitive);
        assert!(!rep.pass);
        assert!((rep.lambda.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn edge_list_round_trip() {
        for g in [
            build_exponential_graph(8).unwrap(),
            build_grid_graph(3, 4).unwrap(),
            build_geometric_graph(30, 0.4, 5).unwrap(),
        ] {
            let text = g.to_edge_list_string();
            let back = Graph::from_edge_list_str(&text).unwrap();
            assert_eq!(g, back);
        }
    }

    #[test]
    fn weight_csv_round_trip_is_exact() {
        let w = metropolis_weights(&build_grid_graph(4, 4).unwrap()).unwrap();
        let back = WeightMatrix::from_csv_str(&w.to_csv_string()).unwrap();
        assert_eq!(w.entries(), back.entries());
    }

    #[test]
    fn mix_preserves_column_means() {
        let w = metropolis_weights(&build_grid_graph(4, 4).unwrap()).unwrap();
        let mut x = Mat::zeros(16, 2);
        for i in 0..16 {
            x.row_mut(i)[0] = i as f64;
            x.row_mut(i)[1] = (i as f64).sin();
        }
        let mut out = Mat::zeros(16, 2);
        w.mix(&x, &mut out);
        let mut before = [0.0; 2];
        let mut after = [0.0; 2];
        x.col_mean(&mut before);
        out.col_mean(&mut after);
        assert!((before[0] - after[0]).abs() < 1e-12);
        assert!((before[1] - after[1]).abs() < 1e-12);
    }
}
