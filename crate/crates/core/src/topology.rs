//! Network graphs and consensus weight matrices.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigencore::dense_hermitian_eig;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Undirected simple graph on nodes `0..K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    positions: Option<Vec<[f64; 2]>>,
}

impl Graph {
    pub fn empty(nodes: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); nodes],
            positions: None,
        }
    }

    pub fn from_edges(nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(nodes);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(nodes: usize) -> Self {
        let mut g = Self::empty(nodes);
        for u in 0..nodes {
            for v in (u + 1)..nodes {
                g.add_edge(u, v).expect("valid indices");
            }
        }
        g
    }

    pub fn path(nodes: usize) -> Self {
        let mut g = Self::empty(nodes);
        for u in 1..nodes {
            g.add_edge(u - 1, u).expect("valid indices");
        }
        g
    }

    pub fn ring(nodes: usize) -> Self {
        let mut g = Self::path(nodes);
        if nodes > 2 {
            g.add_edge(nodes - 1, 0).expect("valid indices");
        }
        g
    }

    /// Inserts `{u, v}`; duplicates are ignored, self-loops rejected.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.node_count();
        for x in [u, v] {
            if x >= n {
                return Err(Error::NodeIndex { index: x, nodes: n });
            }
        }
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop on node {u}")));
        }
        if let Err(pos) = self.adjacency[u].binary_search(&v) {
            self.adjacency[u].insert(pos, v);
            let pos = self.adjacency[v].binary_search(&u).unwrap_err();
            self.adjacency[v].insert(pos, u);
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.adjacency[k]
    }

    pub fn degree(&self, k: usize) -> usize {
        self.adjacency[k].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u).is_some_and(|a| a.binary_search(&v).is_ok())
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    /// Number of nodes reached by BFS from node 0.
    pub fn reachable_from_first(&self) -> usize {
        let n = self.node_count();
        if n == 0 {
            return 0;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.reachable_from_first() == self.node_count()
    }

    /// Checks the simulation preconditions: connected, every degree ≥ 1.
    pub fn require_connected(&self) -> Result<()> {
        if !self.is_connected() || (self.node_count() > 1 && self.adjacency.iter().any(Vec::is_empty)) {
            return Err(Error::Disconnected);
        }
        Ok(())
    }

    /// Serializes in the edge-list format accepted by [`load_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.node_count());
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }
}

pub const DEFAULT_GEOMETRIC_RETRIES: usize = 100;

pub fn generate_random_geometric(nodes: usize, radius: f64, seed: u64) -> Result<Graph> {
    generate_random_geometric_with_retries(nodes, radius, seed, DEFAULT_GEOMETRIC_RETRIES)
}

/// Uniform placement in the unit square, edge iff distance ≤ `radius`.
/// Placements are redrawn until connected or the retry budget is spent.
pub fn generate_random_geometric_with_retries(
    nodes: usize,
    radius: f64,
    seed: u64,
    retries: usize,
) -> Result<Graph> {
    if nodes < 2 {
        return Err(Error::InvalidArgument("geometric graph needs K >= 2".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = radius * radius;
    for _ in 0..retries.max(1) {
        let pos: Vec<[f64; 2]> = (0..nodes).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let mut g = Graph::empty(nodes);
        for u in 0..nodes {
            for v in (u + 1)..nodes {
                let dx = pos[u][0] - pos[v][0];
                let dy = pos[u][1] - pos[v][1];
                if dx * dx + dy * dy <= r2 {
                    g.add_edge(u, v)?;
                }
            }
        }
        if g.is_connected() {
            g.positions = Some(pos);
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        nodes,
        radius,
        retries,
    })
}

/// Parses `K` on the first line and one `u v` pair per following line.
/// Blank lines and `#` comments are skipped; connectivity is not enforced.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line_no, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing node count".into(),
    })?;
    let nodes: usize = first.parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("bad node count {first:?}"),
    })?;
    if nodes == 0 {
        return Err(Error::Parse {
            line: line_no,
            message: "node count must be positive".into(),
        });
    }
    let mut g = Graph::empty(nodes);
    for (line, l) in lines {
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected \"u v\", got {l:?}"),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("bad node index {s:?}"),
            })
        };
        let (u, v) = (parse(parts[0])?, parse(parts[1])?);
        g.add_edge(u, v).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
    }
    Ok(g)
}

/// Symmetric stochastic consensus weights with sparse row storage.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    self_weight: Vec<f64>,
    neighbor_weights: Vec<Vec<(usize, f64)>>,
}

impl WeightMatrix {
    pub fn node_count(&self) -> usize {
        self.self_weight.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.self_weight[i];
        }
        self.neighbor_weights[i]
            .iter()
            .find(|(n, _)| *n == j)
            .map_or(0.0, |(_, w)| *w)
    }

    pub fn row(&self, i: usize) -> (f64, &[(usize, f64)]) {
        (self.self_weight[i], &self.neighbor_weights[i])
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.node_count();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        let n = self.node_count();
        CMatrix::from_fn(n, n, |i, j| C64::new(self.get(i, j), 0.0))
    }

    /// `out = W z`, rows of `z` being node vectors.
    pub fn apply(&self, z: &CMatrix, out: &mut CMatrix) {
        debug_assert_eq!(z.rows(), self.node_count());
        for i in 0..self.node_count() {
            let (wii, nbrs) = self.row(i);
            let dst = out.row_mut(i);
            for (d, s) in dst.iter_mut().zip(z.row(i)) {
                *d = s * wii;
            }
            for &(j, wij) in nbrs {
                for (d, s) in dst.iter_mut().zip(z.row(j)) {
                    *d += s * wij;
                }
            }
        }
    }
}

/// `W_ij = 1/(1 + max(d_i, d_j))` on edges, diagonal fills each row to one.
pub fn metropolis_weights(g: &Graph) -> WeightMatrix {
    metropolis_on(g.node_count(), |i| g.neighbors(i).iter().copied())
}

/// Metropolis weights on the subgraph of `g` whose edges satisfy `alive`.
pub fn metropolis_weights_filtered(g: &Graph, alive: impl Fn(usize, usize) -> bool) -> WeightMatrix {
    let nbrs: Vec<Vec<usize>> = (0..g.node_count())
        .map(|i| g.neighbors(i).iter().copied().filter(|&j| alive(i.min(j), i.max(j))).collect())
        .collect();
    metropolis_on(g.node_count(), |i| nbrs[i].iter().copied())
}

fn metropolis_on<I: Iterator<Item = usize>>(n: usize, nbrs: impl Fn(usize) -> I) -> WeightMatrix {
    let degree: Vec<usize> = (0..n).map(|i| nbrs(i).count()).collect();
    let mut self_weight = vec![0.0; n];
    let mut neighbor_weights = vec![Vec::new(); n];
    for i in 0..n {
        let mut off = 0.0;
        for j in nbrs(i) {
            let w = 1.0 / (1.0 + degree[i].max(degree[j]) as f64);
            off += w;
            neighbor_weights[i].push((j, w));
        }
        self_weight[i] = 1.0 - off;
    }
    WeightMatrix {
        self_weight,
        neighbor_weights,
    }
}

/// Spectral bounds of `W` on the disagreement subspace, configuring the
/// Chebyshev consensus engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChebyshevParams {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `(2 − λmax − λmin)/(λmax − λmin)`; infinite when degenerate.
    pub b1: f64,
    /// `λmin == λmax`: `W` acts as a multiple of the identity on the
    /// disagreement subspace and one shifted step averages exactly.
    pub degenerate: bool,
}

const DEGENERATE_GAP: f64 = 1e-9;
const LAMBDA_MIN_FLOOR: f64 = -1.0 + 1e-9;

impl ChebyshevParams {
    pub fn from_bounds(lambda_min: f64, lambda_max: f64) -> Result<Self> {
        let lambda_min = lambda_min.max(LAMBDA_MIN_FLOOR);
        if !(lambda_max < 1.0) || lambda_min > lambda_max + DEGENERATE_GAP {
            return Err(Error::InvalidArgument(format!(
                "invalid Chebyshev bounds [{lambda_min}, {lambda_max}]"
            )));
        }
        if lambda_max - lambda_min <= DEGENERATE_GAP {
            let c = 0.5 * (lambda_min + lambda_max);
            return Ok(Self {
                lambda_min: c,
                lambda_max: c,
                b1: f64::INFINITY,
                degenerate: true,
            });
        }
        Ok(Self {
            lambda_min,
            lambda_max,
            b1: (2.0 - lambda_max - lambda_min) / (lambda_max - lambda_min),
            degenerate: false,
        })
    }

    /// Chebyshev scalars `τ_0 … τ_t` with `τ_{t+1} = 2 b1 τ_t − τ_{t−1}`.
    pub fn tau(&self, t: usize) -> Vec<f64> {
        let mut tau = vec![1.0];
        if t >= 1 {
            tau.push(self.b1);
        }
        for i in 1..t {
            let next = 2.0 * self.b1 * tau[i] - tau[i - 1];
            tau.push(next);
        }
        tau
    }

    /// Guaranteed damping factor `1/τ_t` of the disagreement after `t` steps.
    pub fn damping(&self, t: usize) -> f64 {
        if t == 0 {
            return 1.0;
        }
        if self.degenerate {
            return 0.0;
        }
        1.0 / self.tau(t)[t]
    }
}

/// Smallest and second-largest eigenvalues of `w` from the dense oracle.
pub fn spectral_bounds(w: &WeightMatrix) -> Result<ChebyshevParams> {
    let n = w.node_count();
    if n < 2 {
        return ChebyshevParams::from_bounds(0.0, 0.0);
    }
    let values = dense_hermitian_eig(&w.to_cmatrix())?.values;
    ChebyshevParams::from_bounds(values[n - 1], values[1])
}
