//! Division of a program graph into linear subgraphs, and the balanced
//! binary generation tree that fuses them back together.

pub mod solver;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphstate::{GraphState, VertexId};
pub use solver::{solve_binary_min, BinaryProgram, LinearBinaryProgram, Solution, SolverConfig};

pub type Edge = (VertexId, VertexId);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("program graph has no vertices")]
    Empty,
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("vertex {v} out of range for {n} vertices")]
    OutOfRange { v: VertexId, n: usize },
}

/// A simple undirected target graph; edges are stored sorted with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl ProgramGraph {
    pub fn new(n: usize, edges: &[Edge]) -> Result<Self, PartitionError> {
        if n == 0 {
            return Err(PartitionError::Empty);
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(PartitionError::SelfLoop(u));
            }
            if let Some(&w) = [u, v].iter().find(|&&w| w >= n) {
                return Err(PartitionError::OutOfRange { v: w, n });
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(PartitionError::DuplicateEdge(u, v));
            }
        }
        Ok(Self { n, edges: set.into_iter().collect() })
    }

    /// Every vertex id of `g` becomes a program vertex, retired ones isolated.
    pub fn from_graph_state(g: &GraphState) -> Result<Self, PartitionError> {
        Self::new(g.len(), &g.edges())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Connected components as sorted vertex lists, ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        components(self.n, &self.edges)
    }
}

fn components(n: usize, edges: &[Edge]) -> Vec<Vec<VertexId>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            for &w in &adj[comp[i]] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// The degree model: one variable per edge, `true` = cut, each vertex keeps
/// at most two incident edges, minimise the number of cuts.
#[derive(Debug, Clone)]
pub struct DegreeModel {
    n: usize,
    edges: Vec<Edge>,
    cap: usize,
}

impl DegreeModel {
    pub fn new(n: usize, edges: Vec<Edge>) -> Self {
        Self { n, edges, cap: 2 }
    }

    fn kept_degrees(&self, x: &[bool]) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for (&(u, v), &cut) in self.edges.iter().zip(x) {
            if !cut {
                d[u] += 1;
                d[v] += 1;
            }
        }
        d
    }
}

impl BinaryProgram for DegreeModel {
    fn num_vars(&self) -> usize {
        self.edges.len()
    }

    fn objective(&self, x: &[bool]) -> i64 {
        x.iter().filter(|&&c| c).count() as i64
    }

    fn feasible(&self, x: &[bool]) -> bool {
        self.kept_degrees(x).iter().all(|&d| d <= self.cap)
    }

    fn lower_bound(&self, prefix: &[bool]) -> Option<i64> {
        let kept = self.kept_degrees(prefix);
        if kept.iter().any(|&d| d > self.cap) {
            return None;
        }
        let rest = &self.edges[prefix.len()..];
        let mut open = vec![0usize; self.n];
        for &(u, v) in rest {
            open[u] += 1;
            open[v] += 1;
        }
        // Each further kept edge uses two units of residual vertex capacity.
        let slots: usize = (0..self.n).map(|v| (self.cap - kept[v]).min(open[v])).sum();
        // Every further kept edge also touches a vertex of any cover of the
        // open edges, so the cover's residual capacity bounds them too.
        let mut in_cover = vec![false; self.n];
        for &(u, v) in rest {
            if !in_cover[u] && !in_cover[v] {
                in_cover[if open[u] >= open[v] { u } else { v }] = true;
            }
        }
        let cover: usize = (0..self.n)
            .filter(|&v| in_cover[v])
            .map(|v| (self.cap - kept[v]).min(open[v]))
            .sum();
        let max_keep = (slots / 2).min(cover).min(rest.len());
        Some(self.objective(prefix) + (rest.len() - max_keep) as i64)
    }

    fn incumbent(&self) -> Option<Vec<bool>> {
        let mut d = vec![0; self.n];
        let x = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let keep = d[u] < self.cap && d[v] < self.cap;
                if keep {
                    d[u] += 1;
                    d[v] += 1;
                }
                !keep
            })
            .collect();
        Some(x)
    }
}

/// Balanced two-way split of `items` minimising weighted crossing pairs;
/// `true` sends an item to the right child. Item 0 is pinned left.
#[derive(Debug, Clone)]
pub struct BalancedSplit {
    weights: Vec<Vec<i64>>,
    lo: usize,
    hi: usize,
}

impl BalancedSplit {
    pub fn new(weights: Vec<Vec<i64>>) -> Self {
        let (lo, hi) = balance_bounds(weights.len());
        Self { weights, lo, hi }
    }

    fn crossing(&self, x: &[bool]) -> i64 {
        let mut c = 0;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                if x[i] != x[j] {
                    c += self.weights[i][j];
                }
            }
        }
        c
    }
}

impl BinaryProgram for BalancedSplit {
    fn num_vars(&self) -> usize {
        self.weights.len()
    }

    fn objective(&self, x: &[bool]) -> i64 {
        self.crossing(x)
    }

    fn feasible(&self, x: &[bool]) -> bool {
        let right = x.iter().filter(|&&r| r).count();
        x.first() != Some(&true) && (self.lo..=self.hi).contains(&right)
    }

    fn lower_bound(&self, prefix: &[bool]) -> Option<i64> {
        let right = prefix.iter().filter(|&&r| r).count();
        let left = prefix.len() - right;
        let s = self.weights.len();
        if prefix.first() == Some(&true) || right > self.hi || left > s - self.lo {
            return None;
        }
        // Unassigned items pay at least their cheaper side against the
        // assigned ones, plus whatever the size limits force onto the
        // dearer side.
        let mut base = 0;
        let mut to_right = Vec::with_capacity(s - prefix.len());
        let mut to_left = Vec::with_capacity(s - prefix.len());
        for j in prefix.len()..s {
            let (mut c_left, mut c_right) = (0, 0);
            for (i, &r) in prefix.iter().enumerate() {
                if r {
                    c_left += self.weights[i][j];
                } else {
                    c_right += self.weights[i][j];
                }
            }
            let m = c_left.min(c_right);
            base += m;
            to_right.push(c_right - m);
            to_left.push(c_left - m);
        }
        let forced = |extra: &mut Vec<i64>, need: usize| -> i64 {
            extra.sort_unstable();
            extra.iter().take(need).sum()
        };
        let need_right = self.lo.saturating_sub(right);
        let need_left = (s - self.hi).saturating_sub(left);
        let penalty = forced(&mut to_right, need_right).max(forced(&mut to_left, need_left));
        Some(self.crossing(prefix) + base + penalty)
    }

    fn incumbent(&self) -> Option<Vec<bool>> {
        let s = self.weights.len();
        let halves: Vec<bool> = (0..s).map(|i| i >= s.div_ceil(2)).collect();
        // Greedy: each item joins the side it is more attached to, while
        // leaving room for the other side's minimum.
        let mut greedy = Vec::with_capacity(s);
        let (mut left, mut right) = (0, 0);
        for j in 0..s {
            let (mut w_left, mut w_right) = (0, 0);
            for (i, &r) in greedy.iter().enumerate() {
                if r {
                    w_right += self.weights[i][j];
                } else {
                    w_left += self.weights[i][j];
                }
            }
            let remaining = s - j;
            let must_right = self.lo.saturating_sub(right) >= remaining;
            let must_left = (s - self.hi).saturating_sub(left) >= remaining || j == 0;
            let r = must_right || (!must_left && right < self.hi && w_right > w_left) || left >= s - self.lo;
            greedy.push(r);
            if r {
                right += 1;
            } else {
                left += 1;
            }
        }
        if self.feasible(&greedy) && self.crossing(&greedy) < self.crossing(&halves) {
            Some(greedy)
        } else {
            Some(halves)
        }
    }
}

/// Allowed child sizes `lo..=hi` for splitting `s ≥ 2` subgraphs: each
/// child must itself fit a tree of height `⌈log2 s⌉ − 1`.
pub fn balance_bounds(s: usize) -> (usize, usize) {
    if s < 2 {
        return (0, s);
    }
    let half = 1usize << (ceil_log2(s) - 1);
    (s - half, half)
}

pub fn ceil_log2(s: usize) -> usize {
    if s <= 1 {
        0
    } else {
        (usize::BITS - (s - 1).leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSolution {
    pub n: usize,
    pub kept_edges: Vec<Edge>,
    pub cut_edges: Vec<Edge>,
    /// Oriented linear subgraphs, each starting at its smaller endpoint,
    /// ordered by first vertex. Every vertex lies in exactly one.
    pub subgraphs: Vec<Vec<VertexId>>,
    /// Cut count of the degree model before acyclicity and length cuts.
    pub mip_cuts: usize,
    pub exact: bool,
    pub max_caterpillar: usize,
    pub encoding_overhead: usize,
    /// Indices of subgraphs still over capacity (a single vertex with too
    /// many fusion endpoints).
    pub capacity_violations: Vec<usize>,
}

impl CutSolution {
    pub fn k(&self) -> usize {
        self.cut_edges.len()
    }

    pub fn subgraph_of(&self) -> Vec<usize> {
        let mut owner = vec![usize::MAX; self.n];
        for (i, s) in self.subgraphs.iter().enumerate() {
            for &v in s {
                owner[v] = i;
            }
        }
        owner
    }

    pub fn cut_degree(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v) in &self.cut_edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    /// Caterpillar qubits needed by subgraph `i`: its main path plus
    /// `encoding_overhead` leaves per fusion endpoint.
    pub fn caterpillar_size(&self, i: usize) -> usize {
        let d = self.cut_degree();
        self.subgraphs[i].iter().map(|&v| 1 + self.encoding_overhead * d[v]).sum()
    }
}

/// Splits `g` into linear subgraphs with the minimum number of cut edges,
/// then cuts cycles open and splits paths to fit `max_caterpillar`.
pub fn divide_linear(g: &ProgramGraph, max_caterpillar: usize, encoding_overhead: usize) -> CutSolution {
    divide_linear_with(g, max_caterpillar, encoding_overhead, &SolverConfig::default())
}

pub fn divide_linear_with(
    g: &ProgramGraph,
    max_caterpillar: usize,
    encoding_overhead: usize,
    cfg: &SolverConfig,
) -> CutSolution {
    let (kept, mut cut, exact) = degree_cut(g, cfg);
    let mip_cuts = cut.len();

    let mut paths = Vec::new();
    for comp in components(g.n, &kept) {
        // With every degree ≤ 2, a component is a cycle iff |E| = |V|.
        let comp_edges: Vec<Edge> =
            kept.iter().copied().filter(|&(u, _)| comp.binary_search(&u).is_ok()).collect();
        let mut path_edges = comp_edges.clone();
        if comp.len() > 2 && comp_edges.len() == comp.len() {
            cut.push(path_edges.remove(0));
        }
        paths.push(orient_path(&comp, &path_edges));
    }

    let mut cut_deg = vec![0usize; g.n];
    for &(u, v) in &cut {
        cut_deg[u] += 1;
        cut_deg[v] += 1;
    }
    let mut subgraphs = Vec::new();
    let mut violations = Vec::new();
    for p in paths {
        split_to_capacity(&p, &mut cut_deg, max_caterpillar, encoding_overhead, &mut cut, &mut subgraphs, &mut violations);
    }

    // Re-index violations after sorting subgraphs.
    let flagged: BTreeSet<VertexId> = violations.iter().map(|&i: &usize| subgraphs[i][0]).collect();
    subgraphs.sort();
    let capacity_violations =
        subgraphs.iter().enumerate().filter(|(_, s)| flagged.contains(&s[0])).map(|(i, _)| i).collect();

    cut.sort_unstable();
    let cut_set: BTreeSet<Edge> = cut.iter().copied().collect();
    let kept_edges = g.edges.iter().copied().filter(|e| !cut_set.contains(e)).collect();
    CutSolution {
        n: g.n,
        kept_edges,
        cut_edges: cut,
        subgraphs,
        mip_cuts,
        exact,
        max_caterpillar,
        encoding_overhead,
        capacity_violations,
    }
}

/// Degree-model optimum, solved independently per connected component.
fn degree_cut(g: &ProgramGraph, cfg: &SolverConfig) -> (Vec<Edge>, Vec<Edge>, bool) {
    let mut kept = Vec::new();
    let mut cut = Vec::new();
    let mut exact = true;
    let adj = g.adjacency();
    for comp in g.components() {
        let edges: Vec<Edge> = g.edges.iter().copied().filter(|&(u, _)| comp.binary_search(&u).is_ok()).collect();
        if comp.iter().all(|&v| adj[v].len() <= 2) {
            kept.extend(edges);
            continue;
        }
        let model = DegreeModel::new(g.n, edges.clone());
        let sol = solve_binary_min(&model, cfg).expect("cutting every edge is feasible");
        exact &= sol.exact;
        for (e, c) in edges.into_iter().zip(sol.assignment) {
            if c {
                cut.push(e);
            } else {
                kept.push(e);
            }
        }
    }
    kept.sort_unstable();
    cut.sort_unstable();
    (kept, cut, exact)
}

/// Walks an acyclic component from its smaller endpoint.
fn orient_path(comp: &[VertexId], edges: &[Edge]) -> Vec<VertexId> {
    if comp.len() == 1 {
        return comp.to_vec();
    }
    let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let start = *adj.iter().find(|(_, n)| n.len() == 1).map(|(v, _)| v).expect("path has an endpoint");
    let mut path = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while let Some(&next) = adj[&cur].iter().find(|&&w| w != prev) {
        path.push(next);
        prev = cur;
        cur = next;
    }
    path
}

/// Greedily cuts `path` into the longest prefixes whose caterpillar fits.
#[allow(clippy::too_many_arguments)]
fn split_to_capacity(
    path: &[VertexId],
    cut_deg: &mut [usize],
    max: usize,
    overhead: usize,
    cut: &mut Vec<Edge>,
    out: &mut Vec<Vec<VertexId>>,
    violations: &mut Vec<usize>,
) {
    let mut i = 0;
    while i < path.len() {
        // An earlier split is already counted in `cut_deg`.
        let mut best = None;
        let mut cost = 0;
        for j in i..path.len() {
            cost += 1 + overhead * cut_deg[path[j]];
            let end_pen = if j + 1 < path.len() { overhead } else { 0 };
            if cost + end_pen <= max {
                best = Some(j);
            }
        }
        let j = best.unwrap_or(i);
        if best.is_none() {
            violations.push(out.len());
        }
        if j + 1 < path.len() {
            let (u, v) = (path[j], path[j + 1]);
            cut.push((u.min(v), u.max(v)));
            cut_deg[u] += 1;
            cut_deg[v] += 1;
        }
        let mut seg = path[i..=j].to_vec();
        if seg.len() > 1 && seg[0] > seg[seg.len() - 1] {
            seg.reverse();
        }
        out.push(seg);
        i = j + 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenNode {
    /// Indices into `CutSolution::subgraphs`.
    pub subgraphs: Vec<usize>,
    /// Cut edges executed when this node's children are merged; for a leaf,
    /// the cut edges internal to its subgraph.
    pub fusions: Vec<Edge>,
    pub children: Vec<GenNode>,
    /// The split at this node was proven optimal.
    pub exact: bool,
}

impl GenNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn height(&self) -> usize {
        self.children.iter().map(|c| 1 + c.height()).max().unwrap_or(0)
    }

    /// Largest fusion count on any path from this node down to a leaf.
    pub fn critical_path_cost(&self) -> usize {
        self.fusions.len() + self.children.iter().map(GenNode::critical_path_cost).max().unwrap_or(0)
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> Vec<&GenNode> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let node = out[i];
            out.splice(i + 1..i + 1, node.children.iter());
            i += 1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationTree {
    pub root: GenNode,
    pub height: usize,
}

impl GenerationTree {
    pub fn critical_path_cost(&self) -> usize {
        self.root.critical_path_cost()
    }

    pub fn nodes(&self) -> Vec<&GenNode> {
        self.root.walk()
    }

    pub fn total_fusions(&self) -> usize {
        self.nodes().iter().map(|n| n.fusions.len()).sum()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes().iter().filter(|n| n.is_leaf()).count()
    }

    pub fn exact(&self) -> bool {
        self.nodes().iter().all(|n| n.exact)
    }
}

pub fn build_generation_tree(cut: &CutSolution) -> GenerationTree {
    build_generation_tree_with(cut, &SolverConfig::default())
}

pub fn build_generation_tree_with(cut: &CutSolution, cfg: &SolverConfig) -> GenerationTree {
    let owner = cut.subgraph_of();
    let links: Vec<(usize, usize, Edge)> = cut.cut_edges.iter().map(|&(u, v)| (owner[u], owner[v], (u, v))).collect();
    let all: Vec<usize> = (0..cut.subgraphs.len()).collect();
    let root = build_node(&all, &links, cfg);
    let height = root.height();
    GenerationTree { root, height }
}

fn build_node(set: &[usize], links: &[(usize, usize, Edge)], cfg: &SolverConfig) -> GenNode {
    let pos: BTreeMap<usize, usize> = set.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let inside: Vec<(usize, usize, Edge)> = links
        .iter()
        .filter_map(|&(a, b, e)| Some((*pos.get(&a)?, *pos.get(&b)?, e)))
        .collect();
    if set.len() <= 1 {
        return GenNode { subgraphs: set.to_vec(), fusions: inside.iter().map(|l| l.2).collect(), children: vec![], exact: true };
    }
    let mut weights = vec![vec![0i64; set.len()]; set.len()];
    for &(i, j, _) in &inside {
        if i != j {
            weights[i][j] += 1;
            weights[j][i] += 1;
        }
    }
    let sol = solve_binary_min(&BalancedSplit::new(weights), cfg).expect("a balanced split always exists");
    let side = sol.assignment;
    let fusions = inside.iter().filter(|&&(i, j, _)| side[i] != side[j]).map(|l| l.2).collect();
    let left: Vec<usize> = set.iter().zip(&side).filter(|(_, &r)| !r).map(|(&s, _)| s).collect();
    let right: Vec<usize> = set.iter().zip(&side).filter(|(_, &r)| r).map(|(&s, _)| s).collect();
    GenNode {
        subgraphs: set.to_vec(),
        fusions,
        children: vec![build_node(&left, links, cfg), build_node(&right, links, cfg)],
        exact: sol.exact,
    }
}
