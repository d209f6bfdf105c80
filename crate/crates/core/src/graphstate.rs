//! Graph states and the measurement / fusion rewrite rules on them.
//!
//! A [`GraphState`] tracks topology only. Pauli-frame corrections that a
//! physical implementation would apply after a measurement are not modelled;
//! every rule here is exact up to local Pauli operators, which is what the
//! stabilizer oracle checks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexStatus {
    Active,
    /// Removed by a measurement. The id is retired, never reused.
    MeasuredOut,
    /// Photon lost during a fusion. Edges are kept until the loss is resolved
    /// with [`GraphState::indirect_z`] or the component is discarded.
    Lost,
}

/// Outcome of a type-II fusion between two photons `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FusionOutcome {
    Success,
    Failure,
    /// Photon `a` lost, `b` detected.
    ErasureA,
    /// Photon `b` lost, `a` detected.
    ErasureB,
    ErasureBoth,
}

impl FusionOutcome {
    pub fn is_erasure(self) -> bool {
        matches!(self, Self::ErasureA | Self::ErasureB | Self::ErasureBoth)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("vertex {v} out of range for a graph with {n} vertices")]
    OutOfRange { v: VertexId, n: usize },
    #[error("vertex {v} is {status:?}, expected Active")]
    NotActive { v: VertexId, status: VertexStatus },
    #[error("vertex {0} is not marked Lost")]
    NotLost(VertexId),
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(VertexId, VertexId),
    #[error("vertices {0} and {1} are adjacent")]
    Adjacent(VertexId, VertexId),
    #[error("vertex {v} has degree {degree}, rule requires at most 2")]
    DegreeTooHigh { v: VertexId, degree: usize },
    #[error("fusion needs two distinct vertices, got {0} twice")]
    SameVertex(VertexId),
}

/// Undirected simple graph of qubits with a status per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphState {
    status: Vec<VertexStatus>,
    adj: Vec<BTreeSet<VertexId>>,
}

impl GraphState {
    /// `n` isolated Active vertices.
    pub fn new(n: usize) -> Self {
        Self {
            status: alloc::vec![VertexStatus::Active; n],
            adj: alloc::vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Appends a fresh Active vertex and returns its id.
    pub fn add_vertex(&mut self) -> VertexId {
        self.status.push(VertexStatus::Active);
        self.adj.push(BTreeSet::new());
        self.status.len() - 1
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        self.require_active(u)?;
        self.require_active(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !self.adj[u].insert(v) {
            return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
        }
        self.adj[v].insert(u);
        Ok(())
    }

    /// Total number of vertex ids ever allocated, including retired ones.
    pub fn len(&self) -> usize {
        self.status.len()
    }

    pub fn is_empty(&self) -> bool {
        self.status.is_empty()
    }

    pub fn status(&self, v: VertexId) -> Option<VertexStatus> {
        self.status.get(v).copied()
    }

    pub fn is_active(&self, v: VertexId) -> bool {
        self.status(v) == Some(VertexStatus::Active)
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj.get(u).is_some_and(|n| n.contains(&v))
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for (u, ns) in self.adj.iter().enumerate() {
            out.extend(ns.range(u + 1..).map(|&v| (u, v)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn active_vertices(&self) -> Vec<VertexId> {
        (0..self.len()).filter(|&v| self.is_active(v)).collect()
    }

    /// Whether the non-retired vertices form one connected component.
    pub fn is_connected(&self) -> bool {
        let live: Vec<VertexId> = (0..self.len())
            .filter(|&v| self.status[v] != VertexStatus::MeasuredOut)
            .collect();
        let Some(&start) = live.first() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut stack = alloc::vec![start];
        while let Some(u) = stack.pop() {
            for w in self.neighbors(u) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == live.len()
    }

    /// Checks symmetry, irreflexivity and that edges only touch live vertices.
    pub fn validate(&self) -> bool {
        self.adj.iter().enumerate().all(|(u, ns)| {
            ns.iter().all(|&v| {
                v != u
                    && v < self.len()
                    && self.adj[v].contains(&u)
                    && self.status[u] != VertexStatus::MeasuredOut
                    && self.status[v] != VertexStatus::MeasuredOut
            })
        })
    }

    fn require_in_range(&self, v: VertexId) -> Result<(), GraphError> {
        if v < self.len() {
            Ok(())
        } else {
            Err(GraphError::OutOfRange { v, n: self.len() })
        }
    }

    fn require_active(&self, v: VertexId) -> Result<(), GraphError> {
        self.require_in_range(v)?;
        match self.status[v] {
            VertexStatus::Active => Ok(()),
            status => Err(GraphError::NotActive { v, status }),
        }
    }

    fn detach(&mut self, v: VertexId) {
        for w in core::mem::take(&mut self.adj[v]) {
            self.adj[w].remove(&v);
        }
    }

    fn toggle_edge(&mut self, u: VertexId, v: VertexId) {
        if !self.adj[u].remove(&v) {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        } else {
            self.adj[v].remove(&u);
        }
    }

    /// Marks an Active vertex as Lost, keeping its edges.
    pub fn mark_lost(&mut self, v: VertexId) -> Result<(), GraphError> {
        self.require_active(v)?;
        self.status[v] = VertexStatus::Lost;
        Ok(())
    }

    /// Pauli-Z measurement: `v` is removed along with all of its bonds.
    pub fn measure_z(&self, v: VertexId) -> Result<Self, GraphError> {
        let mut g = self.clone();
        g.measure_z_in_place(v)?;
        Ok(g)
    }

    pub fn measure_z_in_place(&mut self, v: VertexId) -> Result<(), GraphError> {
        self.require_active(v)?;
        self.detach(v);
        self.status[v] = VertexStatus::MeasuredOut;
        Ok(())
    }

    /// X measurements on two adjacent qubits of a linear cluster. Their outer
    /// neighbours get bonded directly.
    pub fn measure_x_pair(&self, u: VertexId, v: VertexId) -> Result<Self, GraphError> {
        let mut g = self.clone();
        g.measure_x_pair_in_place(u, v)?;
        Ok(g)
    }

    pub fn measure_x_pair_in_place(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        self.require_active(u)?;
        self.require_active(v)?;
        if !self.has_edge(u, v) {
            return Err(GraphError::NotAdjacent(u, v));
        }
        for x in [u, v] {
            if self.degree(x) > 2 {
                return Err(GraphError::DegreeTooHigh { v: x, degree: self.degree(x) });
            }
        }
        let outer_u: Vec<VertexId> = self.neighbors(u).filter(|&a| a != v).collect();
        let outer_v: Vec<VertexId> = self.neighbors(v).filter(|&b| b != u).collect();
        self.detach(u);
        self.detach(v);
        self.status[u] = VertexStatus::MeasuredOut;
        self.status[v] = VertexStatus::MeasuredOut;
        for &a in &outer_u {
            for &b in &outer_v {
                // a == b only in a triangle; the shared neighbour ends isolated.
                if a != b {
                    self.toggle_edge(a, b);
                }
            }
        }
        Ok(())
    }

    /// Indirect Z measurement of a lost qubit through one of its neighbours:
    /// X on `helper`, Z on every other neighbour of `helper`. The lost qubit,
    /// the helper and those neighbours all leave the graph.
    pub fn indirect_z(&self, lost: VertexId, helper: VertexId) -> Result<Self, GraphError> {
        let mut g = self.clone();
        g.indirect_z_in_place(lost, helper)?;
        Ok(g)
    }

    pub fn indirect_z_in_place(&mut self, lost: VertexId, helper: VertexId) -> Result<(), GraphError> {
        self.require_in_range(lost)?;
        if self.status[lost] != VertexStatus::Lost {
            return Err(GraphError::NotLost(lost));
        }
        self.require_active(helper)?;
        if !self.has_edge(lost, helper) {
            return Err(GraphError::NotAdjacent(lost, helper));
        }
        let others: Vec<VertexId> = self.neighbors(helper).filter(|&w| w != lost).collect();
        for j in others {
            match self.status[j] {
                VertexStatus::Active => self.measure_z_in_place(j)?,
                // A second lost neighbour: its Z outcome is fixed by the same
                // pattern, so it is retired without a measurement.
                _ => {
                    self.detach(j);
                    self.status[j] = VertexStatus::MeasuredOut;
                }
            }
        }
        self.detach(helper);
        self.status[helper] = VertexStatus::MeasuredOut;
        self.detach(lost);
        self.status[lost] = VertexStatus::MeasuredOut;
        Ok(())
    }

    /// Type-II fusion between `a` and `b`.
    ///
    /// On success both photons are consumed and every pair `(x, y)` with
    /// `x ∈ N(a)`, `y ∈ N(b)`, `x != y` has its bond toggled. On failure both
    /// are Z-measured. On erasure the lost photon(s) become [`VertexStatus::Lost`]
    /// and a detected partner is Z-measured.
    pub fn fuse_type2(&self, a: VertexId, b: VertexId, outcome: FusionOutcome) -> Result<Self, GraphError> {
        let mut g = self.clone();
        g.fuse_type2_in_place(a, b, outcome)?;
        Ok(g)
    }

    pub fn fuse_type2_in_place(
        &mut self,
        a: VertexId,
        b: VertexId,
        outcome: FusionOutcome,
    ) -> Result<(), GraphError> {
        self.require_active(a)?;
        self.require_active(b)?;
        if a == b {
            return Err(GraphError::SameVertex(a));
        }
        if self.has_edge(a, b) {
            return Err(GraphError::Adjacent(a, b));
        }
        match outcome {
            FusionOutcome::Success => {
                let na: Vec<VertexId> = self.neighbors(a).collect();
                let nb: Vec<VertexId> = self.neighbors(b).collect();
                self.measure_z_in_place(a)?;
                self.measure_z_in_place(b)?;
                for &x in &na {
                    for &y in &nb {
                        if x != y {
                            self.toggle_edge(x, y);
                        }
                    }
                }
            }
            FusionOutcome::Failure => {
                self.measure_z_in_place(a)?;
                self.measure_z_in_place(b)?;
            }
            FusionOutcome::ErasureA => {
                self.mark_lost(a)?;
                self.measure_z_in_place(b)?;
            }
            FusionOutcome::ErasureB => {
                self.mark_lost(b)?;
                self.measure_z_in_place(a)?;
            }
            FusionOutcome::ErasureBoth => {
                self.mark_lost(a)?;
                self.mark_lost(b)?;
            }
        }
        Ok(())
    }

    /// Decomposes a tree into a main path plus degree-1 leaves.
    ///
    /// The longest admissible main path is chosen; ties go to the
    /// lexicographically smallest vertex sequence. Returns `None` for graphs
    /// that are not caterpillars, are disconnected, or contain non-Active
    /// vertices with bonds.
    pub fn is_caterpillar(&self) -> Option<CaterpillarSpec> {
        let active = self.active_vertices();
        if active.is_empty() || !self.is_connected() {
            return None;
        }
        if (0..self.len()).any(|v| self.status[v] == VertexStatus::Lost) {
            return None;
        }
        if self.edge_count() + 1 != active.len() {
            return None;
        }

        let mut best: Option<Vec<VertexId>> = None;
        for &s in &active {
            let parent = self.bfs_parents(s);
            for &t in &active {
                let mut path = alloc::vec![t];
                let mut cur = t;
                while cur != s {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse();
                let better = match &best {
                    None => true,
                    Some(b) => path.len() > b.len() || (path.len() == b.len() && path < *b),
                };
                if better && self.leaves_hang_off(&path) {
                    best = Some(path);
                }
            }
        }

        let main_path = best?;
        let on_path: BTreeSet<VertexId> = main_path.iter().copied().collect();
        let mut leaves: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for &v in &active {
            if !on_path.contains(&v) {
                let anchor = self.neighbors(v).next()?;
                leaves.entry(anchor).or_default().push(v);
            }
        }
        Some(CaterpillarSpec { main_path, leaves })
    }

    fn bfs_parents(&self, s: VertexId) -> BTreeMap<VertexId, VertexId> {
        let mut parent = BTreeMap::from([(s, s)]);
        let mut queue = alloc::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for w in self.neighbors(u) {
                if let alloc::collections::btree_map::Entry::Vacant(e) = parent.entry(w) {
                    e.insert(u);
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    fn leaves_hang_off(&self, path: &[VertexId]) -> bool {
        let on_path: BTreeSet<VertexId> = path.iter().copied().collect();
        self.active_vertices().into_iter().filter(|v| !on_path.contains(v)).all(|v| {
            self.degree(v) == 1 && self.neighbors(v).all(|w| on_path.contains(&w))
        })
    }
}

/// Branched-chain resource state: a main path with degree-1 leaves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaterpillarSpec {
    pub main_path: Vec<VertexId>,
    pub leaves: BTreeMap<VertexId, Vec<VertexId>>,
}

impl CaterpillarSpec {
    pub fn qubit_count(&self) -> usize {
        self.main_path.len() + self.leaves.values().map(Vec::len).sum::<usize>()
    }

    /// Structural check against `g` plus the emitter size limit.
    pub fn fits(&self, g: &GraphState, max_qubits: usize) -> bool {
        if self.qubit_count() > max_qubits {
            return false;
        }
        let path_ok = self.main_path.windows(2).all(|w| g.has_edge(w[0], w[1]));
        let leaves_ok = self.leaves.iter().all(|(&anchor, ls)| {
            self.main_path.contains(&anchor)
                && ls.iter().all(|&l| g.degree(l) == 1 && g.has_edge(l, anchor))
        });
        path_ok && leaves_ok
    }
}
