//! Timestep Monte Carlo of the layered generation pipeline.
//!
//! Every generation-tree node becomes a stage. Leaves are `Emit` stages that
//! release one caterpillar per timestep; a leaf whose subgraph closes a cycle
//! gets a unary `Fuse` stage above it; internal nodes are binary `Fuse`
//! stages. Each stage owns one output slot, so a stage only works once its
//! previous product has been taken by the parent. Within a timestep:
//!
//! 1. `Fuse` stages, parents first, resolve or start logical fusions. A
//!    failed merge clears the subtree of one input; the other input waits
//!    with its delay raised.
//! 2. `Emit` stages with a free slot emit.
//! 3. New products become ready, waiting products age and are dropped past
//!    `max_delay_layers`, and a ready root product is counted as a shot.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fusion::{prepare_tree_logical, simulate_logical_fusion, LogicalOutcome, NoiseParams, SchemeConfig};
use crate::graphstate::{GraphState, VertexId};
use crate::partitioner::{CutSolution, GenNode, GenerationTree};
use crate::seed::{self, SimRng};

pub const DEFAULT_CYCLES: u64 = 20_000;
pub const DEFAULT_TIME_CAP_NS: f64 = 2.0e5;
pub const COMPARISON_TIME_CAP_NS: f64 = 6.0e5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("invalid hardware configuration: {0}")]
    InvalidHardware(&'static str),
    #[error("subgraph {subgraph} needs {qubits} caterpillar qubits, capacity is {max}")]
    CapacityExceeded { subgraph: usize, qubits: usize, max: usize },
    #[error("generation tree does not match the cut solution")]
    Inconsistent,
    #[error("fidelity {0} must lie strictly between 0 and 1")]
    InvalidFidelity(f64),
    #[error("at least one cycle is required")]
    ZeroCycles,
    #[error(transparent)]
    Scheme(#[from] crate::fusion::FusionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HardwareConfig {
    pub t_init: f64,
    pub t_emit_per_qubit: f64,
    pub max_caterpillar: usize,
    pub timestep: f64,
    pub max_delay_layers: u32,
    pub feedforward_latency: f64,
    pub t2: f64,
    pub sigma_fus: f64,
    pub sigma_osrp: f64,
    /// Rotations charged per shot; `None` counts leaf-bearing main-path qubits.
    pub osrp_count: Option<u32>,
}

impl Default for HardwareConfig {
    fn default() -> Self {
        Self {
            t_init: 12.0,
            t_emit_per_qubit: 0.6,
            max_caterpillar: 30,
            timestep: 30.0,
            max_delay_layers: 32,
            feedforward_latency: 5.0,
            t2: 2340.0,
            sigma_fus: sigma_from_hom(0.995),
            sigma_osrp: 0.99,
            osrp_count: None,
        }
    }
}

impl HardwareConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let times = [self.t_init, self.t_emit_per_qubit, self.timestep, self.feedforward_latency, self.t2];
        if times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(PipelineError::InvalidHardware("all times must be positive"));
        }
        if self.max_caterpillar == 0 {
            return Err(PipelineError::InvalidHardware("max_caterpillar must be positive"));
        }
        if self.timestep < self.t_init + self.t_emit_per_qubit * self.max_caterpillar as f64 - 1e-9 {
            return Err(PipelineError::InvalidHardware("timestep shorter than one full caterpillar emission"));
        }
        if self.feedforward_latency >= self.timestep {
            return Err(PipelineError::InvalidHardware("feed-forward latency must fit inside a timestep"));
        }
        if ![self.sigma_fus, self.sigma_osrp].iter().all(|s| (0.0..=1.0).contains(s)) {
            return Err(PipelineError::InvalidHardware("gate fidelities must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Per-fusion fidelity from the Hong-Ou-Mandel visibility.
pub fn sigma_from_hom(v_hom: f64) -> f64 {
    (1.0 + v_hom) / 2.0
}

pub fn fidelity_decoherence(n_e: f64, t_gen: f64, t2: f64) -> f64 {
    libm::exp(-n_e * t_gen / t2)
}

pub fn t2_from_state_fidelity(n_q: f64, t_gen: f64, f_state: f64) -> Result<f64, PipelineError> {
    if !(f_state > 0.0 && f_state < 1.0) {
        return Err(PipelineError::InvalidFidelity(f_state));
    }
    Ok(-n_q * t_gen / libm::log(f_state))
}

pub fn fidelity_fusion(sigma: f64, n: u64) -> f64 {
    libm::pow(sigma, n as f64)
}

/// Chains of `max_caterpillar` qubits needed to prepare `b_prep` branch
/// segments for one fusion endpoint.
pub fn branch_sources_per_endpoint(b_prep: u32, max_caterpillar: usize) -> usize {
    (b_prep as usize * crate::fusion::PHOTONS_PER_SEGMENT as usize).div_ceil(max_caterpillar)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaterpillarPlan {
    pub subgraph: usize,
    pub main_path: Vec<VertexId>,
    /// Leaves on each main-path qubit, parallel to `main_path`.
    pub leaves: Vec<usize>,
    pub qubits: usize,
    pub fusion_endpoints: usize,
    /// First timestep this caterpillar is emitted, so that inputs of every
    /// merge arrive together.
    pub emission_offset: u64,
}

impl CaterpillarPlan {
    /// Main path on ids `0..len`, leaves numbered after it.
    pub fn to_graph_state(&self) -> GraphState {
        let len = self.main_path.len();
        let mut g = GraphState::new(len);
        for i in 1..len {
            g.add_edge(i - 1, i).expect("fresh path");
        }
        for (i, &l) in self.leaves.iter().enumerate() {
            for _ in 0..l {
                let leaf = g.add_vertex();
                g.add_edge(i, leaf).expect("fresh leaf");
            }
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmissionPlan {
    pub caterpillars: Vec<CaterpillarPlan>,
    pub branch_sources_per_endpoint: usize,
    pub branch_sources: usize,
    pub photon_sources: usize,
    /// Fuse stages on the longest leaf-to-root chain.
    pub depth: u64,
}

impl EmissionPlan {
    /// Caterpillar indices by first emission timestep.
    pub fn schedule(&self) -> Vec<Vec<usize>> {
        let mut s = vec![Vec::new(); self.depth as usize + 1];
        for (i, c) in self.caterpillars.iter().enumerate() {
            s[c.emission_offset as usize].push(i);
        }
        s
    }
}

fn check_tree(tree: &GenerationTree, cut: &CutSolution) -> Result<(), PipelineError> {
    let mut leaves: Vec<usize> = tree.nodes().iter().filter(|n| n.is_leaf()).flat_map(|n| n.subgraphs.clone()).collect();
    leaves.sort_unstable();
    let expected: Vec<usize> = (0..cut.subgraphs.len()).collect();
    if leaves != expected || tree.total_fusions() != cut.k() {
        return Err(PipelineError::Inconsistent);
    }
    Ok(())
}

/// Number of `Fuse` stages above each leaf, keyed by subgraph index.
fn leaf_fuse_depths(tree: &GenerationTree, n_sub: usize) -> Vec<u64> {
    fn go(node: &GenNode, above: u64, out: &mut [u64]) {
        if node.is_leaf() {
            out[node.subgraphs[0]] = above + u64::from(!node.fusions.is_empty());
        } else {
            for c in &node.children {
                go(c, above + 1, out);
            }
        }
    }
    let mut out = vec![0; n_sub];
    go(&tree.root, 0, &mut out);
    out
}

pub fn plan_emissions(
    tree: &GenerationTree,
    cut: &CutSolution,
    scheme: &SchemeConfig,
    hw: &HardwareConfig,
) -> Result<EmissionPlan, PipelineError> {
    scheme.validate()?;
    hw.validate()?;
    check_tree(tree, cut)?;
    let overhead = scheme.encoding_overhead();
    let cut_deg = cut.cut_degree();
    let depths = leaf_fuse_depths(tree, cut.subgraphs.len());
    let depth = depths.iter().copied().max().unwrap_or(0);

    let per_endpoint = match *scheme {
        SchemeConfig::Tree { b_prep, .. } => branch_sources_per_endpoint(b_prep, hw.max_caterpillar),
        _ => 0,
    };
    let mut caterpillars = Vec::with_capacity(cut.subgraphs.len());
    let mut endpoints_total = 0;
    for (i, path) in cut.subgraphs.iter().enumerate() {
        let leaves: Vec<usize> = path.iter().map(|&v| overhead * cut_deg[v]).collect();
        let qubits = path.len() + leaves.iter().sum::<usize>();
        if qubits > hw.max_caterpillar {
            return Err(PipelineError::CapacityExceeded { subgraph: i, qubits, max: hw.max_caterpillar });
        }
        let fusion_endpoints: usize = path.iter().map(|&v| cut_deg[v]).sum();
        endpoints_total += fusion_endpoints;
        caterpillars.push(CaterpillarPlan {
            subgraph: i,
            main_path: path.clone(),
            leaves,
            qubits,
            fusion_endpoints,
            emission_offset: depth - depths[i],
        });
    }
    let branch_sources = per_endpoint * endpoints_total;
    Ok(EmissionPlan {
        photon_sources: caterpillars.len() + branch_sources,
        caterpillars,
        branch_sources_per_endpoint: per_endpoint,
        branch_sources,
        depth,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Emit { t: u64, node: usize, qubits: usize, prep_rounds: u32 },
    PrepOverflow { t: u64, node: usize },
    Fusion { t: u64, node: usize, outcomes: Vec<LogicalOutcome>, duration: u32, success: bool },
    Restart { t: u64, node: usize, waiting_delay: Option<u32> },
    Discard { t: u64, node: usize, delay: u32 },
    Shot { t: u64, makespan_steps: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Product {
    birth: i64,
    fusions: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Empty,
    Pending(Product),
    Ready(Product, u32),
    Locked(Product, u32),
}

#[derive(Debug, Clone, Copy)]
struct Work {
    resolve_at: u64,
    duration: u32,
    success: bool,
    fusions: u64,
}

#[derive(Debug, Clone)]
enum Kind {
    Emit { cat: usize },
    Fuse { inputs: Vec<usize>, edges: usize },
}

#[derive(Debug, Clone)]
struct Stage {
    kind: Kind,
    node: usize,
    height: usize,
    offset: u64,
    slot: Slot,
    work: Option<Work>,
    aged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineMetrics {
    pub cycles_requested: u64,
    pub cycles_run: u64,
    pub shots_succeeded: u64,
    /// Simulated time per shot in ns; `None` when no shot completed.
    pub avg_exec_time: Option<f64>,
    pub total_time: f64,
    pub photon_sources: usize,
    pub total_fusions: u64,
    pub photons_emitted: u64,
    pub prep_photons: u64,
    pub depth: u64,
    /// Mean shot makespan in ns.
    pub t_gen: Option<f64>,
    pub mean_shot_fusions: Option<f64>,
    pub f_de: Option<f64>,
    pub f_fus: Option<f64>,
    pub f_osrp: f64,
    pub restarts: u64,
    pub discards: u64,
    pub prep_overflows: u64,
    /// The time cap stopped the run before `cycles_requested`.
    pub truncated: bool,
    pub no_shot: bool,
}

pub struct Simulator {
    plan: EmissionPlan,
    scheme: SchemeConfig,
    noise: NoiseParams,
    hw: HardwareConfig,
    stages: Vec<Stage>,
    rng: SimRng,
    t: u64,
    shots: u64,
    makespan_sum: u64,
    shot_fusions_sum: u64,
    total_fusions: u64,
    photons_emitted: u64,
    prep_photons: u64,
    restarts: u64,
    discards: u64,
    prep_overflows: u64,
    trace: Option<Vec<TraceEvent>>,
}

impl Simulator {
    pub fn new(
        tree: &GenerationTree,
        cut: &CutSolution,
        scheme: &SchemeConfig,
        noise: &NoiseParams,
        hw: &HardwareConfig,
    ) -> Result<Self, PipelineError> {
        noise.validate()?;
        let plan = plan_emissions(tree, cut, scheme, hw)?;
        let mut stages = Vec::new();
        let mut node_id = 0;
        build_stages(&tree.root, &mut node_id, &mut stages);
        for s in &mut stages {
            if let Kind::Emit { cat } = s.kind {
                s.offset = plan.caterpillars[cat].emission_offset;
            }
        }
        Ok(Self {
            plan,
            scheme: *scheme,
            noise: *noise,
            hw: *hw,
            stages,
            rng: seed::rng_for(noise.rng_seed, "pipeline", &[]),
            t: 0,
            shots: 0,
            makespan_sum: 0,
            shot_fusions_sum: 0,
            total_fusions: 0,
            photons_emitted: 0,
            prep_photons: 0,
            restarts: 0,
            discards: 0,
            prep_overflows: 0,
            trace: None,
        })
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.take().unwrap_or_default()
    }

    pub fn plan(&self) -> &EmissionPlan {
        &self.plan
    }

    pub fn timesteps_run(&self) -> u64 {
        self.t
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    fn log(&mut self, e: TraceEvent) {
        if let Some(tr) = &mut self.trace {
            tr.push(e);
        }
    }

    /// Advances the pipeline by one timestep.
    pub fn step(&mut self) {
        let t = self.t;
        for s in &mut self.stages {
            s.aged = false;
        }
        for i in 0..self.stages.len() {
            if matches!(self.stages[i].kind, Kind::Fuse { .. }) {
                self.fuse_phase(i, t);
            }
        }
        for i in 0..self.stages.len() {
            if matches!(self.stages[i].kind, Kind::Emit { .. }) {
                self.emit_phase(i, t);
            }
        }
        self.settle(t);
        self.t += 1;
    }

    fn inputs(&self, i: usize) -> Vec<usize> {
        match &self.stages[i].kind {
            Kind::Fuse { inputs, .. } => inputs.clone(),
            Kind::Emit { .. } => Vec::new(),
        }
    }

    fn fuse_phase(&mut self, i: usize, t: u64) {
        if let Some(w) = self.stages[i].work {
            if w.resolve_at == t {
                self.resolve(i, w, t);
            }
            return;
        }
        if self.stages[i].slot != Slot::Empty {
            return;
        }
        let inputs = self.inputs(i);
        if !inputs.iter().all(|&c| matches!(self.stages[c].slot, Slot::Ready(..))) {
            return;
        }
        for &c in &inputs {
            if let Slot::Ready(p, d) = self.stages[c].slot {
                self.stages[c].slot = Slot::Locked(p, d);
            }
        }
        let Kind::Fuse { edges, .. } = self.stages[i].kind else { unreachable!() };
        let mut outcomes = Vec::with_capacity(edges);
        let (mut duration, mut fusions) = (1u32, 0u64);
        for _ in 0..edges {
            let r = simulate_logical_fusion(&self.scheme, &self.noise, &mut self.rng);
            duration = duration.max(r.timesteps);
            fusions += u64::from(r.physical_fusions);
            outcomes.push(r.outcome);
        }
        let success = outcomes.iter().all(|&o| o == LogicalOutcome::Success);
        self.total_fusions += fusions;
        let node = self.stages[i].node;
        self.log(TraceEvent::Fusion { t, node, outcomes, duration, success });
        let w = Work { resolve_at: t + u64::from(duration) - 1, duration, success, fusions };
        if w.resolve_at == t {
            self.resolve(i, w, t);
        } else {
            self.stages[i].work = Some(w);
        }
    }

    fn resolve(&mut self, i: usize, w: Work, t: u64) {
        self.stages[i].work = None;
        let inputs = self.inputs(i);
        if w.success {
            let mut birth = i64::MAX;
            let mut fusions = w.fusions;
            for &c in &inputs {
                if let Slot::Locked(p, _) = self.stages[c].slot {
                    birth = birth.min(p.birth);
                    fusions += p.fusions;
                }
                self.stages[c].slot = Slot::Empty;
            }
            self.stages[i].slot = Slot::Pending(Product { birth, fusions });
            return;
        }
        // The input with the shorter regeneration restarts; ties go right.
        let failed = *inputs
            .iter()
            .rev()
            .min_by_key(|&&c| self.stages[c].height)
            .expect("fuse stage has inputs");
        let mut waiting_delay = None;
        for &c in &inputs {
            if c == failed {
                continue;
            }
            if let Slot::Locked(p, d) = self.stages[c].slot {
                let d = d + w.duration;
                waiting_delay = Some(d);
                if d > self.hw.max_delay_layers {
                    self.stages[c].slot = Slot::Empty;
                    self.discards += 1;
                    let node = self.stages[c].node;
                    self.log(TraceEvent::Discard { t, node, delay: d });
                } else {
                    self.stages[c].slot = Slot::Ready(p, d);
                    self.stages[c].aged = true;
                }
            }
        }
        self.clear_subtree(failed);
        self.restarts += 1;
        let node = self.stages[failed].node;
        self.log(TraceEvent::Restart { t, node, waiting_delay });
    }

    fn clear_subtree(&mut self, i: usize) {
        let mut stack = vec![i];
        while let Some(s) = stack.pop() {
            self.stages[s].slot = Slot::Empty;
            self.stages[s].work = None;
            stack.extend(self.inputs(s));
        }
    }

    fn emit_phase(&mut self, i: usize, t: u64) {
        let st = &self.stages[i];
        if st.slot != Slot::Empty || t < st.offset {
            return;
        }
        let (Kind::Emit { cat }, node) = (&st.kind, st.node) else { unreachable!() };
        let cat = &self.plan.caterpillars[*cat];
        let (qubits, endpoints) = (cat.qubits, cat.fusion_endpoints);
        let mut rounds = 1;
        if let SchemeConfig::Tree { b, b_prep } = self.scheme {
            // Branch sources prepare alongside emission; extra rounds only
            // make the product older.
            for _ in 0..endpoints {
                let p = prepare_tree_logical(b, b_prep, &self.noise, &mut self.rng);
                self.prep_photons += u64::from(p.photons);
                self.total_fusions += u64::from(p.physical_fusions);
                if p.overflow {
                    self.prep_overflows += 1;
                    self.log(TraceEvent::PrepOverflow { t, node });
                    return;
                }
                rounds = rounds.max(p.timesteps);
            }
        }
        self.photons_emitted += qubits as u64;
        let birth = t as i64 - i64::from(rounds - 1);
        self.stages[i].slot = Slot::Pending(Product { birth, fusions: 0 });
        self.log(TraceEvent::Emit { t, node, qubits, prep_rounds: rounds });
    }

    fn settle(&mut self, t: u64) {
        let max_delay = self.hw.max_delay_layers;
        for i in 0..self.stages.len() {
            let node = self.stages[i].node;
            match self.stages[i].slot {
                Slot::Pending(p) => self.stages[i].slot = Slot::Ready(p, 0),
                Slot::Ready(p, d) if !self.stages[i].aged => {
                    if d + 1 > max_delay {
                        self.stages[i].slot = Slot::Empty;
                        self.discards += 1;
                        self.log(TraceEvent::Discard { t, node, delay: d + 1 });
                    } else {
                        self.stages[i].slot = Slot::Ready(p, d + 1);
                    }
                }
                _ => {}
            }
        }
        if let Slot::Ready(p, _) = self.stages[0].slot {
            self.stages[0].slot = Slot::Empty;
            let makespan = (t as i64 - p.birth + 1) as u64;
            self.shots += 1;
            self.makespan_sum += makespan;
            self.shot_fusions_sum += p.fusions;
            self.log(TraceEvent::Shot { t, makespan_steps: makespan });
        }
    }

    pub fn metrics(&self, cycles_requested: u64) -> PipelineMetrics {
        let ts = self.hw.timestep;
        let total_time = self.t as f64 * ts;
        let shots = self.shots;
        let per_shot = |x: f64| (shots > 0).then(|| x / shots as f64);
        let t_gen = per_shot(self.makespan_sum as f64 * ts);
        let mean_fus = per_shot(self.shot_fusions_sum as f64);
        let osrp = self.hw.osrp_count.unwrap_or_else(|| self.leaf_bearing_qubits());
        PipelineMetrics {
            cycles_requested,
            cycles_run: self.t,
            shots_succeeded: shots,
            avg_exec_time: per_shot(total_time),
            total_time,
            photon_sources: self.plan.photon_sources,
            total_fusions: self.total_fusions,
            photons_emitted: self.photons_emitted,
            prep_photons: self.prep_photons,
            depth: self.plan.depth,
            t_gen,
            mean_shot_fusions: mean_fus,
            f_de: t_gen.map(|tg| fidelity_decoherence(self.plan.photon_sources as f64, tg, self.hw.t2)),
            f_fus: mean_fus.map(|n| libm::pow(self.hw.sigma_fus, n)),
            f_osrp: libm::pow(self.hw.sigma_osrp, osrp.into()),
            restarts: self.restarts,
            discards: self.discards,
            prep_overflows: self.prep_overflows,
            truncated: self.t < cycles_requested,
            no_shot: shots == 0,
        }
    }

    fn leaf_bearing_qubits(&self) -> u32 {
        self.plan.caterpillars.iter().map(|c| c.leaves.iter().filter(|&&l| l > 0).count() as u32).sum()
    }
}

/// Appends the stages of `node` parents-first; returns its output stage.
fn build_stages(node: &GenNode, node_id: &mut usize, stages: &mut Vec<Stage>) -> usize {
    let id = *node_id;
    *node_id += 1;
    let blank = |kind, height| Stage { kind, node: id, height, offset: 0, slot: Slot::Empty, work: None, aged: false };
    if node.is_leaf() {
        let emit = blank(Kind::Emit { cat: node.subgraphs[0] }, 0);
        if node.fusions.is_empty() {
            stages.push(emit);
            return stages.len() - 1;
        }
        let fuse = stages.len();
        stages.push(blank(Kind::Fuse { inputs: vec![fuse + 1], edges: node.fusions.len() }, 1));
        stages.push(emit);
        return fuse;
    }
    let me = stages.len();
    stages.push(blank(Kind::Fuse { inputs: Vec::new(), edges: node.fusions.len() }, 0));
    let mut inputs = Vec::new();
    for c in &node.children {
        inputs.push(build_stages(c, node_id, stages));
    }
    let height = 1 + inputs.iter().map(|&c| stages[c].height).max().unwrap_or(0);
    stages[me].kind = Kind::Fuse { inputs, edges: node.fusions.len() };
    stages[me].height = height;
    me
}

/// Runs `cycles` timesteps, stopping early once the simulated time reaches
/// `time_cap` ns.
pub fn run(
    tree: &GenerationTree,
    cut: &CutSolution,
    scheme: &SchemeConfig,
    noise: &NoiseParams,
    hw: &HardwareConfig,
    cycles: u64,
    time_cap: f64,
) -> Result<PipelineMetrics, PipelineError> {
    run_with_trace(tree, cut, scheme, noise, hw, cycles, time_cap, false).map(|(m, _)| m)
}

#[allow(clippy::too_many_arguments)]
pub fn run_with_trace(
    tree: &GenerationTree,
    cut: &CutSolution,
    scheme: &SchemeConfig,
    noise: &NoiseParams,
    hw: &HardwareConfig,
    cycles: u64,
    time_cap: f64,
    trace: bool,
) -> Result<(PipelineMetrics, Vec<TraceEvent>), PipelineError> {
    if cycles == 0 {
        return Err(PipelineError::ZeroCycles);
    }
    let mut sim = Simulator::new(tree, cut, scheme, noise, hw)?;
    if trace {
        sim.enable_trace();
    }
    let cap_steps = libm::floor(time_cap / hw.timestep);
    let limit = if cap_steps < cycles as f64 { cap_steps.max(0.0) as u64 } else { cycles };
    for _ in 0..limit {
        sim.step();
    }
    Ok((sim.metrics(cycles), sim.take_trace()))
}

/// A fresh generator for experiment `index` under `root_seed`, for callers
/// that fan runs out in parallel.
pub fn run_seed(root_seed: u64, index: u64) -> u64 {
    seed::derive_seed(root_seed, "pipeline-run", &[index])
}
