//! Compile artifacts and per-run metrics rows.

use std::path::Path;

use anyhow::{Context, Result};
use memtree_core::fusion::{NoiseParams, SchemeConfig};
use memtree_core::partitioner::{
    build_generation_tree_with, divide_linear_with, CutSolution, GenerationTree, SolverConfig,
};
use memtree_core::pipeline::{self, EmissionPlan, HardwareConfig, PipelineMetrics, TraceEvent};
use serde::{Deserialize, Serialize};

use crate::config_hash;
use crate::graphfile::GraphFile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileConfig {
    pub scheme: SchemeConfig,
    pub hw: HardwareConfig,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileSummary {
    pub k: usize,
    pub mip_cuts: usize,
    pub subgraphs: usize,
    pub height: usize,
    pub critical_path: usize,
    pub photon_sources: Option<usize>,
    /// Both the division and every tree split were solved to optimality.
    pub exact: bool,
    pub capacity_violations: Vec<usize>,
    pub config_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompileStatus {
    Ok,
    CapacityViolation,
    HeuristicFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileArtifact {
    pub config: CompileConfig,
    pub graph: GraphFile,
    pub cut: CutSolution,
    pub tree: GenerationTree,
    /// Absent when a subgraph does not fit a caterpillar.
    pub plan: Option<EmissionPlan>,
    pub summary: CompileSummary,
}

impl CompileArtifact {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing compile artifact {}", path.display()))
    }

    pub fn status(&self) -> CompileStatus {
        if !self.summary.capacity_violations.is_empty() || self.plan.is_none() {
            CompileStatus::CapacityViolation
        } else if !self.summary.exact {
            CompileStatus::HeuristicFallback
        } else {
            CompileStatus::Ok
        }
    }
}

pub fn compile(graph: &GraphFile, config: &CompileConfig) -> Result<CompileArtifact> {
    config.scheme.validate()?;
    config.hw.validate()?;
    let g = graph.program_graph()?;
    let cut = divide_linear_with(&g, config.hw.max_caterpillar, config.scheme.encoding_overhead(), &config.solver);
    let tree = build_generation_tree_with(&cut, &config.solver);
    let plan = pipeline::plan_emissions(&tree, &cut, &config.scheme, &config.hw).ok();
    let summary = CompileSummary {
        k: cut.k(),
        mip_cuts: cut.mip_cuts,
        subgraphs: cut.subgraphs.len(),
        height: tree.height,
        critical_path: tree.critical_path_cost(),
        photon_sources: plan.as_ref().map(|p| p.photon_sources),
        exact: cut.exact && tree.exact(),
        capacity_violations: cut.capacity_violations.clone(),
        config_hash: config_hash(&(config, graph)),
    };
    Ok(CompileArtifact { config: config.clone(), graph: graph.clone(), cut, tree, plan, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scheme: SchemeConfig,
    pub noise: NoiseParams,
    pub hw: HardwareConfig,
    pub cycles: u64,
    pub time_cap: f64,
    pub artifact_hash: String,
}

/// One metrics CSV row: the run's configuration followed by its metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scheme: String,
    pub m_or_b: u32,
    pub b_prep: Option<u32>,
    pub p_fail: f64,
    pub p_eras: f64,
    pub seed: u64,
    pub cycles_requested: u64,
    pub time_cap: f64,
    pub cycles_run: u64,
    pub shots_succeeded: u64,
    pub avg_exec_time: Option<f64>,
    pub total_time: f64,
    pub photon_sources: usize,
    pub total_fusions: u64,
    pub photons_emitted: u64,
    pub prep_photons: u64,
    pub depth: u64,
    pub t_gen: Option<f64>,
    pub mean_shot_fusions: Option<f64>,
    pub f_de: Option<f64>,
    pub f_fus: Option<f64>,
    pub f_osrp: f64,
    pub restarts: u64,
    pub discards: u64,
    pub prep_overflows: u64,
    pub truncated: bool,
    pub no_shot: bool,
    pub config_hash: String,
}

impl MetricsRow {
    pub fn new(run: &RunConfig, m: &PipelineMetrics) -> Self {
        let b_prep = match run.scheme {
            SchemeConfig::Tree { b_prep, .. } => Some(b_prep),
            _ => None,
        };
        Self {
            scheme: run.scheme.name().into(),
            m_or_b: run.scheme.parameter(),
            b_prep,
            p_fail: run.noise.p_fail,
            p_eras: run.noise.p_eras,
            seed: run.noise.rng_seed,
            cycles_requested: m.cycles_requested,
            time_cap: run.time_cap,
            cycles_run: m.cycles_run,
            shots_succeeded: m.shots_succeeded,
            avg_exec_time: m.avg_exec_time,
            total_time: m.total_time,
            photon_sources: m.photon_sources,
            total_fusions: m.total_fusions,
            photons_emitted: m.photons_emitted,
            prep_photons: m.prep_photons,
            depth: m.depth,
            t_gen: m.t_gen,
            mean_shot_fusions: m.mean_shot_fusions,
            f_de: m.f_de,
            f_fus: m.f_fus,
            f_osrp: m.f_osrp,
            restarts: m.restarts,
            discards: m.discards,
            prep_overflows: m.prep_overflows,
            truncated: m.truncated,
            no_shot: m.no_shot,
            config_hash: config_hash(run),
        }
    }
}

pub fn simulate(art: &CompileArtifact, run: &RunConfig, trace: bool) -> Result<(PipelineMetrics, Vec<TraceEvent>)> {
    Ok(pipeline::run_with_trace(&art.tree, &art.cut, &run.scheme, &run.noise, &run.hw, run.cycles, run.time_cap, trace)?)
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Line-delimited JSON, one event per line.
pub fn trace_bytes(events: &[TraceEvent]) -> Vec<u8> {
    let mut out = Vec::new();
    for e in events {
        serde_json::to_writer(&mut out, e).expect("trace event serializes");
        out.push(b'\n');
    }
    out
}
