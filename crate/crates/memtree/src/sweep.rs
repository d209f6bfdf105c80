//! Parameter-grid sweeps, fanned out over worker threads. Every cell's seed
//! comes from the grid seed and the cell's own values, so the output is the
//! same for any thread count.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use memtree_core::fusion::{cell_seed, sweep_cell, NoiseParams, SchemeConfig, SweepCell};
use memtree_core::partitioner::SolverConfig;
use memtree_core::pipeline::{HardwareConfig, DEFAULT_CYCLES, DEFAULT_TIME_CAP_NS};
use memtree_core::seed::derive_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifact::{compile, CompileConfig, MetricsRow, RunConfig};
use crate::config_hash;
use crate::graphfile::GraphFile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub schemes: Vec<SchemeConfig>,
    pub p_fail: Vec<f64>,
    pub p_eras: Vec<f64>,
    pub trials: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineGrid>,
}

/// End-to-end runs per cell on one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineGrid {
    /// Relative paths resolve against the grid file's directory.
    pub graph: PathBuf,
    #[serde(default = "default_cycles")]
    pub cycles: u64,
    #[serde(default = "default_time_cap")]
    pub time_cap: f64,
    #[serde(default)]
    pub hw: HardwareConfig,
}

fn default_cycles() -> u64 {
    DEFAULT_CYCLES
}

fn default_time_cap() -> f64 {
    DEFAULT_TIME_CAP_NS
}

impl Grid {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut grid: Grid =
            serde_json::from_str(&text).with_context(|| format!("malformed grid file {}", path.display()))?;
        if let Some(p) = &mut grid.pipeline {
            if p.graph.is_relative() {
                p.graph = path.parent().unwrap_or(Path::new(".")).join(&p.graph);
            }
        }
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() || self.p_fail.is_empty() || self.p_eras.is_empty() {
            bail!("grid needs at least one scheme, p_fail and p_eras value");
        }
        if self.trials == 0 {
            bail!("trials must be positive");
        }
        for s in &self.schemes {
            s.validate()?;
        }
        for &p in self.p_fail.iter().chain(&self.p_eras) {
            NoiseParams::new(p, 0.0, 0)?;
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(SchemeConfig, f64, f64)> {
        let mut out = Vec::new();
        for &s in &self.schemes {
            for &pf in &self.p_fail {
                for &pe in &self.p_eras {
                    out.push((s, pf, pe));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: String,
    pub m_or_b: u32,
    pub p_fail: f64,
    pub p_eras: f64,
    pub trials: u32,
    pub success_rate: f64,
    pub mean_timesteps: f64,
    pub mean_photons: f64,
    pub first_round_rate: f64,
    pub failure_rate: f64,
    pub erasure_rate: f64,
    pub b_prep: Option<u32>,
    pub seed: u64,
    pub config_hash: String,
}

impl SweepRow {
    fn new(c: &SweepCell, grid_seed: u64) -> Self {
        let b_prep = match c.scheme {
            SchemeConfig::Tree { b_prep, .. } => Some(b_prep),
            _ => None,
        };
        Self {
            scheme: c.scheme.name().into(),
            m_or_b: c.scheme.parameter(),
            p_fail: c.p_fail,
            p_eras: c.p_eras,
            trials: c.trials,
            success_rate: c.success_rate,
            mean_timesteps: c.mean_timesteps,
            mean_photons: c.mean_photons,
            first_round_rate: c.first_round_rate,
            failure_rate: c.failure_rate,
            erasure_rate: c.erasure_rate,
            b_prep,
            seed: cell_seed(grid_seed, &c.scheme, c.p_fail, c.p_eras),
            config_hash: config_hash(&(c.scheme, c.p_fail, c.p_eras, c.trials, grid_seed)),
        }
    }
}

pub struct SweepOutput {
    pub rates: Vec<SweepRow>,
    pub pipeline: Option<Vec<MetricsRow>>,
}

pub fn run_sweep(grid: &Grid) -> Result<SweepOutput> {
    let cells = grid.cells();
    let rates = cells
        .par_iter()
        .map(|&(s, pf, pe)| SweepRow::new(&sweep_cell(&s, pf, pe, grid.trials, grid.seed), grid.seed))
        .collect();

    let pipeline = match &grid.pipeline {
        None => None,
        Some(p) => {
            let graph = GraphFile::read(&p.graph)?;
            let rows: Result<Vec<MetricsRow>> = cells
                .par_iter()
                .map(|&(scheme, pf, pe)| {
                    let config = CompileConfig { scheme, hw: p.hw, solver: SolverConfig::default() };
                    let art = compile(&graph, &config)?;
                    let [k, a, b] = scheme_coords(&scheme);
                    let seed = derive_seed(grid.seed, "sweep-pipeline", &[k, a, b, pf.to_bits(), pe.to_bits()]);
                    let run = RunConfig {
                        scheme,
                        noise: NoiseParams::new(pf, pe, seed)?,
                        hw: p.hw,
                        cycles: p.cycles,
                        time_cap: p.time_cap,
                        artifact_hash: art.summary.config_hash.clone(),
                    };
                    let (m, _) = crate::artifact::simulate(&art, &run, false)?;
                    Ok(MetricsRow::new(&run, &m))
                })
                .collect();
            Some(rows?)
        }
    };
    Ok(SweepOutput { rates, pipeline })
}

fn scheme_coords(s: &SchemeConfig) -> [u64; 3] {
    match *s {
        SchemeConfig::Redundant { m } => [0, m.into(), 0],
        SchemeConfig::Rus { m } => [1, m.into(), 0],
        SchemeConfig::Tree { b, b_prep } => [2, b.into(), b_prep.into()],
    }
}
