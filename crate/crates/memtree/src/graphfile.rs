use std::path::Path;

use anyhow::{Context, Result};
use memtree_core::partitioner::ProgramGraph;
use serde::{Deserialize, Serialize};

use crate::generate::Family;

/// On-disk graph: `{"n": .., "edges": [[u, v], ..]}`, plus how it was made
/// when it came from `gen`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Family>,
}

impl GraphFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing graph file {}", path.display()))
    }

    pub fn program_graph(&self) -> Result<ProgramGraph> {
        Ok(ProgramGraph::new(self.n, &self.edges)?)
    }
}
