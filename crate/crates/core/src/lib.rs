//! Compiler and simulator core for fusion-based graph-state generation on
//! spin-memory photonic hardware.
//!
//! - [`graphstate`]: graph states and their measurement / fusion rewrites.
//! - [`stabilizer`]: a small tableau simulator used to check those rewrites.
//! - [`fusion`]: fusion sampling, boosted fusion schemes and tree-encoded
//!   logical qubit preparation.
//! - [`partitioner`]: linear-subgraph division and generation-tree building,
//!   backed by an exact 0-1 branch-and-bound solver.
//! - [`pipeline`]: timed Monte Carlo of the layered generation pipeline and
//!   the fidelity model.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! sweeps and the command line live in the `memtree` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod fusion;
pub mod graphstate;
pub mod partitioner;
pub mod pipeline;
pub mod seed;
pub mod stabilizer;

pub use fusion::{LogicalFusionResult, LogicalOutcome, NoiseParams, SchemeConfig};
pub use graphstate::{CaterpillarSpec, FusionOutcome, GraphError, GraphState, VertexId, VertexStatus};
pub use partitioner::{CutSolution, GenNode, GenerationTree, ProgramGraph};
pub use pipeline::{HardwareConfig, PipelineMetrics};
pub use stabilizer::{Basis, Pauli, Tableau};
