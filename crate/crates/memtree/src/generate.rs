//! Benchmark graph families.

use std::collections::BTreeSet;

use anyhow::{bail, Result};
use memtree_core::seed::rng_for;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graphfile::GraphFile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Path { n: usize },
    Ring { n: usize },
    Star { leaves: usize },
    Lattice { rows: usize, cols: usize },
    /// Erdős–Rényi with edge probability `p`.
    Random { n: usize, p: f64, seed: u64 },
    /// A spine of `spine` vertices, each carrying `leaves` pendant vertices.
    Caterpillar { spine: usize, leaves: usize },
}

impl Family {
    pub fn generate(&self) -> Result<GraphFile> {
        let (n, edges) = match *self {
            Family::Path { n } => {
                if n == 0 {
                    bail!("path needs n >= 1");
                }
                (n, (1..n).map(|i| (i - 1, i)).collect())
            }
            Family::Ring { n } => {
                if n < 3 {
                    bail!("ring needs n >= 3");
                }
                (n, (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n))).collect())
            }
            Family::Star { leaves } => {
                if leaves == 0 {
                    bail!("star needs at least one leaf");
                }
                (leaves + 1, (1..=leaves).map(|i| (0, i)).collect())
            }
            Family::Lattice { rows, cols } => {
                if rows * cols == 0 {
                    bail!("lattice needs rows*cols >= 1");
                }
                let mut e = Vec::new();
                for r in 0..rows {
                    for c in 0..cols {
                        let v = r * cols + c;
                        if c + 1 < cols {
                            e.push((v, v + 1));
                        }
                        if r + 1 < rows {
                            e.push((v, v + cols));
                        }
                    }
                }
                (rows * cols, e)
            }
            Family::Random { n, p, seed } => {
                if n == 0 || !(0.0..=1.0).contains(&p) {
                    bail!("random needs n >= 1 and p in [0, 1]");
                }
                let mut rng = rng_for(seed, "gen-random", &[n as u64]);
                let mut e = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        if rng.gen_bool(p) {
                            e.push((u, v));
                        }
                    }
                }
                (n, e)
            }
            Family::Caterpillar { spine, leaves } => {
                if spine == 0 {
                    bail!("caterpillar needs a spine of at least one vertex");
                }
                let mut e: Vec<(usize, usize)> = (1..spine).map(|i| (i - 1, i)).collect();
                let mut next = spine;
                for s in 0..spine {
                    for _ in 0..leaves {
                        e.push((s, next));
                        next += 1;
                    }
                }
                (next, e)
            }
        };
        let mut edges: Vec<(usize, usize)> = edges;
        edges.sort_unstable();
        debug_assert_eq!(edges.iter().collect::<BTreeSet<_>>().len(), edges.len());
        Ok(GraphFile { n, edges, generator: Some(self.clone()) })
    }
}
