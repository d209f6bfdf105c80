//! Exact 0-1 minimisation by depth-first branch-and-bound, with a seeded
//! local-search fallback once the node budget runs out.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed;

/// A minimisation problem over binary variables, explored in index order.
pub trait BinaryProgram {
    fn num_vars(&self) -> usize;

    fn objective(&self, x: &[bool]) -> i64;

    fn feasible(&self, x: &[bool]) -> bool;

    /// Lower bound on the objective of every completion of the assigned
    /// prefix `x[..k]`, or `None` if no completion is feasible. Must equal
    /// the objective on a full feasible assignment.
    fn lower_bound(&self, prefix: &[bool]) -> Option<i64>;

    /// Value tried first when branching on variable `i`.
    fn preferred(&self, _i: usize) -> bool {
        false
    }

    /// A feasible starting solution, if one is cheap to build.
    fn incumbent(&self) -> Option<Vec<bool>> {
        let zeros = vec![false; self.num_vars()];
        self.feasible(&zeros).then_some(zeros)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub node_budget: u64,
    pub restarts: u32,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { node_budget: 1 << 24, restarts: 100, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub assignment: Vec<bool>,
    pub value: i64,
    /// Search finished inside the budget, so `value` is optimal.
    pub exact: bool,
    pub nodes: u64,
}

/// Returns `None` only when the program has no feasible assignment (proven
/// by exhaustive search, or none found by the fallback).
pub fn solve_binary_min<P: BinaryProgram + ?Sized>(p: &P, cfg: &SolverConfig) -> Option<Solution> {
    let mut bb = BranchAndBound { p, budget: cfg.node_budget, nodes: 0, exhausted: false, best: None };
    if let Some(x) = p.incumbent() {
        debug_assert!(p.feasible(&x));
        bb.best = Some((p.objective(&x), x));
    }
    let mut prefix = Vec::with_capacity(p.num_vars());
    bb.dfs(&mut prefix);
    let (nodes, exhausted) = (bb.nodes, bb.exhausted);

    if !exhausted {
        return bb.best.map(|(value, assignment)| Solution { assignment, value, exact: true, nodes });
    }
    let start = bb.best.map(|(_, x)| x)?;
    let (value, assignment) = local_search(p, start, cfg);
    Some(Solution { assignment, value, exact: false, nodes })
}

struct BranchAndBound<'a, P: ?Sized> {
    p: &'a P,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    best: Option<(i64, Vec<bool>)>,
}

impl<P: BinaryProgram + ?Sized> BranchAndBound<'_, P> {
    fn dfs(&mut self, prefix: &mut Vec<bool>) {
        if self.nodes >= self.budget {
            self.exhausted = true;
            return;
        }
        self.nodes += 1;
        let Some(lb) = self.p.lower_bound(prefix) else { return };
        if matches!(self.best, Some((best, _)) if lb >= best) {
            return;
        }
        if prefix.len() == self.p.num_vars() {
            if self.p.feasible(prefix) {
                let v = self.p.objective(prefix);
                if self.best.as_ref().is_none_or(|(b, _)| v < *b) {
                    self.best = Some((v, prefix.clone()));
                }
            }
            return;
        }
        let first = self.p.preferred(prefix.len());
        for value in [first, !first] {
            prefix.push(value);
            self.dfs(prefix);
            prefix.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

/// Flip and swap hill climbing with random restarts around the best point.
fn local_search<P: BinaryProgram + ?Sized>(p: &P, start: Vec<bool>, cfg: &SolverConfig) -> (i64, Vec<bool>) {
    let n = p.num_vars();
    let mut best_value = p.objective(&start);
    let mut best = start;
    for restart in 0..cfg.restarts.max(1) {
        let mut rng = seed::rng_for(cfg.seed, "local-search", &[u64::from(restart)]);
        let mut x = best.clone();
        if restart > 0 && n > 0 {
            for _ in 0..(n / 10).max(1) {
                let i = rng.gen_range(0..n);
                x[i] = !x[i];
                if !p.feasible(&x) {
                    x[i] = !x[i];
                }
            }
        }
        let value = hill_climb(p, &mut x, &mut rng);
        if value < best_value {
            best_value = value;
            best = x;
        }
    }
    (best_value, best)
}

fn hill_climb<P: BinaryProgram + ?Sized, R: Rng>(p: &P, x: &mut [bool], rng: &mut R) -> i64 {
    let n = x.len();
    let mut cur = p.objective(x);
    loop {
        let mut improved = false;
        for i in 0..n {
            x[i] = !x[i];
            if p.feasible(x) && p.objective(x) < cur {
                cur = p.objective(x);
                improved = true;
            } else {
                x[i] = !x[i];
            }
        }
        for _ in 0..n {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if x[i] == x[j] {
                continue;
            }
            x.swap(i, j);
            if p.feasible(x) && p.objective(x) < cur {
                cur = p.objective(x);
                improved = true;
            } else {
                x.swap(i, j);
            }
        }
        if !improved {
            return cur;
        }
    }
}

/// `min c·x` subject to rows `Σ a_i x_i ≤ rhs`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearBinaryProgram {
    pub objective: Vec<i64>,
    pub constraints: Vec<(Vec<(usize, i64)>, i64)>,
}

impl LinearBinaryProgram {
    fn row_min(&self, row: &[(usize, i64)], prefix: &[bool]) -> i64 {
        row.iter()
            .map(|&(i, a)| match prefix.get(i) {
                Some(&v) => i64::from(v) * a,
                None => a.min(0),
            })
            .sum()
    }
}

impl BinaryProgram for LinearBinaryProgram {
    fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn objective(&self, x: &[bool]) -> i64 {
        self.objective.iter().zip(x).filter(|(_, &v)| v).map(|(c, _)| c).sum()
    }

    fn feasible(&self, x: &[bool]) -> bool {
        self.constraints.iter().all(|(row, rhs)| self.row_min(row, x) <= *rhs)
    }

    fn lower_bound(&self, prefix: &[bool]) -> Option<i64> {
        if !self.constraints.iter().all(|(row, rhs)| self.row_min(row, prefix) <= *rhs) {
            return None;
        }
        let fixed = self.objective(prefix);
        let free: i64 = self.objective[prefix.len()..].iter().map(|&c| c.min(0)).sum();
        Some(fixed + free)
    }

    fn preferred(&self, i: usize) -> bool {
        self.objective[i] < 0
    }
}
