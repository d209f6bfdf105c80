//! Connected-graph enumeration and stabilizer-measurement checks of the
//! graph rewrite rules.

use memtree_core::graphstate::{FusionOutcome, GraphState, VertexStatus};
use memtree_core::seed::rng_for;
use memtree_core::stabilizer::{groups_equal_up_to_sign, Basis, Pauli, Tableau};

/// Connected graphs on `n` vertices, one per isomorphism class, as edge lists.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let index = |u: usize, v: usize| pairs.iter().position(|&e| e == (u.min(v), u.max(v))).unwrap();
    // Each permutation as a map on pair indices.
    let maps: Vec<Vec<usize>> =
        permutations(n).iter().map(|p| pairs.iter().map(|&(u, v)| index(p[u], p[v])).collect()).collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        let edges: Vec<(usize, usize)> =
            pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        if !connected(n, &edges) {
            continue;
        }
        let canon = maps
            .iter()
            .map(|m| (0..pairs.len()).filter(|i| mask >> i & 1 == 1).fold(0u32, |acc, i| acc | 1 << m[i]))
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(edges);
        }
    }
    out
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut reach = vec![false; n];
    reach[0] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v) in edges {
            if reach[u] != reach[v] {
                reach[u] = true;
                reach[v] = true;
                changed = true;
            }
        }
    }
    reach.into_iter().all(|r| r)
}

pub fn survivors(g: &GraphState) -> Vec<usize> {
    (0..g.len()).filter(|&v| g.status(v) == Some(VertexStatus::Active)).collect()
}

/// Measures each observable in turn with a random outcome.
pub fn measure_all(g: &GraphState, obs: &[Pauli], seed: u64) -> Tableau {
    let mut t = Tableau::from_graph(g).unwrap();
    let mut rng = rng_for(seed, "oracle", &[]);
    for &o in obs {
        t.measure_observable(o, None, &mut rng).unwrap();
    }
    t
}

pub fn agrees(measured: &Tableau, rewritten: &GraphState) -> bool {
    let t = Tableau::from_graph(rewritten).unwrap();
    groups_equal_up_to_sign(measured, &t, &survivors(rewritten)).unwrap()
}

#[derive(Default)]
pub struct Tally {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl Tally {
    pub fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.mismatches.push(what());
        }
    }
}

pub fn check_graph(edges: &[(usize, usize)], n: usize, tally: &mut Tally) {
    let g = GraphState::from_edges(n, edges).unwrap();
    let z = |q| Pauli::single(Basis::Z, q);
    let x = |q| Pauli::single(Basis::X, q);
    for v in 0..n {
        let r = g.measure_z(v).unwrap();
        tally.record(agrees(&measure_all(&g, &[z(v)], v as u64), &r), || format!("Z {v} on {edges:?}"));
    }
    for a in 0..n {
        for b in 0..n {
            if let Ok(r) = g.measure_x_pair(a, b) {
                let t = measure_all(&g, &[x(a), x(b)], (a * n + b) as u64);
                tally.record(agrees(&t, &r), || format!("X pair ({a},{b}) on {edges:?}"));
            }
            let mut lossy = g.clone();
            lossy.mark_lost(a).unwrap();
            if let Ok(r) = lossy.indirect_z(a, b) {
                let mut obs = vec![x(b)];
                obs.extend(g.neighbors(b).filter(|&w| w != a).map(z));
                let t = measure_all(&g, &obs, (a * n + b) as u64);
                tally.record(agrees(&t, &r), || format!("indirect Z ({a} via {b}) on {edges:?}"));
            }
            for (outcome, obs) in [
                (FusionOutcome::Success, [x(a).times(z(b)), z(a).times(x(b))]),
                (FusionOutcome::Failure, [z(a), z(b)]),
            ] {
                if let Ok(r) = g.fuse_type2(a, b, outcome) {
                    let t = measure_all(&g, &obs, (a * n + b) as u64);
                    tally.record(agrees(&t, &r), || format!("fusion {outcome:?} ({a},{b}) on {edges:?}"));
                }
            }
        }
    }
}
