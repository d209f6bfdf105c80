//! Exhaustive references for the partitioner: minimum degree-bounded cuts,
//! balanced splits and structural checks on generation trees.

use std::collections::BTreeSet;

use memtree_core::partitioner::{CutSolution, GenNode, GenerationTree};
use memtree_core::seed::SimRng;
use rand::{Rng, SeedableRng};

pub type Edge = (usize, usize);

/// Fewest edges to drop so that no vertex keeps more than two.
pub fn brute_min_cuts(n: usize, edges: &[Edge]) -> usize {
    let m = edges.len();
    let mut best = m;
    for mask in 0u32..1 << m {
        let mut deg = vec![0; n];
        for (i, &(u, v)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                deg[u] += 1;
                deg[v] += 1;
            }
        }
        if deg.iter().all(|&d| d <= 2) {
            best = best.min(m - mask.count_ones() as usize);
        }
    }
    best
}

pub fn path(n: usize) -> Vec<Edge> {
    (1..n).map(|i| (i - 1, i)).collect()
}

pub fn cycle(n: usize) -> Vec<Edge> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

pub fn star(leaves: usize) -> Vec<Edge> {
    (1..=leaves).map(|i| (0, i)).collect()
}

pub fn grid(r: usize, c: usize) -> Vec<Edge> {
    let mut e = Vec::new();
    for i in 0..r {
        for j in 0..c {
            let v = i * c + j;
            if j + 1 < c {
                e.push((v, v + 1));
            }
            if i + 1 < r {
                e.push((v, v + c));
            }
        }
    }
    e
}

pub fn complete(n: usize) -> Vec<Edge> {
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
}

/// Random connected graph: a random spanning tree plus extra edges.
pub fn random_connected(rng: &mut SimRng, n: usize, max_edges: usize) -> Vec<Edge> {
    let mut set = BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        set.insert((u, v));
    }
    let extra = rng.gen_range(0..=max_edges.saturating_sub(n - 1));
    for _ in 0..extra * 3 {
        if set.len() >= max_edges {
            break;
        }
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            set.insert((u.min(v), u.max(v)));
        }
    }
    set.into_iter().collect()
}

pub fn corpus() -> Vec<(String, usize, Vec<Edge>)> {
    let mut c = Vec::new();
    for n in 2..=13 {
        c.push((format!("P{n}"), n, path(n)));
    }
    for n in 3..=12 {
        c.push((format!("C{n}"), n, cycle(n)));
    }
    for l in 3..=12 {
        c.push((format!("K1,{l}"), l + 1, star(l)));
    }
    c.push(("grid3x3".into(), 9, grid(3, 3)));
    c.push(("grid2x4".into(), 8, grid(2, 4)));
    c.push(("K4".into(), 4, complete(4)));
    c.push(("K5".into(), 5, complete(5)));
    let mut rng = SimRng::seed_from_u64(2024);
    for i in 0..60 {
        let n = rng.gen_range(4..=11);
        c.push((format!("random{i}"), n, random_connected(&mut rng, n, 12)));
    }
    c
}

pub fn check_cut_invariants(name: &str, n: usize, edges: &[Edge], cut: &CutSolution) {
    let input: BTreeSet<Edge> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let kept: BTreeSet<Edge> = cut.kept_edges.iter().copied().collect();
    let cuts: BTreeSet<Edge> = cut.cut_edges.iter().copied().collect();
    assert!(kept.is_disjoint(&cuts), "{name}: kept and cut overlap");
    assert_eq!(&kept | &cuts, input, "{name}: reassembly");
    assert_eq!(cut.k(), cuts.len());

    let mut deg = vec![0; n];
    for &(u, v) in &kept {
        deg[u] += 1;
        deg[v] += 1;
    }
    assert!(deg.iter().all(|&d| d <= 2), "{name}: degree bound");

    let mut seen = vec![false; n];
    let mut path_edges = BTreeSet::new();
    for s in &cut.subgraphs {
        for &v in s {
            assert!(!seen[v], "{name}: vertex {v} in two subgraphs");
            seen[v] = true;
        }
        for w in s.windows(2) {
            path_edges.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    assert!(seen.iter().all(|&s| s), "{name}: vertex missing from subgraphs");
    assert_eq!(path_edges, kept, "{name}: subgraphs are exactly the kept paths");
}

/// Allowed largest child for `s` subgraphs if the tree is to stay at
/// height ⌈log2 s⌉.
pub fn max_child(s: usize) -> usize {
    let h = (s as f64).log2().ceil() as u32;
    1 << (h - 1)
}

pub fn brute_split(set: &[usize], owner: &[usize], cut_edges: &[Edge]) -> usize {
    let s = set.len();
    let mut best = usize::MAX;
    for mask in 0u32..1 << s {
        let right = mask.count_ones() as usize;
        if right > max_child(s) || s - right > max_child(s) {
            continue;
        }
        let side = |g: usize| set.iter().position(|&x| x == g).map(|i| mask >> i & 1);
        let crossing = cut_edges
            .iter()
            .filter(|&&(u, v)| matches!((side(owner[u]), side(owner[v])), (Some(a), Some(b)) if a != b))
            .count();
        best = best.min(crossing);
    }
    best
}

pub fn random_cut(rng: &mut SimRng, leaves: usize) -> CutSolution {
    let mut subgraphs = Vec::new();
    let mut kept = Vec::new();
    let mut n = 0;
    for _ in 0..leaves {
        let len = rng.gen_range(1..=3);
        let s: Vec<usize> = (n..n + len).collect();
        kept.extend(s.windows(2).map(|w| (w[0], w[1])));
        n += len;
        subgraphs.push(s);
    }
    let mut cut = BTreeSet::new();
    let target = rng.gen_range(0..=2 * leaves);
    for _ in 0..target * 4 {
        if cut.len() >= target {
            break;
        }
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let e = (u.min(v), u.max(v));
        if u != v && !kept.contains(&e) {
            cut.insert(e);
        }
    }
    CutSolution {
        n,
        kept_edges: kept,
        cut_edges: cut.into_iter().collect(),
        subgraphs,
        mip_cuts: 0,
        exact: true,
        max_caterpillar: usize::MAX,
        encoding_overhead: 0,
        capacity_violations: vec![],
    }
}

pub fn check_tree(cut: &CutSolution, tree: &GenerationTree) {
    let l = cut.subgraphs.len();
    let expected_height = if l == 1 { 0 } else { (l as f64).log2().ceil() as usize };
    assert_eq!(tree.height, expected_height, "L={l}");
    assert_eq!(tree.total_fusions(), cut.k());
    let k = cut.k();
    let cost = tree.critical_path_cost();
    assert!(cost <= k && cost >= k.div_ceil(l), "cost {cost} for K={k}, L={l}");

    let owner = cut.subgraph_of();
    let mut placed = BTreeSet::new();
    fn visit(node: &GenNode, owner: &[usize], cut: &CutSolution, placed: &mut BTreeSet<Edge>) {
        for &e in &node.fusions {
            assert!(placed.insert(e), "cut edge {e:?} placed twice");
        }
        if node.is_leaf() {
            assert_eq!(node.subgraphs.len(), 1);
            let g = node.subgraphs[0];
            let internal: Vec<Edge> =
                cut.cut_edges.iter().copied().filter(|&(u, v)| owner[u] == g && owner[v] == g).collect();
            assert_eq!(node.fusions, internal);
            return;
        }
        let [a, b] = [&node.children[0], &node.children[1]];
        assert!(a.subgraphs.len() <= max_child(node.subgraphs.len()));
        assert!(b.subgraphs.len() <= max_child(node.subgraphs.len()));
        let separated: Vec<Edge> = cut
            .cut_edges
            .iter()
            .copied()
            .filter(|&(u, v)| {
                (a.subgraphs.contains(&owner[u]) && b.subgraphs.contains(&owner[v]))
                    || (b.subgraphs.contains(&owner[u]) && a.subgraphs.contains(&owner[v]))
            })
            .collect();
        assert_eq!(node.fusions, separated);
        if node.subgraphs.len() <= 8 {
            assert_eq!(node.fusions.len(), brute_split(&node.subgraphs, owner, &cut.cut_edges));
        }
        visit(a, owner, cut, placed);
        visit(b, owner, cut, placed);
    }
    visit(&tree.root, &owner, cut, &mut placed);
    assert_eq!(placed.len(), k);
}

