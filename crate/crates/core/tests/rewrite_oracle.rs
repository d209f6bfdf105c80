//! Graph rewrite rules against explicit stabilizer measurements, over every
//! connected graph on at most six vertices.

mod oracle;

use oracle::rewrites::{check_graph, connected_graphs, Tally};

#[test]
fn isomorphism_class_counts() {
    let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
    assert_eq!(counts, [1, 1, 2, 6, 21, 112]);
}

#[test]
fn rewrites_match_stabilizer_measurements() {
    let mut tally = Tally::default();
    for n in 1..=6 {
        for edges in connected_graphs(n) {
            check_graph(&edges, n, &mut tally);
        }
    }
    eprintln!("{} rewrite checks", tally.checked);
    let first = &tally.mismatches[..tally.mismatches.len().min(5)];
    assert!(tally.mismatches.is_empty(), "{} mismatches, first: {first:?}", tally.mismatches.len());
}

#[test]
fn fusion_across_disjoint_graphs() {
    // Fusion usually joins two separate resource states.
    let mut tally = Tally::default();
    for n1 in 1..=3 {
        for n2 in 1..=3 {
            for e1 in connected_graphs(n1) {
                for e2 in connected_graphs(n2) {
                    let mut edges = e1.clone();
                    edges.extend(e2.iter().map(|&(u, v)| (u + n1, v + n1)));
                    check_graph(&edges, n1 + n2, &mut tally);
                }
            }
        }
    }
    assert!(tally.mismatches.is_empty(), "{:?}", &tally.mismatches[..tally.mismatches.len().min(5)]);
}
