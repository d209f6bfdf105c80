//! Exit criteria. Each test prints one `PASS`/`FAIL` line before asserting.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use memtree::artifact::{compile, CompileConfig};
use memtree::generate::Family;
use memtree_core::fusion::{analytic_success, sweep_cell, NoiseParams, SchemeConfig, SweepCell};
use memtree_core::partitioner::{build_generation_tree, divide_linear, ProgramGraph, SolverConfig};
use memtree_core::pipeline::{self, t2_from_state_fidelity, HardwareConfig, COMPARISON_TIME_CAP_NS};
use memtree_core::seed::SimRng;
use rand::SeedableRng;
use tempfile::TempDir;

const TRIALS: u32 = 10_000;
const SIGMAS: f64 = 3.0;
const ROOT_SEED: u64 = 20_000;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    // Straight to the handle so the line shows without `--nocapture`.
    let line = format!("\n{} criterion {id:>2} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stderr().lock().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn binomial_sigma(p: f64, n: u32) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn ring(n: usize) -> memtree::graphfile::GraphFile {
    Family::Ring { n }.generate().unwrap()
}

fn branch_count(s: &SchemeConfig) -> u32 {
    match *s {
        SchemeConfig::Redundant { m } | SchemeConfig::Rus { m } => m,
        SchemeConfig::Tree { b, .. } => b,
    }
}

#[test]
fn c01_analytic_monte_carlo_agreement() {
    let schemes = [SchemeConfig::Redundant { m: 5 }, SchemeConfig::Rus { m: 6 }, SchemeConfig::Tree { b: 4, b_prep: 6 }];
    let mut worst = (f64::NEG_INFINITY, String::new());
    let mut bad = Vec::new();
    for s in &schemes {
        for pf in [0.0, 0.1, 0.25, 0.5] {
            for pe in [0.0, 0.02, 0.05, 0.1] {
                let cell = sweep_cell(s, pf, pe, TRIALS, ROOT_SEED);
                let analytic = analytic_success(s, &NoiseParams::new(pf, pe, 0).unwrap());
                // The closed form has no backup round for the tree scheme.
                let empirical = match s {
                    SchemeConfig::Tree { .. } => cell.first_round_rate,
                    _ => cell.success_rate,
                };
                let tol = SIGMAS * binomial_sigma(analytic, TRIALS) + 2.0 * branch_count(s) as f64 * pf * pe;
                let gap = (empirical - analytic).abs();
                let label = format!("{} p_fail={pf} p_eras={pe}: |{empirical:.4} - {analytic:.4}| vs {tol:.4}", s.name());
                if tol > 0.0 && gap / tol > worst.0 {
                    worst = (gap / tol, label.clone());
                }
                if gap > tol {
                    bad.push(label);
                }
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("48 cells within tolerance, tightest {} ({:.0}% of tolerance)", worst.1, 100.0 * worst.0)
    } else {
        format!("{} of 48 cells outside tolerance: {}", bad.len(), bad.join("; "))
    };
    report(1, "analytic vs Monte Carlo", bad.is_empty(), &detail);
}

fn separated(a: &SweepCell, b: &SweepCell) -> (bool, f64, f64) {
    let sa = binomial_sigma(a.success_rate, a.trials);
    let sb = binomial_sigma(b.success_rate, b.trials);
    let margin = SIGMAS * (sa * sa + sb * sb).sqrt();
    let diff = a.success_rate - b.success_rate;
    (diff > margin, diff, margin)
}

#[test]
fn c02_tree_outperforms_at_high_erasure() {
    let mut pass = true;
    let mut parts = Vec::new();
    for pe in [0.05, 0.1] {
        let tree = sweep_cell(&SchemeConfig::Tree { b: 4, b_prep: 6 }, 0.25, pe, TRIALS, ROOT_SEED);
        for other in [SchemeConfig::Rus { m: 6 }, SchemeConfig::Redundant { m: 5 }] {
            let o = sweep_cell(&other, 0.25, pe, TRIALS, ROOT_SEED);
            let (ok, diff, margin) = separated(&tree, &o);
            pass &= ok;
            parts.push(format!("p_eras={pe} tree-{}={diff:.4} (need > {margin:.4})", other.name()));
        }
    }
    report(2, "scheme ordering", pass, &parts.join(", "));
}

#[test]
fn c03_redundancy_trade_off() {
    let (pf, pe) = (0.25, 0.1);
    let cells: Vec<SweepCell> =
        [1, 2, 4, 8].iter().map(|&m| sweep_cell(&SchemeConfig::Redundant { m }, pf, pe, TRIALS, ROOT_SEED)).collect();
    let mut pass = true;
    for w in cells.windows(2) {
        let sf = SIGMAS * (binomial_sigma(w[0].failure_rate, TRIALS).powi(2) + binomial_sigma(w[1].failure_rate, TRIALS).powi(2)).sqrt();
        let se = SIGMAS * (binomial_sigma(w[0].erasure_rate, TRIALS).powi(2) + binomial_sigma(w[1].erasure_rate, TRIALS).powi(2)).sqrt();
        pass &= w[1].failure_rate <= w[0].failure_rate + sf;
        pass &= w[1].erasure_rate >= w[0].erasure_rate - se;
    }
    let fmt = |f: fn(&SweepCell) -> f64| cells.iter().map(|c| format!("{:.4}", f(c))).collect::<Vec<_>>().join(" ");
    let detail = format!(
        "m=1,2,4,8 at p_fail={pf} p_eras={pe}: failure [{}] erasure [{}]",
        fmt(|c| c.failure_rate),
        fmt(|c| c.erasure_rate)
    );
    report(3, "redundancy trade-off", pass, &detail);
}

#[test]
fn c04_rewrite_soundness() {
    use oracle::rewrites::{check_graph, connected_graphs, Tally};
    let start = Instant::now();
    let mut tally = Tally::default();
    let mut classes = 0;
    for n in 1..=6 {
        for edges in connected_graphs(n) {
            classes += 1;
            check_graph(&edges, n, &mut tally);
        }
    }
    let elapsed = start.elapsed();
    let pass = tally.mismatches.is_empty() && classes == 143 && elapsed < Duration::from_secs(60);
    let detail = format!(
        "{} checks over {classes} graphs, {} mismatches, {:.1}s",
        tally.checked,
        tally.mismatches.len(),
        elapsed.as_secs_f64()
    );
    report(4, "rewrite soundness", pass, &detail);
}

#[test]
fn c05_partitioner_optimality() {
    use oracle::partitions::{brute_min_cuts, check_cut_invariants, corpus};
    let mut bad = Vec::new();
    let mut count = 0;
    for (name, n, edges) in corpus() {
        if edges.len() > 12 {
            continue;
        }
        count += 1;
        let cut = divide_linear(&ProgramGraph::new(n, &edges).unwrap(), 30, 4);
        let truth = brute_min_cuts(n, &edges);
        if cut.mip_cuts != truth || !cut.exact {
            bad.push(format!("{name}: {} vs {truth}", cut.mip_cuts));
        }
        if catch_unwind(AssertUnwindSafe(|| check_cut_invariants(&name, n, &edges, &cut))).is_err() {
            bad.push(format!("{name}: invariants"));
        }
    }
    let detail = format!("{count} graphs, {} disagreements {:?}", bad.len(), bad);
    report(5, "partitioner optimality", bad.is_empty(), &detail);
}

#[test]
fn c06_tree_construction() {
    use oracle::partitions::{check_tree, random_cut};
    let mut rng = SimRng::seed_from_u64(ROOT_SEED);
    let mut bad = Vec::new();
    let mut checked = 0;
    for l in 1..=16 {
        for trial in 0..25 {
            let cut = random_cut(&mut rng, l);
            let tree = build_generation_tree(&cut);
            checked += 1;
            if catch_unwind(AssertUnwindSafe(|| check_tree(&cut, &tree))).is_err() {
                bad.push(format!("L={l} trial {trial}"));
            }
        }
    }
    report(6, "tree construction", bad.is_empty(), &format!("{checked} trees, failures {bad:?}"));
}

#[test]
fn c07_deterministic_throughput() {
    let graphs = [ring(10), Family::Lattice { rows: 3, cols: 3 }.generate().unwrap(), Family::Path { n: 5 }.generate().unwrap()];
    let mut pass = true;
    let mut parts = Vec::new();
    for g in &graphs {
        let art = compile(g, &CompileConfig { scheme: SchemeConfig::DEFAULT_TREE, hw: HardwareConfig::default(), solver: SolverConfig::default() }).unwrap();
        let noise = NoiseParams::noiseless(0);
        let m = pipeline::run(&art.tree, &art.cut, &art.config.scheme, &noise, &art.config.hw, 100, f64::INFINITY).unwrap();
        let shots = 100 - m.depth;
        let exact = 100.0 * 30.0 / shots as f64;
        let warmup = 30.0 * m.depth as f64 / shots as f64;
        let avg = m.avg_exec_time.unwrap_or(f64::NAN);
        let ok = m.shots_succeeded == shots && avg == exact && (avg - 30.0).abs() <= warmup + 1e-12;
        pass &= ok;
        parts.push(format!("n={} depth={} shots={} avg={avg:.4}ns", g.n, m.depth, m.shots_succeeded));
    }
    report(7, "deterministic throughput", pass, &parts.join(", "));
}

#[test]
fn c08_noise_constants() {
    let a = t2_from_state_fidelity(2.0, 8.0, 0.9922).unwrap();
    let b = t2_from_state_fidelity(4.0, 30.0, 0.95).unwrap();
    let sigma = pipeline::sigma_from_hom(0.995);
    let pass = ((a - 2040.0) / 2040.0).abs() <= 0.01 && ((b - 2340.0) / 2340.0).abs() <= 0.01 && sigma == 0.9975;
    report(8, "noise constants", pass, &format!("T2 = {a:.1} ns and {b:.1} ns, sigma_fus = {sigma}"));
}

#[test]
fn c09_end_to_end_gap() {
    let hw = HardwareConfig::default();
    let schemes = [SchemeConfig::Tree { b: 4, b_prep: 6 }, SchemeConfig::Rus { m: 6 }, SchemeConfig::Redundant { m: 5 }];
    let arts: Vec<_> = schemes
        .iter()
        .map(|&scheme| compile(&ring(10), &CompileConfig { scheme, hw, solver: SolverConfig::default() }).unwrap())
        .collect();
    let mut ordered = true;
    let mut ratio_ok = true;
    let mut worst_ratio: f64 = 0.0;
    let mut first = String::new();
    for seed in 0..10 {
        let t: Vec<f64> = arts
            .iter()
            .map(|a| {
                let noise = NoiseParams::new(0.25, 0.05, pipeline::run_seed(ROOT_SEED, seed)).unwrap();
                let m = pipeline::run(&a.tree, &a.cut, &a.config.scheme, &noise, &hw, 20_000, COMPARISON_TIME_CAP_NS).unwrap();
                assert_eq!(m.cycles_run, 20_000);
                m.avg_exec_time.unwrap_or(f64::INFINITY)
            })
            .collect();
        ordered &= t[0] < t[1] && t[1] < t[2];
        let ratio = t[0] / t[1];
        ratio_ok &= ratio <= 0.5;
        worst_ratio = worst_ratio.max(ratio);
        if seed == 0 {
            first = format!("tree {:.2} rus {:.2} redundant {:.2} ns", t[0], t[1], t[2]);
        }
    }
    let detail = format!("seed 0: {first}; ordering held on all seeds: {ordered}; worst tree/rus ratio {worst_ratio:.3} (need <= 0.5)");
    report(9, "end-to-end gap", ordered && ratio_ok, &detail);
}

#[test]
fn c10_photon_source_knee() {
    let mut got = Vec::new();
    for b_prep in 1..=12 {
        let scheme = SchemeConfig::Tree { b: b_prep.min(4), b_prep };
        let art = compile(&ring(10), &CompileConfig { scheme, hw: HardwareConfig::default(), solver: SolverConfig::default() }).unwrap();
        got.push(art.plan.expect("ring fits").branch_sources_per_endpoint);
    }
    let expected: Vec<usize> = (1..=12).map(|b| if b <= 6 { 1 } else { 2 }).collect();
    report(10, "photon-source knee", got == expected, &format!("b_prep=1..12 -> {got:?}"));
}

fn memtree_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_memtree")).args(args).output().unwrap();
    assert!(out.status.code().is_some_and(|c| c == 0 || c == 5), "{args:?}");
    out.stdout
}

fn bytes(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn c11_reproducibility() {
    let d = TempDir::new().unwrap();
    let p = |name: &str| d.path().join(name).to_str().unwrap().to_string();
    std::fs::write(
        p("grid.json"),
        r#"{"schemes": [{"kind": "redundant", "m": 5}, {"kind": "rus", "m": 6}, {"kind": "tree", "b": 4, "b_prep": 6}],
            "p_fail": [0.0, 0.25, 0.5], "p_eras": [0.0, 0.05, 0.1], "trials": 500, "seed": 42,
            "pipeline": {"graph": "g.json", "cycles": 300}}"#,
    )
    .unwrap();
    let round = |tag: &str, threads: &str| -> Vec<Vec<u8>> {
        let o = |name: &str| p(&format!("{tag}-{name}"));
        memtree_cli(&["gen", "random", "--n", "14", "--p", "0.25", "--seed", "3", "-o", &o("g.json")]);
        if tag == "a" {
            std::fs::copy(o("g.json"), p("g.json")).unwrap();
        }
        memtree_cli(&["compile", &o("g.json"), "-o", &o("art.json")]);
        memtree_cli(&[
            "simulate", &o("art.json"), "--p-fail", "0.25", "--p-eras", "0.05", "--seed", "8", "--cycles", "2000",
            "--trace", &o("trace.jsonl"), "-o", &o("m.csv"),
        ]);
        memtree_cli(&["sweep", &p("grid.json"), "--threads", threads, "-o", &o("s.csv"), "--pipeline-output", &o("sp.csv")]);
        memtree_cli(&["report", &o("m.csv"), "-o", &o("r.csv"), "--summary", &o("r.json")]);
        ["g.json", "art.json", "m.csv", "trace.jsonl", "s.csv", "sp.csv", "r.csv", "r.json"]
            .iter()
            .map(|f| bytes(Path::new(&o(f))))
            .collect()
    };
    let a = round("a", "1");
    let b = round("b", "4");
    let c = round("c", "0");
    // The summary names its inputs, so compare it with the paths masked.
    let mask = |v: &[u8], tag: &str| String::from_utf8_lossy(v).replace(&format!("{tag}-"), "");
    let same = |x: &[Vec<u8>], y: &[Vec<u8>], tx: &str, ty: &str| {
        x[..7] == y[..7] && mask(&x[7], tx) == mask(&y[7], ty)
    };
    let pass = same(&a, &b, "a", "b") && same(&a, &c, "a", "c");
    report(11, "reproducibility", pass, "gen, compile, simulate+trace, sweep (1, 4, all threads) and report outputs byte-identical");
}
