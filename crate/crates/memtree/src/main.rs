use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use memtree_core::fusion::{NoiseParams, SchemeConfig};
use memtree_core::partitioner::SolverConfig;
use memtree_core::pipeline::{HardwareConfig, DEFAULT_CYCLES, DEFAULT_TIME_CAP_NS};
use memtree::artifact::{self, CompileArtifact, CompileConfig, CompileStatus, MetricsRow, RunConfig};
use memtree::generate::Family;
use memtree::graphfile::GraphFile;
use memtree::sweep::{run_sweep, Grid};
use memtree::{report, to_json, write_output};

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_HEURISTIC: u8 = 4;
const EXIT_NO_SHOT: u8 = 5;

#[derive(Parser)]
#[command(name = "memtree", version, about = "Compile and simulate photonic graph-state generation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a benchmark graph.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
        #[arg(short, long, global = true, default_value = "-")]
        output: PathBuf,
    },
    /// Partition a graph and plan its generation tree.
    Compile {
        graph: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        hw: HwArgs,
        /// Branch-and-bound node budget before falling back to local search.
        #[arg(long)]
        node_budget: Option<u64>,
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
    },
    /// Run the pipeline on a compile artifact and write a metrics CSV.
    Simulate {
        artifact: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        p_fail: f64,
        #[arg(long, default_value_t = 0.0)]
        p_eras: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CYCLES)]
        cycles: u64,
        /// Simulated-time budget in ns.
        #[arg(long, default_value_t = DEFAULT_TIME_CAP_NS)]
        time_cap: f64,
        /// Write a JSON-lines event trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
    },
    /// Run a grid of fusion-level (and optionally pipeline) experiments.
    Sweep {
        grid: PathBuf,
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
        /// Per-cell pipeline metrics, when the grid has a `pipeline` section.
        #[arg(long)]
        pipeline_output: Option<PathBuf>,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Merge CSVs with a common header and summarise them.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
        /// Per-scheme statistics as JSON.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenFamily {
    Path {
        #[arg(long)]
        n: usize,
    },
    Ring {
        #[arg(long)]
        n: usize,
    },
    Star {
        #[arg(long)]
        leaves: usize,
    },
    Lattice {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
    },
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Caterpillar {
        #[arg(long)]
        spine: usize,
        #[arg(long, default_value_t = 1)]
        leaves: usize,
    },
}

impl GenFamily {
    fn family(&self) -> Family {
        match *self {
            GenFamily::Path { n } => Family::Path { n },
            GenFamily::Ring { n } => Family::Ring { n },
            GenFamily::Star { leaves } => Family::Star { leaves },
            GenFamily::Lattice { rows, cols } => Family::Lattice { rows, cols },
            GenFamily::Random { n, p, seed } => Family::Random { n, p, seed },
            GenFamily::Caterpillar { spine, leaves } => Family::Caterpillar { spine, leaves },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeKind {
    Redundant,
    Rus,
    Tree,
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_enum, default_value = "tree")]
    scheme: SchemeKind,
    /// m for redundant/rus, b for tree.
    #[arg(long)]
    param: Option<u32>,
    #[arg(long)]
    b_prep: Option<u32>,
}

impl SchemeArgs {
    fn resolve(&self) -> SchemeConfig {
        match self.scheme {
            SchemeKind::Redundant => SchemeConfig::Redundant { m: self.param.unwrap_or(5) },
            SchemeKind::Rus => SchemeConfig::Rus { m: self.param.unwrap_or(6) },
            SchemeKind::Tree => SchemeConfig::Tree { b: self.param.unwrap_or(4), b_prep: self.b_prep.unwrap_or(6) },
        }
    }
}

#[derive(Args)]
struct HwArgs {
    /// Hardware parameters as JSON; missing fields take defaults.
    #[arg(long)]
    hw: Option<PathBuf>,
    #[arg(long)]
    max_caterpillar: Option<usize>,
}

impl HwArgs {
    fn resolve(&self) -> Result<HardwareConfig> {
        let mut hw = match &self.hw {
            None => HardwareConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing hardware file {}", p.display()))?
            }
        };
        if let Some(m) = self.max_caterpillar {
            hw.max_caterpillar = m;
        }
        hw.validate()?;
        Ok(hw)
    }
}

enum Failure {
    Usage(anyhow::Error),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn usage<T>(r: Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_OTHER)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.cmd {
        Cmd::Gen { family, output } => {
            let g = usage(family.family().generate())?;
            write(&output, &to_json(&g))?;
            Ok(0)
        }
        Cmd::Compile { graph, scheme, hw, node_budget, output } => {
            let g = GraphFile::read(&graph)?;
            let mut solver = SolverConfig::default();
            if let Some(b) = node_budget {
                solver.node_budget = b;
            }
            let config = CompileConfig { scheme: scheme.resolve(), hw: usage(hw.resolve())?, solver };
            usage(config.scheme.validate().map_err(Into::into))?;
            let start = Instant::now();
            let art = artifact::compile(&g, &config)?;
            let s = &art.summary;
            eprintln!(
                "K={} subgraphs={} height={} critical_path={} photon_sources={} exact={} compile_time={:.3?}",
                s.k,
                s.subgraphs,
                s.height,
                s.critical_path,
                s.photon_sources.map_or("-".into(), |p| p.to_string()),
                s.exact,
                start.elapsed()
            );
            write(&output, &to_json(&art))?;
            Ok(match art.status() {
                CompileStatus::Ok => 0,
                CompileStatus::CapacityViolation => {
                    eprintln!("warning: subgraphs {:?} exceed the caterpillar capacity", s.capacity_violations);
                    EXIT_CAPACITY
                }
                CompileStatus::HeuristicFallback => {
                    eprintln!("warning: solver budget exhausted, result is heuristic");
                    EXIT_HEURISTIC
                }
            })
        }
        Cmd::Simulate { artifact, p_fail, p_eras, seed, cycles, time_cap, trace, output } => {
            let art = CompileArtifact::read(&artifact)?;
            if art.plan.is_none() {
                return Err(Failure::Other(anyhow::anyhow!("artifact has no emission plan (capacity violation)")));
            }
            let noise = usage(NoiseParams::new(p_fail, p_eras, seed).map_err(Into::into))?;
            let run = RunConfig {
                scheme: art.config.scheme,
                noise,
                hw: art.config.hw,
                cycles,
                time_cap,
                artifact_hash: art.summary.config_hash.clone(),
            };
            let (m, events) = artifact::simulate(&art, &run, trace.is_some())?;
            write(&output, &artifact::csv_bytes(&[MetricsRow::new(&run, &m)])?)?;
            if let Some(t) = trace {
                write(&t, &artifact::trace_bytes(&events))?;
            }
            if m.no_shot {
                eprintln!("warning: no shot completed within the time cap");
                return Ok(EXIT_NO_SHOT);
            }
            Ok(0)
        }
        Cmd::Sweep { grid, output, pipeline_output, threads } => {
            let g = usage(Grid::read(&grid))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .context("starting worker pool")?;
            let out = pool.install(|| run_sweep(&g))?;
            write(&output, &artifact::csv_bytes(&out.rates)?)?;
            match (pipeline_output, out.pipeline) {
                (Some(p), Some(rows)) => write(&p, &artifact::csv_bytes(&rows)?)?,
                (Some(_), None) => return Err(Failure::Usage(anyhow::anyhow!("grid has no pipeline section"))),
                _ => {}
            }
            Ok(0)
        }
        Cmd::Report { inputs, output, summary } => {
            let (merged, rep) = usage(report::merge(&inputs))?;
            write(&output, &merged)?;
            if let Some(s) = summary {
                write(&s, &to_json(&rep))?;
            }
            Ok(0)
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    write_output(path, bytes).with_context(|| format!("writing {}", path.display()))
}
