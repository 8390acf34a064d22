// SPDX-License-Identifier: Apache-2.0
//! Command-line front end.
//!
//! Exit codes: 0 success, 1 analysis failure (deadlock, inconsistency,
//! infeasibility), 2 input error, 3 state budget exceeded.

mod config;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{RunConfig, DEFAULT_OUT_DIR, OUT_DIR_ENV};
pub use output::{
    cost_csv, front_csv, parse_cost_csv, parse_front_csv, parse_series_csv, parse_solutions_json, series_csv,
    solutions_json, CostRow, InputDigest, Manifest, OutDir, ScheduleRecord, SeriesRow, SolutionRecord,
    COST_HEADER, FRONT_HEADER, SERIES_HEADER,
};

use crate::dse::{lift_exec_time, run_design_flow, MappingMode};
use crate::error::{Error, MappingError, PartitionError, SdfgError};
use crate::graph::{compute_graph_stats, load_hardware_graph, load_snn_graph, snn_graph_to_string, SnnGraph};
use crate::mapping::{cluster_demands, search_mapping, MappingContext};
use crate::partition::{clustered_graph_to_string, iterate_partitions, load_clustered_graph};
use crate::rates::{estimate_rates_from_graph, load_spike_trains};
use crate::sdfg::{
    check_deadlock, delay_feedback, lift_to_sdfg, load_sdfg, repetition_vector, self_timed_throughput_with,
    AnalysisOptions, DeadlockCheck,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ANALYSIS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Stable exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_budget_exceeded() {
        return EXIT_BUDGET;
    }
    let sdfg = |s: &SdfgError| match s {
        SdfgError::Deadlock { .. } | SdfgError::Inconsistent { .. } | SdfgError::Unbounded(_) => EXIT_ANALYSIS,
        SdfgError::BudgetExceeded(_) => EXIT_BUDGET,
        SdfgError::InfeasibleCapacity { .. } | SdfgError::Invalid(_) => EXIT_INPUT,
    };
    match e {
        Error::Graph(_) | Error::Rate(_) | Error::Config(_) => EXIT_INPUT,
        Error::Partition(PartitionError::Infeasible { .. }) => EXIT_ANALYSIS,
        Error::Partition(_) => EXIT_INPUT,
        Error::Sdfg(s) | Error::Mapping(MappingError::Analysis(s)) => sdfg(s),
        Error::Mapping(MappingError::Infeasible(_)) | Error::AllRoundsInfeasible(_) => EXIT_ANALYSIS,
        Error::Mapping(MappingError::InvalidConfig(_)) => EXIT_INPUT,
    }
}

#[derive(Debug, Parser)]
#[command(name = "snnmap", version, about = "Map spiking neural networks onto neuromorphic many-core hardware")]
pub struct Cli {
    /// Worker threads; 0 uses every available core. Results do not depend on it.
    #[arg(long, short = 'j', default_value_t = 0, global = true)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degree and diameter statistics of an SNN graph.
    Stats {
        graph: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Estimate per-synapse spike counts from representative input frames.
    Rates {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        trains: PathBuf,
        /// Output graph file; defaults to `rated_graph.toml` in the output directory.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Partition rounds only: clustered graphs and cost log.
    Partition(FlowArgs),
    /// Consistency, deadlock and throughput of an SDFG file.
    Analyze {
        sdfg: PathBuf,
        #[arg(long)]
        state_budget: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Swarm search for a mapping of a fixed clustered graph.
    Map(MapArgs),
    /// Full flow: partition rounds, buffer sweep, mapping, Pareto front.
    Explore(FlowArgs),
}

/// Config file plus flag overrides.
#[derive(Debug, Clone, Default, Args)]
pub struct FlowArgs {
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub hardware: Option<PathBuf>,
    #[arg(long)]
    pub trains: Option<PathBuf>,
    /// Keep the graph's own spike counts even if trains are given.
    #[arg(long)]
    pub use_graph_rates: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub eta: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub crossbar_dim: Option<usize>,
    #[arg(long)]
    pub delta_min: Option<f64>,
    #[arg(long)]
    pub particles: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub state_budget: Option<usize>,
    #[arg(long, value_parser = ["per-allocation", "reuse"])]
    pub mapping_mode: Option<String>,
    /// Keep token-free cycles between clusters instead of delaying feedback.
    #[arg(long)]
    pub no_feedback_delay: bool,
}

impl FlowArgs {
    pub fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
            if v.is_some() {
                slot.clone_from(v);
            }
        };
        set(&mut cfg.snn_graph, &self.graph);
        set(&mut cfg.hardware_graph, &self.hardware);
        set(&mut cfg.spike_trains, &self.trains);
        cfg.use_graph_rates |= self.use_graph_rates;
        let f = &mut cfg.flow;
        if let Some(v) = self.eta {
            f.eta = v;
        }
        if let Some(v) = self.seed {
            f.master_seed = v;
        }
        if self.crossbar_dim.is_some() {
            f.crossbar_dim = self.crossbar_dim;
        }
        if let Some(v) = self.delta_min {
            f.delta_min = v;
        }
        if let Some(v) = self.particles {
            f.swarm.particles = v;
        }
        if let Some(v) = self.iterations {
            f.swarm.iterations = v;
        }
        if let Some(v) = self.state_budget {
            f.state_budget = v;
        }
        if let Some(m) = &self.mapping_mode {
            f.mapping_mode = if m == "reuse" {
                MappingMode::Reuse
            } else {
                MappingMode::PerAllocation
            };
        }
        if self.no_feedback_delay {
            f.feedback_delay = false;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    #[arg(long)]
    pub clustered: PathBuf,
    #[arg(long)]
    pub hardware: PathBuf,
    /// Uniform capacity of every inter-cluster channel; unbounded if absent.
    #[arg(long)]
    pub buffer: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub particles: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long, default_value_t = crate::mapping::DEFAULT_TIME_WHEEL_FACTOR)]
    pub time_wheel_factor: u64,
    #[arg(long)]
    pub no_feedback_delay: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Thread pool that parallel stages run in.
pub struct WorkerPool(rayon::ThreadPool);

impl WorkerPool {
    /// `jobs` threads; 0 uses every available core.
    pub fn new(jobs: usize) -> Result<Self, String> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map(WorkerPool)
            .map_err(|e| format!("cannot start worker threads: {e}"))
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.0.install(f)
    }
}

/// Parse `args` (program name first) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match WorkerPool::new(cli.jobs) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command) -> Result<i32, Error> {
    match cmd {
        Command::Stats { graph, json } => cmd_stats(graph, *json),
        Command::Rates {
            graph,
            trains,
            output,
            out_dir,
        } => cmd_rates(graph, trains, output.as_deref(), out_dir.as_deref()),
        Command::Partition(a) => cmd_partition(&a.resolve()?, a.out_dir.as_deref()),
        Command::Analyze {
            sdfg,
            state_budget,
            json,
        } => cmd_analyze(sdfg, *state_budget, *json),
        Command::Map(a) => cmd_map(a),
        Command::Explore(a) => cmd_explore(&a.resolve()?, a.out_dir.as_deref()),
    }
}

pub fn cmd_stats(path: &Path, json: bool) -> Result<i32, Error> {
    let g = load_snn_graph(path)?;
    let s = compute_graph_stats(&g);
    if json {
        println!("{}", serde_json::to_string_pretty(&s).expect("stats serialize"));
    } else {
        println!("neurons         {}", g.neuron_count());
        println!("inputs          {}", g.inputs().len());
        println!("synapses        {}", g.synapses().len());
        println!("max in-degree   {}", s.max_in_degree);
        println!("avg in-degree   {:.3}", s.avg_in_degree);
        println!("max out-degree  {}", s.max_out_degree);
        println!("avg out-degree  {:.3}", s.avg_out_degree);
        println!("diameter        {}", s.diameter);
    }
    Ok(EXIT_OK)
}

pub fn cmd_rates(graph: &Path, trains: &Path, output: Option<&Path>, out_dir: Option<&Path>) -> Result<i32, Error> {
    let g = load_snn_graph(graph)?;
    let frames = load_spike_trains(trains)?;
    let rated = estimate_rates_from_graph(&g, &frames)?;
    let text = snn_graph_to_string(&rated);
    let path = match output {
        Some(p) => {
            std::fs::write(p, text).map_err(|source| crate::error::GraphError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            p.to_path_buf()
        }
        None => {
            let mut out = OutDir::create(RunConfig::default().resolve_out_dir(out_dir))?;
            out.write("rated_graph.toml", &text)?
        }
    };
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

/// The SNN graph of a run, with rates re-estimated from trains if given.
fn load_network(cfg: &RunConfig) -> Result<SnnGraph, Error> {
    let path = cfg
        .snn_graph
        .as_ref()
        .ok_or_else(|| Error::Config("no SNN graph given".into()))?;
    let g = load_snn_graph(path)?;
    match &cfg.spike_trains {
        Some(t) if !cfg.use_graph_rates => Ok(estimate_rates_from_graph(&g, &load_spike_trains(t)?)?),
        _ => Ok(g),
    }
}

fn digests(cfg: &RunConfig) -> Result<Vec<InputDigest>, Error> {
    [&cfg.snn_graph, &cfg.hardware_graph, &cfg.spike_trains]
        .into_iter()
        .flatten()
        .map(|p| InputDigest::of(p))
        .collect()
}

fn manifest(command: &str, status: &str, cfg: &RunConfig, out: &OutDir, failures: Vec<String>) -> Result<Manifest, Error> {
    Ok(Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        status: status.to_string(),
        inputs: digests(cfg)?,
        outputs: out.written().to_vec(),
        failures,
        config: cfg.clone(),
    })
}

pub fn cmd_partition(cfg: &RunConfig, out_flag: Option<&Path>) -> Result<i32, Error> {
    cfg.validate(false)?;
    let g = load_network(cfg)?;
    let hw = cfg.hardware_graph.as_ref().map(load_hardware_graph).transpose()?;
    let constraint = cfg.flow.crossbar_constraint(hw.as_ref())?;
    let f = &cfg.flow;
    let rounds = iterate_partitions(&g, &constraint, f.eta, f.delta_min, f.master_seed)?;
    let mut out = OutDir::create(cfg.resolve_out_dir(out_flag))?;
    for r in &rounds {
        out.write(&format!("clustered/round_{:03}.toml", r.round), &clustered_graph_to_string(&r.clustered))?;
    }
    let traces: Vec<_> = rounds.iter().map(|r| (r.round, &r.trace)).collect();
    out.write("partition_costs.csv", &cost_csv(&traces))?;
    let m = manifest("partition", "ok", cfg, &out, Vec::new())?;
    out.write("manifest.toml", &m.to_toml())?;
    for r in &rounds {
        println!(
            "round {}: {} clusters, cost {} -> {}",
            r.round,
            r.clustered.cluster_count(),
            r.trace.initial_cost,
            r.trace.final_cost
        );
    }
    Ok(EXIT_OK)
}

pub fn cmd_analyze(path: &Path, state_budget: Option<usize>, json: bool) -> Result<i32, Error> {
    let g = load_sdfg(path)?;
    let q = repetition_vector(&g)?;
    let opts = AnalysisOptions {
        state_budget: state_budget.unwrap_or(crate::sdfg::DEFAULT_STATE_BUDGET),
    };
    let deadlock = check_deadlock(&g)?;
    let names: Vec<&str> = g.actors().iter().map(|a| a.name.as_str()).collect();
    if let DeadlockCheck::Deadlock(r) = &deadlock {
        let starving: Vec<&str> = r.starving.iter().map(|&a| names[a]).collect();
        if json {
            let v = serde_json::json!({"repetition_vector": q.0, "deadlock": true, "starving": starving});
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
        } else {
            println!("repetition vector {:?}", q.0);
            println!("deadlock: starving actors {starving:?}");
        }
        return Ok(EXIT_ANALYSIS);
    }
    let t = self_timed_throughput_with(&g, None, None, &opts)?;
    if json {
        let v = serde_json::json!({"repetition_vector": q.0, "deadlock": false, "throughput": t});
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        println!("repetition vector {:?}", q.0);
        println!("deadlock-free");
        println!(
            "period {}/{} = {}, throughput {}",
            t.period_time, t.period_iterations, t.period, t.throughput
        );
    }
    Ok(EXIT_OK)
}

pub fn cmd_map(a: &MapArgs) -> Result<i32, Error> {
    let cg = load_clustered_graph(&a.clustered)?;
    let hw = load_hardware_graph(&a.hardware)?;
    let mut g = lift_to_sdfg(&cg, lift_exec_time(&hw), a.buffer);
    if !a.no_feedback_delay {
        g = delay_feedback(&g).0;
    }
    let mut swarm = crate::mapping::SwarmConfig {
        seed: a.seed,
        ..Default::default()
    };
    if let Some(p) = a.particles {
        swarm.particles = p;
    }
    if let Some(i) = a.iterations {
        swarm.iterations = i;
    }
    let ctx = MappingContext::new(&g, &hw, Some(cluster_demands(&cg)), a.time_wheel_factor)?;
    let s = search_mapping(&ctx, &swarm)?;
    let rec = SolutionRecord::new(&s, &g, &hw, None);
    let mut out = OutDir::create(RunConfig::default().resolve_out_dir(a.out_dir.as_deref()))?;
    let path = out.write("solution.json", &solutions_json(std::slice::from_ref(&rec)))?;
    println!(
        "throughput {} (period {}/{}), mapping {:?}",
        rec.throughput, rec.period_time, rec.period_iterations, rec.mapping
    );
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

/// Full flow. Writes `front.csv`, `solutions.json`, `series.csv`,
/// `partition_costs.csv`, one clustered graph per round and `manifest.toml`.
/// On a budget overrun whatever was computed is written before returning
/// the budget exit code.
pub fn cmd_explore(cfg: &RunConfig, out_flag: Option<&Path>) -> Result<i32, Error> {
    cfg.validate(true)?;
    let g = load_network(cfg)?;
    let hw = load_hardware_graph(cfg.hardware_graph.as_ref().expect("validated"))?;
    let mut out = OutDir::create(cfg.resolve_out_dir(out_flag))?;
    let result = match run_design_flow(&g, &hw, &cfg.flow) {
        Ok(r) => r,
        Err(e) => {
            let m = manifest("explore", "failed", cfg, &out, vec![e.to_string()])?;
            out.write("manifest.toml", &m.to_toml())?;
            return Err(e);
        }
    };

    for r in &result.rounds {
        out.write(
            &format!("clustered/round_{:03}.toml", r.round),
            &clustered_graph_to_string(&r.partition.clustered),
        )?;
    }
    out.write("partition_costs.csv", &cost_csv(&result.traces()))?;
    out.write("series.csv", &series_csv(&result))?;
    let records: Vec<SolutionRecord> = result
        .points
        .iter()
        .map(|p| {
            let round = result
                .rounds
                .iter()
                .find(|r| r.round == p.provenance.round)
                .expect("point from a completed round");
            let s = &round.solutions[p.provenance.sweep_step];
            SolutionRecord::new(s, &round.sdfg, &hw, Some((p.provenance.round, p.provenance.sweep_step)))
        })
        .collect();
    out.write("solutions.json", &solutions_json(&records))?;
    out.write("front.csv", &front_csv(&result.front.points))?;

    let failures: Vec<String> = result
        .failures
        .iter()
        .map(|f| format!("round {}: {}", f.round, f.message))
        .collect();
    let budget = result.budget_exceeded();
    let status = if failures.is_empty() { "ok" } else { "partial" };
    let m = manifest("explore", status, cfg, &out, failures)?;
    out.write("manifest.toml", &m.to_toml())?;

    println!(
        "{} design points, {} on the front, {} failed rounds; results in {}",
        result.points.len(),
        result.front.len(),
        result.failures.len(),
        out.path().display()
    );
    Ok(if budget { EXIT_BUDGET } else { EXIT_OK })
}
