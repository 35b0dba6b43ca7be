//! Command-line front end: generate placement instances, run a single
//! algorithm on one graph, sweep experiment cells, summarize result CSVs,
//! and check graph files against the structural invariants.
//!
//! Seeds passed on the command line are split into per-purpose streams the
//! same way the experiment sweep splits its per-instance seeds, so
//! `generate --seed S` and `place --seed S` reproduce the instance and the
//! algorithm run of a sweep row whose `instance_seed` column reads `S`.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dcplace::baselines::{brute_force_optimal, greedy_placement, random_placement};
use dcplace::dlm::{run_dlm, DlmConfig};
use dcplace::graph::{placement_cost, NodeId};
use dcplace::harness::{
    grid_dims, preset, preset_names, read_result_rows, run_experiment, summarize,
    write_summary_rows, AlgorithmKind, ExperimentConfig, TieChoice, TopologyKind,
};
use dcplace::seeding::derive_seed;
use dcplace::topology::{
    gen_demand, gen_grid, gen_small_world, load_graph, save_graph, DemandDistribution, DemandSpec,
};
use dcplace::voronoi::{voronoi_partition, TieMode};

#[derive(Debug, Parser)]
#[command(name = "dcplace", version, about = "Graph k-median placement toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic graph as an edge-list file plus a demand file.
    Generate(GenerateArgs),
    /// Run one placement algorithm on one graph and emit placement JSON.
    Place(PlaceArgs),
    /// Run a sweep over (size, k-ratio, instance) cells and emit result CSV.
    Experiment(ExperimentArgs),
    /// Collapse a results CSV into per-cell cost-ratio statistics.
    Summarize(SummarizeArgs),
    /// Check a graph file against the structural invariants.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenTopologyArg {
    Grid,
    SmallWorld,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TopologyArg {
    Grid,
    SmallWorld,
    File,
}

impl From<TopologyArg> for TopologyKind {
    fn from(arg: TopologyArg) -> Self {
        match arg {
            TopologyArg::Grid => TopologyKind::Grid,
            TopologyArg::SmallWorld => TopologyKind::SmallWorld,
            TopologyArg::File => TopologyKind::File,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Dlm,
    Greedy,
    Brute,
    Random,
}

impl From<AlgorithmArg> for AlgorithmKind {
    fn from(arg: AlgorithmArg) -> Self {
        match arg {
            AlgorithmArg::Dlm => AlgorithmKind::Dlm,
            AlgorithmArg::Greedy => AlgorithmKind::Greedy,
            AlgorithmArg::Brute => AlgorithmKind::Brute,
            AlgorithmArg::Random => AlgorithmKind::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieArg {
    LowestId,
    SeededUniform,
}

impl From<TieArg> for TieChoice {
    fn from(arg: TieArg) -> Self {
        match arg {
            TieArg::LowestId => TieChoice::LowestId,
            TieArg::SeededUniform => TieChoice::SeededUniform,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistributionArg {
    Pareto,
    Uniform,
    Constant,
}

impl From<DistributionArg> for DemandDistribution {
    fn from(arg: DistributionArg) -> Self {
        match arg {
            DistributionArg::Pareto => DemandDistribution::Pareto,
            DistributionArg::Uniform => DemandDistribution::Uniform,
            DistributionArg::Constant => DemandDistribution::Constant,
        }
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    topology: GenTopologyArg,
    /// Node count; grids use the most even rows x cols split.
    #[arg(long)]
    n: Option<usize>,
    /// Explicit grid rows; overrides --n.
    #[arg(long, requires = "cols")]
    rows: Option<usize>,
    /// Explicit grid columns; overrides --n.
    #[arg(long, requires = "rows")]
    cols: Option<usize>,
    /// Ring-lattice degree for small-world graphs (even).
    #[arg(long, default_value_t = 4)]
    sw_degree: usize,
    /// Edge rewiring probability for small-world graphs.
    #[arg(long, default_value_t = 0.1)]
    sw_rewire: f64,
    #[arg(long, value_enum, default_value_t = DistributionArg::Pareto)]
    demand_distribution: DistributionArg,
    /// Pareto tail index.
    #[arg(long, default_value_t = 1.16)]
    demand_shape: f64,
    /// Pareto minimum / uniform upper bound / constant value.
    #[arg(long, default_value_t = 1.0)]
    demand_scale: f64,
    /// Instance seed; graph and demand draws use streams split from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list output path.
    #[arg(long)]
    edges_out: PathBuf,
    /// Demand output path.
    #[arg(long)]
    demands_out: PathBuf,
}

#[derive(Debug, Args)]
struct PlaceArgs {
    /// Edge-list file.
    #[arg(long)]
    graph: PathBuf,
    /// Demand file; omitted means unit demands.
    #[arg(long)]
    demands: Option<PathBuf>,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    /// Number of sites to place.
    #[arg(long)]
    k: usize,
    /// Instance seed for the dlm and random algorithms and partition ties.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop once no center moves farther than this between iterations.
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Iteration cap for the dlm loop.
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// How equidistant nodes choose a region.
    #[arg(long, value_enum, default_value_t = TieArg::SeededUniform)]
    tie: TieArg,
    /// Placement JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// JSON config file; the flags below override its fields.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in config name (see `--preset help` for the list).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_enum)]
    topology: Option<TopologyArg>,
    /// Edge-list file for the file topology.
    #[arg(long)]
    graph_file: Option<PathBuf>,
    /// Demand file for the file topology; omitted means generated demands.
    #[arg(long)]
    demand_file: Option<PathBuf>,
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Comma-separated site-to-node ratios in (0, 1).
    #[arg(long, value_delimiter = ',')]
    k_ratios: Option<Vec<f64>>,
    /// Instances per (size, ratio) cell.
    #[arg(long)]
    instances: Option<usize>,
    /// Comma-separated algorithms to run per instance.
    #[arg(long, value_enum, value_delimiter = ',')]
    algorithms: Option<Vec<AlgorithmArg>>,
    /// Convergence threshold for the dlm loop.
    #[arg(long)]
    eta: Option<f64>,
    /// Iteration cap for the dlm loop.
    #[arg(long)]
    max_iter: Option<usize>,
    /// How equidistant nodes choose a region.
    #[arg(long, value_enum)]
    tie: Option<TieArg>,
    #[arg(long, value_enum)]
    demand_distribution: Option<DistributionArg>,
    #[arg(long)]
    demand_shape: Option<f64>,
    #[arg(long)]
    demand_scale: Option<f64>,
    /// Ring-lattice degree for small-world graphs (even).
    #[arg(long)]
    sw_degree: Option<usize>,
    /// Edge rewiring probability for small-world graphs.
    #[arg(long)]
    sw_rewire: Option<f64>,
    /// Overrides the master seed wherever the config came from.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the sizes with the full sweep up to n = 4000.
    #[arg(long, conflicts_with = "sizes")]
    full: bool,
    /// Results CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    /// Results CSV produced by `experiment`.
    input: PathBuf,
    /// Baseline algorithm for the cost ratios.
    #[arg(long, default_value = "greedy")]
    baseline: String,
    /// Summary CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Edge-list file.
    graph: PathBuf,
    /// Demand file; omitted means unit demands.
    #[arg(long)]
    demands: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => run_generate(args),
        Command::Place(args) => run_place(args),
        Command::Experiment(args) => run_experiment_cmd(args),
        Command::Summarize(args) => run_summarize(args),
        Command::Verify(args) => run_verify(args),
    }
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let graph_seed = derive_seed(args.seed, &[0]);
    let demand_seed = derive_seed(args.seed, &[1]);
    let mut graph = match args.topology {
        GenTopologyArg::Grid => {
            let (rows, cols) = match (args.rows, args.cols) {
                (Some(r), Some(c)) => (r, c),
                _ => grid_dims(args.n.context("grid needs --n or --rows/--cols")?),
            };
            gen_grid(rows, cols)?
        }
        GenTopologyArg::SmallWorld => {
            let n = args.n.context("small-world needs --n")?;
            gen_small_world(n, args.sw_degree, args.sw_rewire, graph_seed)?
        }
    };
    let spec = DemandSpec {
        distribution: args.demand_distribution.into(),
        shape: args.demand_shape,
        scale: args.demand_scale,
        seed: demand_seed,
    };
    let demands = gen_demand(graph.node_count(), &spec)?;
    graph.set_demands(&demands)?;
    save_graph(&graph, &args.edges_out, &args.demands_out)?;
    eprintln!(
        "wrote {} nodes / {} edges to {} and {}",
        graph.node_count(),
        graph.edge_count(),
        args.edges_out.display(),
        args.demands_out.display()
    );
    Ok(())
}

/// The JSON a `place` run emits.
#[derive(Debug, Serialize)]
struct PlacementReport {
    sites: Vec<NodeId>,
    cost: f64,
    /// Loop iterations; null for the single-shot algorithms.
    iterations: Option<usize>,
    per_region_sizes: Vec<usize>,
}

fn run_place(args: PlaceArgs) -> Result<()> {
    let graph = load_graph(&args.graph, args.demands.as_deref())
        .with_context(|| format!("loading {}", args.graph.display()))?;
    let tie_mode = match args.tie {
        TieArg::LowestId => TieMode::LowestId,
        TieArg::SeededUniform => TieMode::SeededUniform(derive_seed(args.seed, &[3])),
    };
    let (placement, cost, iterations) = match args.algorithm {
        AlgorithmArg::Dlm => {
            let config = DlmConfig {
                k: args.k,
                eta: args.eta,
                max_iter: args.max_iter,
                seed: derive_seed(args.seed, &[2]),
                tie_mode,
            };
            let trace = run_dlm(&graph, &config)?;
            let iterations = trace.iteration_count();
            (trace.final_placement, trace.final_cost, Some(iterations))
        }
        AlgorithmArg::Greedy => {
            let (placement, costs) = greedy_placement(&graph, args.k)?;
            let cost = *costs.last().context("greedy returned no cost")?;
            (placement, cost, None)
        }
        AlgorithmArg::Brute => {
            let (placement, cost) = brute_force_optimal(&graph, args.k)?;
            (placement, cost, None)
        }
        AlgorithmArg::Random => {
            let placement = random_placement(&graph, args.k, derive_seed(args.seed, &[4]))?;
            let cost = placement_cost(&graph, &placement)?;
            (placement, cost, None)
        }
    };
    let partition = voronoi_partition(&graph, &placement, tie_mode)?;
    let report = PlacementReport {
        sites: placement.sites().to_vec(),
        cost,
        iterations,
        per_region_sizes: partition.regions().iter().map(Vec::len).collect(),
    };
    let text = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

/// Config file / preset / plain defaults, in that priority order. Flag
/// overrides are applied afterwards, so validation waits until then.
fn base_config(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    if let Some(path) = &args.config {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()));
    }
    if let Some(name) = &args.preset {
        return preset(name).ok_or_else(|| {
            anyhow!("unknown preset {name}; known presets: {}", preset_names().join(", "))
        });
    }
    let name = match args.topology {
        Some(TopologyArg::SmallWorld) => "small-world-ci",
        // The file topology ignores the preset's sizes, so any base works.
        _ => "grid-ci",
    };
    Ok(preset(name).expect("built-in preset"))
}

fn run_experiment_cmd(args: ExperimentArgs) -> Result<()> {
    let mut config = base_config(&args)?;
    if let Some(t) = args.topology {
        config.topology = t.into();
    }
    if args.graph_file.is_some() {
        config.graph_file = args.graph_file.clone();
    }
    if args.demand_file.is_some() {
        config.demand_file = args.demand_file.clone();
    }
    if let Some(sizes) = &args.sizes {
        config.sizes = sizes.clone();
    }
    if args.full {
        config.sizes = (400..=4000).step_by(400).collect();
    }
    if let Some(ratios) = &args.k_ratios {
        config.k_ratios = ratios.clone();
    }
    if let Some(instances) = args.instances {
        config.instances_per_cell = instances;
    }
    if let Some(algorithms) = &args.algorithms {
        config.algorithms = algorithms.iter().map(|&a| a.into()).collect();
    }
    if let Some(eta) = args.eta {
        config.dlm.eta = eta;
    }
    if let Some(max_iter) = args.max_iter {
        config.dlm.max_iter = max_iter;
    }
    if let Some(tie) = args.tie {
        config.dlm.tie = tie.into();
    }
    if let Some(distribution) = args.demand_distribution {
        config.demand.distribution = distribution.into();
    }
    if let Some(shape) = args.demand_shape {
        config.demand.shape = shape;
    }
    if let Some(scale) = args.demand_scale {
        config.demand.scale = scale;
    }
    if let Some(degree) = args.sw_degree {
        config.small_world_degree = degree;
    }
    if let Some(rewire) = args.sw_rewire {
        config.small_world_rewire = rewire;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if args.out.is_some() {
        config.output_path = args.out.clone();
    }
    config.validate()?;

    let rows = run_experiment(&config)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    match &config.output_path {
        Some(path) => {
            eprintln!("{} rows ({failed} failed) -> {}", rows.len(), path.display());
        }
        None => write_csv_to_stdout(&rows)?,
    }
    if failed > 0 {
        bail!("{failed} of {} runs failed; see the status column", rows.len());
    }
    Ok(())
}

fn run_summarize(args: SummarizeArgs) -> Result<()> {
    let rows = read_result_rows(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let summary = summarize(&rows, &args.baseline);
    if summary.is_empty() {
        bail!("no summarizable rows (is the baseline name right?)");
    }
    match &args.out {
        Some(path) => write_summary_rows(path, &summary)?,
        None => write_csv_to_stdout(&summary)?,
    }
    Ok(())
}

fn write_csv_to_stdout<T: Serialize>(rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(io::stdout().lock());
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<()> {
    let graph = load_graph(&args.graph, args.demands.as_deref())
        .with_context(|| format!("loading {}", args.graph.display()))?;
    let edges = graph.edges();
    let endpoints: HashSet<(NodeId, NodeId)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let checks: Vec<(&str, bool)> = vec![
        ("at least one node", graph.node_count() >= 1),
        ("connected", graph.is_connected()),
        (
            "edge distances positive and finite",
            edges.iter().all(|&(_, _, d)| d.is_finite() && d > 0.0),
        ),
        ("no self-loops", edges.iter().all(|&(u, v, _)| u != v)),
        ("no duplicate edges", endpoints.len() == edges.len()),
        (
            "adjacency symmetric",
            edges.iter().all(|&(u, v, d)| graph.neighbor_distance(v, u) == Some(d)),
        ),
        (
            "demands positive and finite",
            graph.demands().iter().all(|&w| w.is_finite() && w > 0.0),
        ),
        (
            "self-costs non-negative and finite",
            graph.self_costs().iter().all(|&c| c.is_finite() && c >= 0.0),
        ),
    ];
    let mut failed = 0;
    for (name, ok) in &checks {
        println!("{} {name}", if *ok { "ok  " } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    }
    println!(
        "{} nodes, {} edges, total demand {}",
        graph.node_count(),
        graph.edge_count(),
        graph.demands().iter().sum::<f64>()
    );
    if failed > 0 {
        bail!("{failed} invariant check(s) failed");
    }
    Ok(())
}
