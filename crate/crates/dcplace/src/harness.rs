//! Experiment sweeps: generate instances over (topology, size, k-ratio)
//! cells, run the selected placement algorithms, and aggregate cost ratios.
//! Everything is reproducible from the config alone; per-instance seeds are
//! derived from the master seed and the cell coordinates, so any cell can be
//! re-run in isolation.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{brute_force_optimal, greedy_placement, random_placement};
use crate::dlm::{run_dlm, DlmConfig};
use crate::error::{Error, Result};
use crate::graph::{placement_cost, Graph};
use crate::seeding::derive_seed;
use crate::topology::{gen_demand, gen_grid, gen_small_world, load_graph, DemandDistribution, DemandSpec};
use crate::voronoi::TieMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    Grid,
    SmallWorld,
    File,
}

impl TopologyKind {
    fn label(self) -> &'static str {
        match self {
            TopologyKind::Grid => "grid",
            TopologyKind::SmallWorld => "small-world",
            TopologyKind::File => "file",
        }
    }

    fn tag(self) -> u64 {
        match self {
            TopologyKind::Grid => 0,
            TopologyKind::SmallWorld => 1,
            TopologyKind::File => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    Dlm,
    Greedy,
    Brute,
    Random,
}

impl AlgorithmKind {
    pub fn label(self) -> &'static str {
        match self {
            AlgorithmKind::Dlm => "dlm",
            AlgorithmKind::Greedy => "greedy",
            AlgorithmKind::Brute => "brute",
            AlgorithmKind::Random => "random",
        }
    }
}

/// How equidistant nodes break ties inside experiment runs. The actual seed
/// for the uniform mode is derived per instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieChoice {
    LowestId,
    SeededUniform,
}

/// Loop settings applied to every DLM run of a sweep; k and seeds are
/// supplied per instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DlmSettings {
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tie_choice")]
    pub tie: TieChoice,
}

fn default_max_iter() -> usize {
    100
}

fn default_tie_choice() -> TieChoice {
    TieChoice::SeededUniform
}

impl Default for DlmSettings {
    fn default() -> Self {
        DlmSettings { eta: 0.0, max_iter: default_max_iter(), tie: default_tie_choice() }
    }
}

/// Demand distribution template; the per-instance seed is derived, so the
/// template's own seed field is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandTemplate {
    pub distribution: DemandDistribution,
    #[serde(default = "default_shape")]
    pub shape: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_shape() -> f64 {
    1.16
}

fn default_scale() -> f64 {
    1.0
}

impl Default for DemandTemplate {
    fn default() -> Self {
        DemandTemplate {
            distribution: DemandDistribution::Pareto,
            shape: default_shape(),
            scale: default_scale(),
        }
    }
}

impl DemandTemplate {
    fn with_seed(self, seed: u64) -> DemandSpec {
        DemandSpec { distribution: self.distribution, shape: self.shape, scale: self.scale, seed }
    }
}

/// Full description of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub topology: TopologyKind,
    /// Edge-list file, required for the `file` topology.
    #[serde(default)]
    pub graph_file: Option<PathBuf>,
    /// Optional demand file for the `file` topology; when present it
    /// replaces generated demands.
    #[serde(default)]
    pub demand_file: Option<PathBuf>,
    /// Node counts to sweep (ignored for the `file` topology).
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Site-to-node ratios; each yields k = max(1, round(ratio * n)).
    pub k_ratios: Vec<f64>,
    #[serde(default = "default_instances")]
    pub instances_per_cell: usize,
    #[serde(default)]
    pub demand: DemandTemplate,
    #[serde(default)]
    pub dlm: DlmSettings,
    pub algorithms: Vec<AlgorithmKind>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default = "default_sw_degree")]
    pub small_world_degree: usize,
    #[serde(default = "default_sw_rewire")]
    pub small_world_rewire: f64,
}

fn default_instances() -> usize {
    5
}

fn default_sw_degree() -> usize {
    4
}

fn default_sw_rewire() -> f64 {
    0.1
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        match self.topology {
            TopologyKind::File => {
                if self.graph_file.is_none() {
                    return Err(Error::Config(
                        "file topology requires a graph_file".into(),
                    ));
                }
            }
            _ => {
                if self.sizes.is_empty() {
                    return Err(Error::Config("sizes must not be empty".into()));
                }
                if self.sizes.iter().any(|&n| n < 2) {
                    return Err(Error::Config("every size must be at least 2".into()));
                }
            }
        }
        if self.k_ratios.is_empty() {
            return Err(Error::Config("k_ratios must not be empty".into()));
        }
        for &r in &self.k_ratios {
            if !(r.is_finite() && r > 0.0 && r < 1.0) {
                return Err(Error::Config(format!("k ratio must be in (0, 1), got {r}")));
            }
        }
        if self.instances_per_cell == 0 {
            return Err(Error::Config("instances_per_cell must be at least 1".into()));
        }
        if self.small_world_degree == 0 || !self.small_world_degree.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "small_world_degree must be even and positive, got {}",
                self.small_world_degree
            )));
        }
        if !(0.0..=1.0).contains(&self.small_world_rewire) {
            return Err(Error::Config(format!(
                "small_world_rewire must be in [0, 1], got {}",
                self.small_world_rewire
            )));
        }
        if !(self.demand.shape.is_finite() && self.demand.shape > 0.0)
            || !(self.demand.scale.is_finite() && self.demand.scale > 0.0)
        {
            return Err(Error::Config("demand shape and scale must be positive".into()));
        }
        Ok(())
    }

    /// Derives k from a ratio, clamped to a valid placement size.
    pub fn k_for(n: usize, ratio: f64) -> Result<usize> {
        let k = ((ratio * n as f64).round() as usize).max(1);
        if k >= n {
            return Err(Error::Config(format!(
                "ratio {ratio} yields k={k} >= n={n}"
            )));
        }
        Ok(k)
    }
}

/// Parses and validates a JSON experiment config.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// One algorithm run on one generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub topology: String,
    pub n: usize,
    pub k: usize,
    pub instance_seed: u64,
    pub algorithm: String,
    /// Empty on error rows.
    pub cost: Option<f64>,
    /// Loop iterations; present for dlm rows only.
    pub iterations: Option<u64>,
    /// Wall-clock time; excluded from determinism comparisons.
    pub runtime_ms: f64,
    /// Simulated protocol messages; present for dlm rows only.
    pub messages_sent: Option<u64>,
    /// "ok", or the error that stopped this row.
    pub status: String,
}

/// Splits an n-node grid as evenly as possible: rows is the largest divisor
/// not exceeding sqrt(n).
pub fn grid_dims(n: usize) -> (usize, usize) {
    let mut rows = 1;
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            rows = d;
        }
        d += 1;
    }
    (rows, n / rows)
}

fn build_instance(config: &ExperimentConfig, n: usize, instance_seed: u64) -> Result<Graph> {
    let graph_seed = derive_seed(instance_seed, &[0]);
    let demand_seed = derive_seed(instance_seed, &[1]);
    let mut graph = match config.topology {
        TopologyKind::Grid => {
            let (r, c) = grid_dims(n);
            gen_grid(r, c)?
        }
        TopologyKind::SmallWorld => gen_small_world(
            n,
            config.small_world_degree,
            config.small_world_rewire,
            graph_seed,
        )?,
        TopologyKind::File => {
            let path = config.graph_file.as_ref().expect("validated");
            load_graph(path, config.demand_file.as_deref())?
        }
    };
    let generated_demand =
        !(config.topology == TopologyKind::File && config.demand_file.is_some());
    if generated_demand {
        let spec = config.demand.with_seed(demand_seed);
        let demands = gen_demand(graph.node_count(), &spec)?;
        graph.set_demands(&demands)?;
    }
    Ok(graph)
}

fn run_algorithm(
    config: &ExperimentConfig,
    graph: &Graph,
    k: usize,
    instance_seed: u64,
    algorithm: AlgorithmKind,
) -> (Option<f64>, Option<u64>, Option<u64>, String) {
    let outcome = match algorithm {
        AlgorithmKind::Dlm => {
            let tie_mode = match config.dlm.tie {
                TieChoice::LowestId => TieMode::LowestId,
                TieChoice::SeededUniform => {
                    TieMode::SeededUniform(derive_seed(instance_seed, &[3]))
                }
            };
            let dlm_config = DlmConfig {
                k,
                eta: config.dlm.eta,
                max_iter: config.dlm.max_iter,
                seed: derive_seed(instance_seed, &[2]),
                tie_mode,
            };
            run_dlm(graph, &dlm_config).map(|trace| {
                (
                    trace.final_cost,
                    Some(trace.iteration_count() as u64),
                    Some(trace.messages_sent),
                )
            })
        }
        AlgorithmKind::Greedy => {
            greedy_placement(graph, k).map(|(_, costs)| {
                (*costs.last().expect("k >= 1"), None, None)
            })
        }
        AlgorithmKind::Brute => {
            brute_force_optimal(graph, k).map(|(_, cost)| (cost, None, None))
        }
        AlgorithmKind::Random => random_placement(graph, k, derive_seed(instance_seed, &[4]))
            .and_then(|p| placement_cost(graph, &p))
            .map(|cost| (cost, None, None)),
    };
    match outcome {
        Ok((cost, iterations, messages)) => (Some(cost), iterations, messages, "ok".into()),
        Err(e) => (None, None, None, e.to_string()),
    }
}

/// Runs the whole sweep. Rows come out in canonical order (size, ratio,
/// instance, algorithm as listed); failures become error rows and the sweep
/// continues. Also writes the rows to `config.output_path` when set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let sizes: Vec<usize> = match config.topology {
        TopologyKind::File => vec![0], // placeholder; real n read from the file
        _ => config.sizes.clone(),
    };
    let mut rows = Vec::new();
    for &size in &sizes {
        for &ratio in &config.k_ratios {
            for instance in 0..config.instances_per_cell {
                let instance_seed = derive_seed(
                    config.master_seed,
                    &[config.topology.tag(), size as u64, instance as u64],
                );
                let built = build_instance(config, size, instance_seed);
                let (graph, build_error) = match built {
                    Ok(g) => (Some(g), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                let n = graph.as_ref().map_or(size, Graph::node_count);
                let k = ExperimentConfig::k_for(n.max(2), ratio);
                for &algorithm in &config.algorithms {
                    let started = Instant::now();
                    let (cost, iterations, messages, status) = if let Some(e) = &build_error {
                        (None, None, None, e.clone())
                    } else {
                        match &k {
                            Ok(k) => {
                                let g = graph.as_ref().expect("built without error");
                                run_algorithm(config, g, *k, instance_seed, algorithm)
                            }
                            Err(e) => (None, None, None, e.to_string()),
                        }
                    };
                    rows.push(ResultRow {
                        topology: config.topology.label().to_string(),
                        n,
                        k: k.as_ref().copied().unwrap_or(0),
                        instance_seed,
                        algorithm: algorithm.label().to_string(),
                        cost,
                        iterations,
                        runtime_ms: started.elapsed().as_secs_f64() * 1000.0,
                        messages_sent: messages,
                        status,
                    });
                }
            }
        }
    }
    if let Some(path) = &config.output_path {
        write_result_rows(path, &rows)?;
    }
    Ok(rows)
}

/// Writes rows as RFC 4180 CSV with a header line.
pub fn write_result_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in rows {
        writer.serialize(row).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_result_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    reader
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format { line: 0, message: format!("{other:?}") },
    }
}

/// Per-cell ratio statistics of one algorithm against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub topology: String,
    pub n: usize,
    pub k: usize,
    pub algorithm: String,
    pub baseline: String,
    /// Instances entering the ratio statistics.
    pub instances: usize,
    pub mean_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    pub status: String,
}

/// Collapses result rows into per-(topology, n, k) cost-ratio statistics
/// against `baseline`. Cells without a usable baseline produce a warning
/// row instead of statistics.
pub fn summarize(rows: &[ResultRow], baseline: &str) -> Vec<SummaryRow> {
    use std::collections::BTreeMap;
    type CellKey = (String, usize, usize);
    // cell -> algorithm -> instance_seed -> cost
    let mut cells: BTreeMap<CellKey, BTreeMap<String, BTreeMap<u64, f64>>> = BTreeMap::new();
    for row in rows {
        if row.status != "ok" {
            continue;
        }
        let Some(cost) = row.cost else { continue };
        cells
            .entry((row.topology.clone(), row.n, row.k))
            .or_default()
            .entry(row.algorithm.clone())
            .or_default()
            .insert(row.instance_seed, cost);
    }

    let mut out = Vec::new();
    for ((topology, n, k), algs) in &cells {
        let base = algs.get(baseline);
        for (alg, costs) in algs {
            if alg == baseline {
                continue;
            }
            let Some(base) = base else {
                out.push(SummaryRow {
                    topology: topology.clone(),
                    n: *n,
                    k: *k,
                    algorithm: alg.clone(),
                    baseline: baseline.to_string(),
                    instances: 0,
                    mean_ratio: None,
                    median_ratio: None,
                    max_ratio: None,
                    min_ratio: None,
                    status: format!("baseline {baseline} missing for this cell"),
                });
                continue;
            };
            let mut ratios: Vec<f64> = costs
                .iter()
                .filter_map(|(seed, &cost)| base.get(seed).map(|&b| cost / b))
                .collect();
            if ratios.is_empty() {
                out.push(SummaryRow {
                    topology: topology.clone(),
                    n: *n,
                    k: *k,
                    algorithm: alg.clone(),
                    baseline: baseline.to_string(),
                    instances: 0,
                    mean_ratio: None,
                    median_ratio: None,
                    max_ratio: None,
                    min_ratio: None,
                    status: format!("no instances share both {alg} and {baseline}"),
                });
                continue;
            }
            ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
            let count = ratios.len();
            let mean = ratios.iter().sum::<f64>() / count as f64;
            let median = if count % 2 == 1 {
                ratios[count / 2]
            } else {
                (ratios[count / 2 - 1] + ratios[count / 2]) / 2.0
            };
            out.push(SummaryRow {
                topology: topology.clone(),
                n: *n,
                k: *k,
                algorithm: alg.clone(),
                baseline: baseline.to_string(),
                instances: count,
                mean_ratio: Some(mean),
                median_ratio: Some(median),
                max_ratio: Some(ratios[count - 1]),
                min_ratio: Some(ratios[0]),
                status: "ok".into(),
            });
        }
    }
    out
}

pub fn write_summary_rows(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in rows {
        writer.serialize(row).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

/// Built-in configs. `grid-ci` and `small-world-ci` cover the n in
/// [400, 1000] sweep; the `-full` variants extend to n = 4000.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let base = |topology| ExperimentConfig {
        topology,
        graph_file: None,
        demand_file: None,
        sizes: (400..=1000).step_by(100).collect(),
        k_ratios: vec![0.005, 0.010, 0.015],
        instances_per_cell: 5,
        demand: DemandTemplate::default(),
        dlm: DlmSettings::default(),
        algorithms: vec![AlgorithmKind::Dlm, AlgorithmKind::Greedy],
        master_seed: 20240001,
        output_path: None,
        small_world_degree: default_sw_degree(),
        small_world_rewire: default_sw_rewire(),
    };
    match name {
        "grid-ci" => Some(base(TopologyKind::Grid)),
        "small-world-ci" => Some(base(TopologyKind::SmallWorld)),
        "grid-full" => {
            let mut c = base(TopologyKind::Grid);
            c.sizes = (400..=4000).step_by(400).collect();
            Some(c)
        }
        "small-world-full" => {
            let mut c = base(TopologyKind::SmallWorld);
            c.sizes = (400..=4000).step_by(400).collect();
            Some(c)
        }
        _ => None,
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &["grid-ci", "small-world-ci", "grid-full", "small-world-full"]
}
