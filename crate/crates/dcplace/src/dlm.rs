//! The iterative placement loop: partition the graph around the current
//! sites, recenter every region on its spanning tree, repeat until the
//! centers stop moving.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{placement_cost, shortest_distances, Graph, NodeId, Placement};
use crate::mpcost::tree_cost_center;
use crate::region_tree::region_tree_seeded;
use crate::seeding::derive_seed;
use crate::voronoi::{voronoi_partition_with_stats, Partition, TieMode};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Leading context words for the independent seed streams derived from
/// `DlmConfig::seed`.
const SEED_INIT_TREE: u64 = 0;
const SEED_INIT_DRAWS: u64 = 1;
const SEED_ITER_TREE: u64 = 2;

/// Parameters of one placement run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DlmConfig {
    /// Number of sites to place.
    pub k: usize,
    /// Stop once no center moves farther than this between iterations.
    #[serde(default)]
    pub eta: f64,
    /// Hard iteration cap.
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Seed for initialization draws.
    pub seed: u64,
    /// How equidistant nodes choose a region.
    #[serde(default = "default_tie_mode")]
    pub tie_mode: TieMode,
}

fn default_max_iter() -> usize {
    100
}

fn default_tie_mode() -> TieMode {
    TieMode::LowestId
}

impl DlmConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        DlmConfig {
            k,
            eta: 0.0,
            max_iter: default_max_iter(),
            seed,
            tie_mode: default_tie_mode(),
        }
    }

    pub fn validate(&self, node_count: usize) -> Result<()> {
        if self.k == 0 || self.k >= node_count {
            return Err(Error::InvalidArgument(format!(
                "k must satisfy 1 <= k < n, got k={}, n={node_count}",
                self.k
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eta must be finite and >= 0, got {}",
                self.eta
            )));
        }
        Ok(())
    }
}

/// One loop iteration: the placement produced, the partition it was derived
/// from, the new placement's whole-graph cost, and how far centers moved.
#[derive(Debug, Clone, PartialEq)]
pub struct DlmIteration {
    pub placement: Placement,
    pub partition: Partition,
    pub cost: f64,
    pub max_center_shift: f64,
}

/// Full record of a placement run.
#[derive(Debug, Clone, PartialEq)]
pub struct DlmTrace {
    pub iterations: Vec<DlmIteration>,
    /// Whether the loop stopped because centers settled (rather than the
    /// iteration cap).
    pub converged: bool,
    /// The cheapest placement seen across the run (the starting placement
    /// included), preferring the latest among exact cost ties; under
    /// convergence this is the fixed point.
    pub final_placement: Placement,
    /// Whole-graph cost of `final_placement`.
    pub final_cost: f64,
    /// Simulated protocol messages: partition broadcasts plus four scalars
    /// per spanning-tree edge per iteration for the two cost sweeps.
    pub messages_sent: u64,
}

impl DlmTrace {
    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }
}

/// Starting placement: the cost center of a whole-graph spanning tree plus
/// `k - 1` draws from the nodes nearest to it (a pool of `3k`, or everything
/// else when the graph is smaller).
pub fn initialize_placement(graph: &Graph, config: &DlmConfig) -> Result<Placement> {
    let n = graph.node_count();
    config.validate(n)?;
    let all: Vec<NodeId> = (0..n).collect();
    let tree = region_tree_seeded(graph, &all, 0, derive_seed(config.seed, &[SEED_INIT_TREE]))?;
    let (center, _) = tree_cost_center(&tree);
    if config.k == 1 {
        return Placement::new(vec![center], n);
    }

    let field = shortest_distances(graph, center)?;
    let mut others: Vec<NodeId> = (0..n).filter(|&v| v != center).collect();
    others.sort_by(|&a, &b| {
        field.dist[a]
            .partial_cmp(&field.dist[b])
            .expect("connected graph has finite distances")
            .then(a.cmp(&b))
    });
    others.truncate(3 * config.k);

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
        config.seed,
        &[SEED_INIT_DRAWS, n as u64, config.k as u64],
    ));
    let draws = config.k - 1;
    for i in 0..draws {
        let j = rng.gen_range(i..others.len());
        others.swap(i, j);
    }
    let mut sites = Vec::with_capacity(config.k);
    sites.push(center);
    sites.extend_from_slice(&others[..draws]);
    Placement::new(sites, n)
}

fn recenter(
    graph: &Graph,
    partition: &Partition,
    current: &Placement,
    config: &DlmConfig,
    iteration: u64,
) -> Result<(Placement, u64)> {
    let regions = partition.regions();
    let mut centers = Vec::with_capacity(regions.len());
    let mut pass_messages = 0u64;
    for (i, region) in regions.iter().enumerate() {
        let tree_seed = derive_seed(config.seed, &[SEED_ITER_TREE, iteration, i as u64]);
        let tree = region_tree_seeded(graph, region, current.sites()[i], tree_seed)?;
        let (center, _) = tree_cost_center(&tree);
        centers.push(center);
        // Each sweep exchanges two scalars per tree edge.
        pass_messages += 4 * (region.len() as u64 - 1);
    }
    Ok((Placement::new(centers, graph.node_count())?, pass_messages))
}

fn step_with_stats(
    graph: &Graph,
    placement: &Placement,
    config: &DlmConfig,
    iteration: u64,
) -> Result<(Placement, Partition, f64, u64)> {
    let (partition, stats) = voronoi_partition_with_stats(graph, placement, config.tie_mode)?;
    let (next, pass_messages) = recenter(graph, &partition, placement, config, iteration)?;
    let cost = placement_cost(graph, &next)?;
    Ok((next, partition, cost, stats.messages_sent + pass_messages))
}

/// One partition-and-recenter iteration (the first of a run: spanning-tree
/// tie draws are those of iteration zero). Returns the new placement, the
/// partition of the input placement it came from, and the new placement's
/// cost on the whole graph.
pub fn dlm_step(
    graph: &Graph,
    placement: &Placement,
    config: &DlmConfig,
) -> Result<(Placement, Partition, f64)> {
    config.validate(graph.node_count())?;
    let (next, partition, cost, _) = step_with_stats(graph, placement, config, 0)?;
    Ok((next, partition, cost))
}

/// Runs the full loop from a fresh initialization until the largest center
/// movement drops to `eta` or `max_iter` iterations have run.
pub fn run_dlm(graph: &Graph, config: &DlmConfig) -> Result<DlmTrace> {
    config.validate(graph.node_count())?;
    let init = initialize_placement(graph, config)?;
    run_dlm_from(graph, init, config)
}

/// [`run_dlm`] starting from a caller-supplied placement.
pub fn run_dlm_from(
    graph: &Graph,
    initial: Placement,
    config: &DlmConfig,
) -> Result<DlmTrace> {
    config.validate(graph.node_count())?;
    if initial.len() != config.k {
        return Err(Error::InvalidArgument(format!(
            "initial placement has {} sites, config expects {}",
            initial.len(),
            config.k
        )));
    }
    let mut best_cost = placement_cost(graph, &initial)?;
    let mut best_placement = initial.clone();
    let mut messages_sent = 0u64;
    let mut iterations = Vec::new();
    let mut converged = false;
    let mut current = initial;

    for iteration in 0..config.max_iter {
        let (next, partition, cost, msgs) =
            step_with_stats(graph, &current, config, iteration as u64)?;
        messages_sent += msgs;
        let max_center_shift = placement_shift(graph, &current, &next)?;
        if cost <= best_cost {
            best_cost = cost;
            best_placement = next.clone();
        }
        iterations.push(DlmIteration { placement: next.clone(), partition, cost, max_center_shift });
        current = next;
        if max_center_shift <= config.eta {
            converged = true;
            break;
        }
    }
    Ok(DlmTrace {
        iterations,
        converged,
        final_placement: best_placement,
        final_cost: best_cost,
        messages_sent,
    })
}

/// Largest shortest-path distance between a region's old and new center,
/// matching sites by region index.
fn placement_shift(graph: &Graph, before: &Placement, after: &Placement) -> Result<f64> {
    let mut max_shift = 0.0f64;
    for (&old, &new) in before.sites().iter().zip(after.sites()) {
        if old == new {
            continue;
        }
        let field = shortest_distances(graph, old)?;
        let d = field.dist[new];
        if !d.is_finite() {
            return Err(Error::Disconnected(format!(
                "no path between successive centers {old} and {new}"
            )));
        }
        max_shift = max_shift.max(d);
    }
    Ok(max_shift)
}
