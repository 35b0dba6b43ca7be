//! Graph Voronoi partitioning driven by generator broadcasts.
//!
//! Every generator floods the graph; every other node joins the region of a
//! nearest generator, resolving ties through a neighbor that already
//! settled. The inheritance step makes each region's induced subgraph
//! connected, which the spanning-tree stage depends on.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{cost_center_exact, shortest_distances, Graph, NodeId, Placement};
use crate::netsim::{first_arrival_broadcast, SimStats};
use crate::seeding::derive_seed;

/// How a node equidistant from several regions picks among the candidate
/// neighbors it could inherit a region from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieMode {
    /// Deterministic: lowest-id candidate neighbor.
    LowestId,
    /// Uniform among candidates, from a stream derived per node off the
    /// given seed. Deterministic for a fixed seed.
    SeededUniform(u64),
}

/// A complete assignment of nodes to generator regions.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    region_of: Vec<usize>,
    generators: Placement,
    nearest_dist: Vec<f64>,
    region_parent: Vec<Option<NodeId>>,
}

impl Partition {
    /// Region index of `v` in `0..k`.
    pub fn region_of(&self, v: NodeId) -> usize {
        self.region_of[v]
    }

    pub fn generators(&self) -> &Placement {
        &self.generators
    }

    pub fn k(&self) -> usize {
        self.generators.len()
    }

    /// Distance from `v` to its nearest generator.
    pub fn nearest_dist(&self, v: NodeId) -> f64 {
        self.nearest_dist[v]
    }

    pub fn nearest_dists(&self) -> &[f64] {
        &self.nearest_dist
    }

    /// Neighbor `v` inherited its region from; `None` for generators.
    pub fn region_parent(&self, v: NodeId) -> Option<NodeId> {
        self.region_parent[v]
    }

    pub fn node_count(&self) -> usize {
        self.region_of.len()
    }

    /// Member nodes of every region, ascending within each region.
    pub fn regions(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.k()];
        for (v, &r) in self.region_of.iter().enumerate() {
            out[r].push(v);
        }
        out
    }
}

/// Builds the Voronoi partition for `generators`, resolving equidistant
/// nodes per `tie_mode`, and reports the broadcast message statistics.
///
/// Nodes are settled in nondecreasing distance-to-nearest-generator order,
/// so the neighbor a tied node inherits from is always already settled.
pub fn voronoi_partition_with_stats(
    graph: &Graph,
    generators: &Placement,
    tie_mode: TieMode,
) -> Result<(Partition, SimStats)> {
    let n = graph.node_count();
    let sites = generators.sites();
    let (records, stats) = first_arrival_broadcast(graph, sites)?;

    let mut region_idx = vec![usize::MAX; n];
    for (i, &s) in sites.iter().enumerate() {
        region_idx[s] = i;
    }

    const UNSET: usize = usize::MAX;
    let mut region_of = vec![UNSET; n];
    let mut region_parent: Vec<Option<NodeId>> = vec![None; n];
    for &s in sites {
        region_of[s] = region_idx[s];
    }

    let mut order: Vec<NodeId> = (0..n).filter(|&v| region_idx[v] == UNSET).collect();
    order.sort_by(|&a, &b| {
        records[a]
            .nearest_dist
            .partial_cmp(&records[b].nearest_dist)
            .expect("broadcast distances are finite")
            .then(a.cmp(&b))
    });

    for &v in &order {
        let rec = &records[v];
        if rec.tied_sources.len() == 1 {
            let parent = rec.arrival_parent.expect("non-generator has an arrival parent");
            let region = region_idx[rec.tied_sources[0]];
            debug_assert_eq!(region_of[parent], region);
            region_of[v] = region;
            region_parent[v] = Some(parent);
            continue;
        }
        // Equidistant from several generators: inherit from a neighbor that
        // sits on a shortest path toward one of them. Such neighbors are
        // strictly closer, hence already settled.
        let candidates: Vec<NodeId> = graph
            .neighbors(v)
            .iter()
            .filter(|&&(u, len)| {
                records[u].nearest_dist + len == rec.nearest_dist && region_of[u] != UNSET
            })
            .map(|&(u, _)| u)
            .collect();
        if candidates.is_empty() {
            return Err(Error::Protocol(format!(
                "tie resolution found no settled neighbor for node {v}"
            )));
        }
        let u = match tie_mode {
            TieMode::LowestId => candidates[0],
            TieMode::SeededUniform(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[v as u64]));
                candidates[rng.gen_range(0..candidates.len())]
            }
        };
        region_of[v] = region_of[u];
        region_parent[v] = Some(u);
    }

    let nearest_dist = records.iter().map(|r| r.nearest_dist).collect();
    let partition = Partition {
        region_of,
        generators: generators.clone(),
        nearest_dist,
        region_parent,
    };
    Ok((partition, stats))
}

/// [`voronoi_partition_with_stats`] without the message statistics.
pub fn voronoi_partition(
    graph: &Graph,
    generators: &Placement,
    tie_mode: TieMode,
) -> Result<Partition> {
    voronoi_partition_with_stats(graph, generators, tie_mode).map(|(p, _)| p)
}

/// True when every region's exact cost center is its own generator, i.e.
/// recentering would not move any site.
pub fn is_centroidal(graph: &Graph, generators: &Placement, tie_mode: TieMode) -> Result<bool> {
    let partition = voronoi_partition(graph, generators, tie_mode)?;
    for (i, region) in partition.regions().iter().enumerate() {
        if cost_center_exact(graph, region)? != generators.sites()[i] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks every structural invariant of a partition against its graph:
/// region indices in range, generators in their own regions, parent links
/// neighboring/strictly closer/region-consistent, and nearest distances
/// matching per-generator shortest-path recomputation.
pub fn validate_partition(graph: &Graph, partition: &Partition) -> Result<()> {
    let n = graph.node_count();
    if partition.node_count() != n {
        return Err(Error::InvalidArgument(format!(
            "partition covers {} nodes, graph has {n}",
            partition.node_count()
        )));
    }
    let sites = partition.generators().sites();
    let k = sites.len();
    for (i, &s) in sites.iter().enumerate() {
        if partition.region_of(s) != i {
            return Err(Error::InvalidArgument(format!(
                "generator {s} is not in its own region {i}"
            )));
        }
        if partition.region_parent(s).is_some() {
            return Err(Error::InvalidArgument(format!("generator {s} has a region parent")));
        }
    }
    let mut is_site = vec![false; n];
    for &s in sites {
        is_site[s] = true;
    }
    for (v, &v_is_site) in is_site.iter().enumerate() {
        let r = partition.region_of(v);
        if r >= k {
            return Err(Error::InvalidArgument(format!("node {v} has region index {r} >= {k}")));
        }
        if v_is_site {
            continue;
        }
        let Some(p) = partition.region_parent(v) else {
            return Err(Error::InvalidArgument(format!("non-generator {v} has no region parent")));
        };
        if graph.neighbor_distance(v, p).is_none() {
            return Err(Error::InvalidArgument(format!(
                "region parent {p} of node {v} is not a neighbor"
            )));
        }
        if partition.nearest_dist(p) >= partition.nearest_dist(v) {
            return Err(Error::InvalidArgument(format!(
                "region parent {p} of node {v} is not strictly closer to the generators"
            )));
        }
        if partition.region_of(p) != r {
            return Err(Error::InvalidArgument(format!(
                "node {v} (region {r}) inherits from {p} in region {}",
                partition.region_of(p)
            )));
        }
    }
    // Distance field check: nearest_dist must be the true minimum over
    // generators.
    let mut truth = vec![f64::INFINITY; n];
    for &s in sites {
        let field = shortest_distances(graph, s)?;
        for (t, &d) in truth.iter_mut().zip(&field.dist) {
            *t = t.min(d);
        }
    }
    for (v, &t) in truth.iter().enumerate() {
        if partition.nearest_dist(v) != t {
            return Err(Error::InvalidArgument(format!(
                "node {v} nearest_dist {} != recomputed {t}",
                partition.nearest_dist(v)
            )));
        }
    }
    Ok(())
}
