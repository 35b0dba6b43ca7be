//! Weighted undirected graphs with per-node demand, shortest-path machinery,
//! the serving-cost objective, and the exact per-region cost center.
//!
//! Distances are additive along paths. A node's distance to itself is its
//! `self_cost` (not zero) wherever serving cost is evaluated, so hosting a
//! site at `v` can carry a local cost even though no self-edge exists.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Dense node identifier in `0..n`.
pub type NodeId = usize;

/// Undirected weighted graph with per-node demand and self-cost.
///
/// Immutable once handed to the algorithms; construction validates every
/// invariant (symmetry by construction, strictly positive edge distances,
/// finite non-negative demands and self-costs).
#[derive(Debug, Clone)]
pub struct Graph {
    adjacency: Vec<Vec<(NodeId, f64)>>,
    demand: Vec<f64>,
    self_cost: Vec<f64>,
    edge_count: usize,
}

impl Graph {
    /// Create a graph with `node_count` nodes, no edges, demand 1 and
    /// self-cost 0 everywhere.
    pub fn new(node_count: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidArgument("graph needs at least one node".into()));
        }
        Ok(Graph {
            adjacency: vec![Vec::new(); node_count],
            demand: vec![1.0; node_count],
            self_cost: vec![0.0; node_count],
            edge_count: 0,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Add the undirected edge `(u, v)` with a strictly positive distance.
    /// Zero-distance edges are rejected: the partitioning algorithm's
    /// tie resolution needs strict ordering along paths. Duplicate and
    /// self-loop edges are rejected.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, distance: f64) -> Result<()> {
        let n = self.node_count();
        if u >= n || v >= n {
            return Err(Error::InvalidArgument(format!(
                "edge ({u}, {v}) out of range for {n} nodes"
            )));
        }
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop at node {u}")));
        }
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "edge ({u}, {v}) distance must be finite and > 0, got {distance}"
            )));
        }
        if self.neighbor_distance(u, v).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate edge ({u}, {v})")));
        }
        // Adjacency lists stay sorted by neighbor id so iteration order is
        // deterministic everywhere.
        let pos = self.adjacency[u].partition_point(|&(w, _)| w < v);
        self.adjacency[u].insert(pos, (v, distance));
        let pos = self.adjacency[v].partition_point(|&(w, _)| w < u);
        self.adjacency[v].insert(pos, (u, distance));
        self.edge_count += 1;
        Ok(())
    }

    pub fn set_demand(&mut self, v: NodeId, demand: f64) -> Result<()> {
        self.check_node(v)?;
        if !(demand.is_finite() && demand >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "demand at node {v} must be finite and >= 0, got {demand}"
            )));
        }
        self.demand[v] = demand;
        Ok(())
    }

    pub fn set_demands(&mut self, demands: &[f64]) -> Result<()> {
        if demands.len() != self.node_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} demands, got {}",
                self.node_count(),
                demands.len()
            )));
        }
        for (v, &w) in demands.iter().enumerate() {
            self.set_demand(v, w)?;
        }
        Ok(())
    }

    pub fn set_self_cost(&mut self, v: NodeId, cost: f64) -> Result<()> {
        self.check_node(v)?;
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "self-cost at node {v} must be finite and >= 0, got {cost}"
            )));
        }
        self.self_cost[v] = cost;
        Ok(())
    }

    pub fn demand(&self, v: NodeId) -> f64 {
        self.demand[v]
    }

    pub fn demands(&self) -> &[f64] {
        &self.demand
    }

    pub fn self_cost(&self, v: NodeId) -> f64 {
        self.self_cost[v]
    }

    pub fn self_costs(&self) -> &[f64] {
        &self.self_cost
    }

    /// Neighbors of `v` with edge distances, ascending by neighbor id.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[v]
    }

    /// Edge distance of `(u, v)` if the edge exists.
    pub fn neighbor_distance(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.adjacency
            .get(u)?
            .binary_search_by(|&(w, _)| w.cmp(&v))
            .ok()
            .map(|i| self.adjacency[u][i].1)
    }

    /// All edges as `(u, v, distance)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId, f64)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for &(v, d) in nbrs {
                if u < v {
                    out.push((u, v, d));
                }
            }
        }
        out
    }

    /// True when every node can reach every other node.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if v >= self.node_count() {
            return Err(Error::InvalidArgument(format!(
                "node {v} out of range for {} nodes",
                self.node_count()
            )));
        }
        Ok(())
    }
}

/// An ordered set of `k` distinct site nodes.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Placement {
    sites: Vec<NodeId>,
}

impl Placement {
    /// Validate `1 <= k < node_count`, distinct, in-range.
    pub fn new(sites: Vec<NodeId>, node_count: usize) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("placement needs at least one site".into()));
        }
        if sites.len() >= node_count {
            return Err(Error::InvalidArgument(format!(
                "placement of {} sites needs k < n = {node_count}",
                sites.len()
            )));
        }
        let mut seen = vec![false; node_count];
        for &s in &sites {
            if s >= node_count {
                return Err(Error::InvalidArgument(format!(
                    "site {s} out of range for {node_count} nodes"
                )));
            }
            if seen[s] {
                return Err(Error::InvalidArgument(format!("duplicate site {s}")));
            }
            seen[s] = true;
        }
        Ok(Placement { sites })
    }

    pub fn sites(&self) -> &[NodeId] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Single-source shortest-path distances with predecessor pointers.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub source: NodeId,
    /// Minimum additive path distance per node; infinite when unreachable.
    pub dist: Vec<f64>,
    /// Predecessor on a shortest path; among equal-distance predecessors the
    /// lowest node id wins. `None` for the source and unreachable nodes.
    pub parent: Vec<Option<NodeId>>,
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: NodeId,
}

impl Eq for HeapEntry {}

// Reversed so BinaryHeap pops the minimum; node id breaks distance ties.
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `source`. Parent ties resolve to the lowest predecessor id.
pub fn shortest_distances(graph: &Graph, source: NodeId) -> Result<DistanceField> {
    let n = graph.node_count();
    if source >= n {
        return Err(Error::InvalidArgument(format!(
            "source {source} out of range for {n} nodes"
        )));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: source });

    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        for &(v, len) in graph.neighbors(u) {
            let cand = d + len;
            if cand < dist[v] {
                dist[v] = cand;
                parent[v] = Some(u);
                heap.push(HeapEntry { dist: cand, node: v });
            } else if cand == dist[v] && !settled[v] {
                // Equal-distance predecessor: keep the lowest id.
                if parent[v].is_none_or(|p| u < p) {
                    parent[v] = Some(u);
                }
            }
        }
    }
    Ok(DistanceField { source, dist, parent })
}

/// Serving distance of `site` seen from `node`: the self-cost when they
/// coincide, otherwise a precomputed path distance.
#[inline]
pub(crate) fn serving_distance(site: NodeId, node: NodeId, path_dist: f64, self_cost: f64) -> f64 {
    if site == node {
        self_cost
    } else {
        path_dist
    }
}

/// Map every node to its nearest site, lowest site id on ties.
pub fn serving_assignment(graph: &Graph, placement: &Placement) -> Result<Vec<NodeId>> {
    let fields = site_distance_fields(graph, placement)?;
    let n = graph.node_count();
    let mut assignment = Vec::with_capacity(n);
    for v in 0..n {
        let mut best_site = None;
        let mut best = f64::INFINITY;
        for (i, &s) in placement.sites().iter().enumerate() {
            let d = serving_distance(s, v, fields[i].dist[v], graph.self_cost(v));
            if d < best || (d == best && best_site.is_none_or(|b| s < b)) {
                best = d;
                best_site = Some(s);
            }
        }
        match best_site {
            Some(s) if best.is_finite() => assignment.push(s),
            _ => return Err(Error::UnreachableDemand { node: v }),
        }
    }
    Ok(assignment)
}

/// Total demand-weighted serving cost of `placement`: every node is served by
/// its nearest site, a site's own demand at its self-cost.
pub fn placement_cost(graph: &Graph, placement: &Placement) -> Result<f64> {
    let fields = site_distance_fields(graph, placement)?;
    let rows: Vec<&[f64]> = fields.iter().map(|f| f.dist.as_slice()).collect();
    weighted_serving_cost(
        placement.sites(),
        &rows,
        graph.demands(),
        graph.self_costs(),
    )
}

/// Shared cost evaluator: `rows[i]` holds path distances from `sites[i]`.
/// Every algorithm reports costs through this one routine so cross-algorithm
/// comparisons are bit-for-bit consistent.
pub(crate) fn weighted_serving_cost(
    sites: &[NodeId],
    rows: &[&[f64]],
    demands: &[f64],
    self_costs: &[f64],
) -> Result<f64> {
    let n = demands.len();
    let mut total = 0.0;
    for v in 0..n {
        let mut best = f64::INFINITY;
        for (i, &s) in sites.iter().enumerate() {
            let d = serving_distance(s, v, rows[i][v], self_costs[v]);
            if d < best {
                best = d;
            }
        }
        if !best.is_finite() {
            return Err(Error::UnreachableDemand { node: v });
        }
        total += demands[v] * best;
    }
    Ok(total)
}

fn site_distance_fields(graph: &Graph, placement: &Placement) -> Result<Vec<DistanceField>> {
    if placement.len() >= graph.node_count() {
        return Err(Error::InvalidArgument(
            "placement does not fit this graph".into(),
        ));
    }
    placement
        .sites()
        .iter()
        .map(|&s| shortest_distances(graph, s))
        .collect()
}

/// A region of the graph with a local id space, used for induced-subgraph
/// distance work.
pub(crate) struct InducedSubgraph {
    /// Local index -> global node id, ascending.
    pub nodes: Vec<NodeId>,
    /// Adjacency restricted to the region, local indices.
    pub adjacency: Vec<Vec<(usize, f64)>>,
}

impl InducedSubgraph {
    pub fn build(graph: &Graph, region: &[NodeId]) -> Result<Self> {
        if region.is_empty() {
            return Err(Error::InvalidArgument("region must be non-empty".into()));
        }
        let mut nodes: Vec<NodeId> = region.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.len() != region.len() {
            return Err(Error::InvalidArgument("region contains duplicate nodes".into()));
        }
        let n = graph.node_count();
        let mut local = vec![usize::MAX; n];
        for (i, &v) in nodes.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidArgument(format!(
                    "region node {v} out of range for {n} nodes"
                )));
            }
            local[v] = i;
        }
        let adjacency = nodes
            .iter()
            .map(|&v| {
                graph
                    .neighbors(v)
                    .iter()
                    .filter(|&&(u, _)| local[u] != usize::MAX)
                    .map(|&(u, d)| (local[u], d))
                    .collect()
            })
            .collect();
        Ok(InducedSubgraph { nodes, adjacency })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Dijkstra within the region, local indices.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut settled = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapEntry { dist: 0.0, node: source });
        while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
            if settled[u] {
                continue;
            }
            settled[u] = true;
            for &(v, len) in &self.adjacency[u] {
                let cand = d + len;
                if cand < dist[v] {
                    dist[v] = cand;
                    heap.push(HeapEntry { dist: cand, node: v });
                }
            }
        }
        dist
    }
}

/// Exact cost center of a region: the region node minimizing the
/// demand-weighted serving cost of the region, with distances measured in
/// the region's induced subgraph. Ties break to the lowest node id.
///
/// This is the reference the linear-time tree pass is validated against.
pub fn cost_center_exact(graph: &Graph, region: &[NodeId]) -> Result<NodeId> {
    let sub = InducedSubgraph::build(graph, region)?;
    if !sub.is_connected() {
        return Err(Error::Disconnected(format!(
            "region of {} nodes induces a disconnected subgraph",
            sub.len()
        )));
    }
    let mut best: Option<(f64, NodeId)> = None;
    for s in 0..sub.len() {
        let dist = sub.distances_from(s);
        let mut cost = 0.0;
        for (v, &global) in sub.nodes.iter().enumerate() {
            let d = if v == s { graph.self_cost(global) } else { dist[v] };
            cost += graph.demand(global) * d;
        }
        let id = sub.nodes[s];
        if best.is_none_or(|(bc, bid)| cost < bc || (cost == bc && id < bid)) {
            best = Some((cost, id));
        }
    }
    Ok(best.expect("non-empty region").1)
}

/// Unit-distance path on n nodes, used throughout the test suites.
#[cfg(test)]
pub(crate) fn path_graph(n: usize) -> Graph {
    let mut g = Graph::new(n).unwrap();
    for i in 0..n - 1 {
        g.add_edge(i, i + 1, 1.0).unwrap();
    }
    g
}
