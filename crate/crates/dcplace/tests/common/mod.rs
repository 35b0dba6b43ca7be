//! Shared oracles and instance builders for the integration suites.
//!
//! The oracles reimplement results from first principles (Floyd-Warshall
//! all-pairs distances, direct tree sums, subset enumeration) instead of
//! calling back into the code under test, so agreement between the two is
//! evidence rather than tautology.

#![allow(dead_code)]

use dcplace::graph::{Graph, NodeId};
use dcplace::region_tree::RootedRegionTree;
use rand::seq::SliceRandom;
use rand::Rng;

/// All-pairs shortest distances by Floyd-Warshall.
pub fn all_pairs(graph: &Graph) -> Vec<Vec<f64>> {
    let n = graph.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
        for &(u, len) in graph.neighbors(v) {
            row[u] = len;
        }
    }
    for mid in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][mid] + d[mid][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Weighted serving cost of `sites` from the all-pairs matrix: every node is
/// served at the smallest serving distance over the sites, where a site
/// serves its own node at that node's self-cost.
pub fn cost_oracle(graph: &Graph, dist: &[Vec<f64>], sites: &[NodeId]) -> f64 {
    (0..graph.node_count())
        .map(|v| {
            let best = sites
                .iter()
                .map(|&s| if s == v { graph.self_cost(v) } else { dist[s][v] })
                .fold(f64::INFINITY, f64::min);
            graph.demand(v) * best
        })
        .sum()
}

fn k_subsets(n: usize, k: usize, visit: &mut impl FnMut(&[NodeId])) {
    fn recurse(n: usize, k: usize, start: usize, acc: &mut Vec<NodeId>, visit: &mut impl FnMut(&[NodeId])) {
        if acc.len() == k {
            visit(acc);
            return;
        }
        let remaining = k - acc.len();
        for v in start..=(n - remaining) {
            acc.push(v);
            recurse(n, k, v + 1, acc, visit);
            acc.pop();
        }
    }
    let mut acc = Vec::with_capacity(k);
    recurse(n, k, 0, &mut acc, visit);
}

/// Exact k-median by scanning every k-subset; the lexicographically smallest
/// site set among exact cost ties.
pub fn brute_oracle(graph: &Graph, dist: &[Vec<f64>], k: usize) -> (Vec<NodeId>, f64) {
    let mut best: Option<(Vec<NodeId>, f64)> = None;
    k_subsets(graph.node_count(), k, &mut |sites| {
        let cost = cost_oracle(graph, dist, sites);
        // Subsets arrive in lexicographic order, so strict improvement keeps
        // the lexicographically smallest among ties.
        if best.as_ref().is_none_or(|&(_, c)| cost < c) {
            best = Some((sites.to_vec(), cost));
        }
    });
    best.expect("1 <= k <= n")
}

/// Greedy forward selection from the all-pairs matrix: each round adds the
/// site giving the cheapest total, lowest id among exact ties. Returns sites
/// in selection order with the cost after each addition.
pub fn greedy_oracle(graph: &Graph, dist: &[Vec<f64>], k: usize) -> (Vec<NodeId>, Vec<f64>) {
    let n = graph.node_count();
    let mut chosen: Vec<NodeId> = Vec::new();
    let mut costs = Vec::new();
    for _ in 0..k {
        let mut best: Option<(NodeId, f64)> = None;
        for cand in 0..n {
            if chosen.contains(&cand) {
                continue;
            }
            chosen.push(cand);
            let cost = cost_oracle(graph, dist, &chosen);
            chosen.pop();
            if best.is_none_or(|(_, c)| cost < c) {
                best = Some((cand, cost));
            }
        }
        let (site, cost) = best.expect("k < n leaves a candidate");
        chosen.push(site);
        costs.push(cost);
    }
    (chosen, costs)
}

/// Serving cost of the whole tree from every node, each by its own distance
/// sweep over the tree edges (indexed by local tree node).
pub fn tree_costs_direct(tree: &RootedRegionTree) -> Vec<f64> {
    let n = tree.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(p) = tree.parent(v) {
            let d = tree.dist_to_parent(v);
            adj[v].push((p, d));
            adj[p].push((v, d));
        }
    }
    (0..n)
        .map(|r| {
            let mut dist = vec![f64::INFINITY; n];
            dist[r] = 0.0;
            let mut stack = vec![r];
            while let Some(v) = stack.pop() {
                for &(u, d) in &adj[v] {
                    if dist[u].is_infinite() {
                        dist[u] = dist[v] + d;
                        stack.push(u);
                    }
                }
            }
            (0..n)
                .map(|v| {
                    if v == r {
                        tree.demand(r) * tree.self_cost(r)
                    } else {
                        tree.demand(v) * dist[v]
                    }
                })
                .sum()
        })
        .collect()
}

/// Index of the smallest value, first among exact ties.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Nearest-generator region assignment implemented directly from the
/// all-pairs matrix: unique nearest generator wins; an equidistant node
/// inherits the region of its lowest-id neighbor lying on a shortest path
/// toward some nearest generator. Nodes are decided in nondecreasing
/// distance order, so that neighbor is always already decided.
pub fn partition_oracle(graph: &Graph, dist: &[Vec<f64>], sites: &[NodeId]) -> Vec<usize> {
    let n = graph.node_count();
    let nearest: Vec<f64> = (0..n)
        .map(|v| sites.iter().map(|&s| dist[s][v]).fold(f64::INFINITY, f64::min))
        .collect();
    let mut region = vec![usize::MAX; n];
    for (i, &s) in sites.iter().enumerate() {
        region[s] = i;
    }
    let mut order: Vec<NodeId> = (0..n).filter(|&v| region[v] == usize::MAX).collect();
    order.sort_by(|&a, &b| {
        nearest[a].partial_cmp(&nearest[b]).expect("finite distances").then(a.cmp(&b))
    });
    for &v in &order {
        let tied = sites.iter().filter(|&&s| dist[s][v] == nearest[v]).count();
        if tied == 1 {
            let (i, _) = sites
                .iter()
                .enumerate()
                .find(|&(_, &s)| dist[s][v] == nearest[v])
                .expect("a nearest generator exists");
            region[v] = i;
        } else {
            let (u, _) = graph
                .neighbors(v)
                .iter()
                .copied()
                .find(|&(u, len)| nearest[u] + len == nearest[v])
                .expect("an equidistant node has a shortest-path neighbor");
            region[v] = region[u];
        }
    }
    region
}

/// Minimum spanning weight over a region plus the lexicographically smallest
/// minimum tree's edge set, found by scanning every (|region| - 1)-subset of
/// the induced edges. Only viable for tiny regions.
pub fn mst_by_enumeration(graph: &Graph, region: &[NodeId]) -> (f64, Vec<(NodeId, NodeId)>) {
    let in_region = {
        let mut flags = vec![false; graph.node_count()];
        for &v in region {
            flags[v] = true;
        }
        flags
    };
    let edges: Vec<(NodeId, NodeId, f64)> = graph
        .edges()
        .into_iter()
        .filter(|&(u, v, _)| in_region[u] && in_region[v])
        .collect();
    let local: std::collections::HashMap<NodeId, usize> =
        region.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = region.len();
    assert!((1..=8).contains(&n), "enumeration oracle is for tiny regions");

    let mut best: Option<(f64, Vec<(NodeId, NodeId)>)> = None;
    let mut pick = Vec::with_capacity(n - 1);
    k_subsets(edges.len(), n.saturating_sub(1), &mut |idx| {
        // Spanning check via union-find over local indices.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        let mut merged = 0;
        let mut weight = 0.0;
        pick.clear();
        for &i in idx {
            let (u, v, w) = edges[i];
            let (lu, lv) = (local[&u], local[&v]);
            let (ru, rv) = (find(&mut parent, lu), find(&mut parent, lv));
            if ru != rv {
                parent[ru] = rv;
                merged += 1;
            }
            weight += w;
            pick.push((u.min(v), u.max(v)));
        }
        if merged != n - 1 {
            return;
        }
        pick.sort_unstable();
        let better = match &best {
            None => true,
            Some((bw, bset)) => weight < *bw || (weight == *bw && pick < *bset),
        };
        if better {
            best = Some((weight, pick.clone()));
        }
    });
    best.expect("region spans a connected subgraph")
}

/// Random tree on `n` nodes with shuffled labels, continuous distances and
/// demands, and optionally nonzero self-costs.
pub fn random_tree_graph(rng: &mut impl Rng, n: usize, with_self_costs: bool) -> Graph {
    let mut g = Graph::new(n).expect("n >= 1");
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        g.add_edge(label[i], label[j], rng.gen_range(0.1..10.0)).expect("fresh tree edge");
    }
    for v in 0..n {
        g.set_demand(v, rng.gen_range(0.1..5.0)).expect("positive demand");
        if with_self_costs {
            g.set_self_cost(v, rng.gen_range(0.0..3.0)).expect("non-negative self-cost");
        }
    }
    g
}

/// Random connected graph: a shuffled-label spanning tree plus up to
/// `extra_edges` additional random edges. Integer distances keep every path
/// sum exact in floating point, which makes tie detection exact too.
pub fn random_connected_graph(
    rng: &mut impl Rng,
    n: usize,
    extra_edges: usize,
    integer_distances: bool,
) -> Graph {
    let mut g = Graph::new(n).expect("n >= 1");
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let d = edge_distance(rng, integer_distances);
        g.add_edge(label[i], label[j], d).expect("fresh tree edge");
    }
    let mut added = 0;
    let mut attempts = 0;
    while added < extra_edges && attempts < 20 * extra_edges + 50 {
        attempts += 1;
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && g.neighbor_distance(u, v).is_none() {
            let d = edge_distance(rng, integer_distances);
            g.add_edge(u, v, d).expect("checked for duplicates");
            added += 1;
        }
    }
    for v in 0..n {
        g.set_demand(v, rng.gen_range(0.1..5.0)).expect("positive demand");
    }
    g
}

/// Whether `region` induces a connected subgraph, by search restricted to
/// region members.
pub fn region_is_connected(graph: &Graph, region: &[NodeId]) -> bool {
    if region.is_empty() {
        return false;
    }
    let mut member = vec![false; graph.node_count()];
    for &v in region {
        member[v] = true;
    }
    let mut seen = vec![false; graph.node_count()];
    let mut stack = vec![region[0]];
    seen[region[0]] = true;
    let mut count = 0;
    while let Some(v) = stack.pop() {
        count += 1;
        for &(u, _) in graph.neighbors(v) {
            if member[u] && !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    count == region.len()
}

fn edge_distance(rng: &mut impl Rng, integer: bool) -> f64 {
    if integer {
        rng.gen_range(1..=9) as f64
    } else {
        rng.gen_range(0.5..8.0)
    }
}

/// `k` distinct random node ids, ascending.
pub fn random_sites(rng: &mut impl Rng, n: usize, k: usize) -> Vec<NodeId> {
    let mut sites = rand::seq::index::sample(rng, n, k).into_vec();
    sites.sort_unstable();
    sites
}
