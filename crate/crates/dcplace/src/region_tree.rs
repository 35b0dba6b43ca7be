//! Spanning trees for regions: minimum spanning trees over a region's
//! induced subgraph and the rooted parent/children structure the cost passes
//! walk. Two tie rules are offered for graphs where many spanning trees
//! share the minimum weight (all trees of a unit-distance region do):
//! a lexicographic one and a seeded one. The seeded rule matters for the
//! placement loop; a fixed tie rule shapes every region's tree the same way,
//! which systematically skews where tree cost centers land, while seeded
//! draws turn that bias into noise the loop can average out.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

struct Dsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

fn check_region(graph: &Graph, region: &[NodeId]) -> Result<()> {
    if region.is_empty() {
        return Err(Error::InvalidArgument("region is empty".into()));
    }
    let n = graph.node_count();
    let mut seen = vec![false; n];
    for &v in region {
        if v >= n {
            return Err(Error::InvalidArgument(format!(
                "region node {v} out of range for {n} nodes"
            )));
        }
        if seen[v] {
            return Err(Error::InvalidArgument(format!("duplicate region node {v}")));
        }
        seen[v] = true;
    }
    Ok(())
}

fn induced_edges(graph: &Graph, region: &[NodeId], local: &[usize]) -> Vec<(NodeId, NodeId, f64)> {
    let mut edges = Vec::new();
    for &v in region {
        for &(u, d) in graph.neighbors(v) {
            if v < u && local[u] != usize::MAX {
                edges.push((v, u, d));
            }
        }
    }
    edges
}

fn kruskal(
    region_len: usize,
    local: &[usize],
    edges: Vec<(NodeId, NodeId, f64)>,
) -> Result<Vec<(NodeId, NodeId, f64)>> {
    let mut dsu = Dsu::new(region_len);
    let mut tree = Vec::with_capacity(region_len.saturating_sub(1));
    for (u, v, d) in edges {
        if dsu.union(local[u], local[v]) {
            tree.push((u, v, d));
            if tree.len() + 1 == region_len {
                break;
            }
        }
    }
    if tree.len() + 1 != region_len {
        return Err(Error::Disconnected(format!(
            "induced subgraph on {region_len} region nodes is not connected"
        )));
    }
    tree.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(tree)
}

fn local_index(graph: &Graph, region: &[NodeId]) -> Vec<usize> {
    let mut local = vec![usize::MAX; graph.node_count()];
    for (i, &v) in region.iter().enumerate() {
        local[v] = i;
    }
    local
}

/// Minimum spanning tree of the region's induced subgraph, as `(u, v, dist)`
/// edges with `u < v`, sorted. Equal-distance edges are taken in
/// lexicographic `(min endpoint, max endpoint)` order, which makes the
/// result deterministic even when several spanning trees tie.
pub fn region_mst(graph: &Graph, region: &[NodeId]) -> Result<Vec<(NodeId, NodeId, f64)>> {
    check_region(graph, region)?;
    let local = local_index(graph, region);
    let mut edges = induced_edges(graph, region, &local);
    edges.sort_by(|a, b| {
        a.2.partial_cmp(&b.2)
            .expect("edge distances are finite")
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });
    kruskal(region.len(), &local, edges)
}

/// Minimum spanning tree with equal-distance ties resolved by a seeded
/// shuffle: among edges of the same distance, order is a deterministic
/// function of `seed` rather than of node ids. On a unit-distance region
/// this draws a seeded random spanning tree.
pub fn region_mst_seeded(
    graph: &Graph,
    region: &[NodeId],
    seed: u64,
) -> Result<Vec<(NodeId, NodeId, f64)>> {
    check_region(graph, region)?;
    let local = local_index(graph, region);
    let mut edges = induced_edges(graph, region, &local);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    edges.shuffle(&mut rng);
    // Stable sort keeps the shuffled order within each distance class.
    edges.sort_by(|a, b| a.2.partial_cmp(&b.2).expect("edge distances are finite"));
    kruskal(region.len(), &local, edges)
}

/// A region's spanning tree rooted at one of its nodes. Nodes are addressed
/// by local index into `region_nodes` (ascending global ids); demands, self
/// costs, and edge distances are copied out of the source graph so the tree
/// is self-contained.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedRegionTree {
    region_nodes: Vec<NodeId>,
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    dist_to_parent: Vec<f64>,
    demand: Vec<f64>,
    self_cost: Vec<f64>,
}

impl RootedRegionTree {
    pub fn len(&self) -> usize {
        self.region_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.region_nodes.is_empty()
    }

    /// Region nodes in ascending global id order; local index `i` refers to
    /// `region_nodes()[i]`.
    pub fn region_nodes(&self) -> &[NodeId] {
        &self.region_nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn root_id(&self) -> NodeId {
        self.region_nodes[self.root]
    }

    pub fn global_id(&self, local: usize) -> NodeId {
        self.region_nodes[local]
    }

    pub fn local_index(&self, global: NodeId) -> Option<usize> {
        self.region_nodes.binary_search(&global).ok()
    }

    pub fn parent(&self, local: usize) -> Option<usize> {
        self.parent[local]
    }

    pub fn children(&self, local: usize) -> &[usize] {
        &self.children[local]
    }

    /// Distance of the edge to the parent; 0 for the root.
    pub fn dist_to_parent(&self, local: usize) -> f64 {
        self.dist_to_parent[local]
    }

    pub fn demand(&self, local: usize) -> f64 {
        self.demand[local]
    }

    pub fn self_cost(&self, local: usize) -> f64 {
        self.self_cost[local]
    }

    /// Local indices in breadth-first order from the root, so every node
    /// appears after its parent.
    pub fn top_down_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        order.push(self.root);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            order.extend_from_slice(&self.children[v]);
        }
        order
    }
}

/// Roots `tree_edges` (a spanning tree of `region`, e.g. from
/// [`region_mst`]) at `root`, deriving parent/children structure by
/// traversal and copying node attributes from `graph`.
pub fn root_tree(
    tree_edges: &[(NodeId, NodeId, f64)],
    region: &[NodeId],
    root: NodeId,
    graph: &Graph,
) -> Result<RootedRegionTree> {
    check_region(graph, region)?;
    let mut region_nodes: Vec<NodeId> = region.to_vec();
    region_nodes.sort_unstable();
    let Ok(root_local) = region_nodes.binary_search(&root) else {
        return Err(Error::InvalidArgument(format!("root {root} is not in the region")));
    };
    let n = region_nodes.len();
    if tree_edges.len() != n - 1 {
        return Err(Error::InvalidArgument(format!(
            "{} tree edges cannot span {n} nodes",
            tree_edges.len()
        )));
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(u, v, d) in tree_edges {
        let (Ok(lu), Ok(lv)) = (region_nodes.binary_search(&u), region_nodes.binary_search(&v))
        else {
            return Err(Error::InvalidArgument(format!(
                "tree edge ({u}, {v}) leaves the region"
            )));
        };
        match graph.neighbor_distance(u, v) {
            Some(gd) if gd == d => {}
            Some(gd) => {
                return Err(Error::InvalidArgument(format!(
                    "tree edge ({u}, {v}) distance {d} does not match graph distance {gd}"
                )))
            }
            None => {
                return Err(Error::InvalidArgument(format!(
                    "tree edge ({u}, {v}) does not exist in the graph"
                )))
            }
        }
        adj[lu].push((lv, d));
        adj[lv].push((lu, d));
    }
    for a in &mut adj {
        a.sort_by_key(|x| x.0);
    }

    let mut parent = vec![None; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dist_to_parent = vec![0.0; n];
    let mut visited = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    visited[root_local] = true;
    queue.push_back(root_local);
    let mut reached = 1;
    while let Some(v) = queue.pop_front() {
        for &(u, d) in &adj[v] {
            if !visited[u] {
                visited[u] = true;
                parent[u] = Some(v);
                dist_to_parent[u] = d;
                children[v].push(u);
                queue.push_back(u);
                reached += 1;
            }
        }
    }
    if reached != n {
        return Err(Error::Disconnected(format!(
            "tree edges reach only {reached} of {n} region nodes"
        )));
    }

    let demand = region_nodes.iter().map(|&v| graph.demand(v)).collect();
    let self_cost = region_nodes.iter().map(|&v| graph.self_cost(v)).collect();
    Ok(RootedRegionTree {
        region_nodes,
        root: root_local,
        parent,
        children,
        dist_to_parent,
        demand,
        self_cost,
    })
}

/// Convenience: lexicographic-tie MST of the region, rooted at `root`.
pub fn region_tree(graph: &Graph, region: &[NodeId], root: NodeId) -> Result<RootedRegionTree> {
    let edges = region_mst(graph, region)?;
    root_tree(&edges, region, root, graph)
}

/// Convenience: seeded-tie MST of the region, rooted at `root`.
pub fn region_tree_seeded(
    graph: &Graph,
    region: &[NodeId],
    root: NodeId,
    seed: u64,
) -> Result<RootedRegionTree> {
    let edges = region_mst_seeded(graph, region, seed)?;
    root_tree(&edges, region, root, graph)
}
