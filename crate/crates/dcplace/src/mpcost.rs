//! Serving-cost computation on a rooted region tree.
//!
//! Two linear sweeps compute, for every node v, the cost of serving the
//! whole tree from v (demand-weighted tree distance sum plus the host's own
//! self-cost term). The upward sweep aggregates subtree demand masses and
//! their cost contributions toward the root; the downward sweep transforms
//! the root's cost into every other node's cost with one constant-time
//! update per edge. Both sweeps exchange exactly two scalars per tree edge,
//! and both exist in a pure form and as a message-passing protocol over the
//! simulator kernel.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::netsim::{run_protocol, Outgoing, SimStats};
use crate::region_tree::RootedRegionTree;

/// Results of the upward sweep, indexed by local tree node.
///
/// `f_up[v]` is the demand mass of v's subtree. For non-root nodes it is the
/// first scalar sent to the parent; for the root it is the total region mass
/// and is never sent. `g_up[v]` is the second scalar: the cost of serving
/// v's subtree from v's parent. `g_up[root]` is unused and stays 0.
#[derive(Debug, Clone, PartialEq)]
pub struct UpwardMessages {
    pub f_up: Vec<f64>,
    pub g_up: Vec<f64>,
}

impl UpwardMessages {
    /// Total demand mass of the region.
    pub fn total_mass(&self, tree: &RootedRegionTree) -> f64 {
        self.f_up[tree.root()]
    }
}

/// Serving cost of the whole region from every node, indexed by local tree
/// node.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    pub cost_at: Vec<f64>,
}

/// Leaf-to-root sweep. Returns the per-node subtree aggregates and the cost
/// of serving the region from the root.
pub fn upward_pass(tree: &RootedRegionTree) -> (UpwardMessages, f64) {
    let n = tree.len();
    let mut f_up = vec![0.0; n];
    let mut g_up = vec![0.0; n];
    let order = tree.top_down_order();
    for &v in order.iter().rev() {
        let mut f = tree.demand(v);
        let mut g_children = 0.0;
        for &c in tree.children(v) {
            f += f_up[c];
            g_children += g_up[c];
        }
        f_up[v] = f;
        if tree.parent(v).is_some() {
            g_up[v] = g_children + f * tree.dist_to_parent(v);
        }
    }
    let root = tree.root();
    let mut root_cost = tree.demand(root) * tree.self_cost(root);
    for &c in tree.children(root) {
        root_cost += g_up[c];
    }
    (UpwardMessages { f_up, g_up }, root_cost)
}

/// Root-to-leaf sweep. For each edge (v, child u) the parent sends the mass
/// outside u's subtree and a distance-weighted partial cost; the child
/// combines them with its own cached upward mass to obtain its serving cost.
pub fn downward_pass(
    tree: &RootedRegionTree,
    up: &UpwardMessages,
    root_cost: f64,
) -> Result<CostTable> {
    let n = tree.len();
    if up.f_up.len() != n || up.g_up.len() != n {
        return Err(Error::InvalidArgument(format!(
            "upward messages cover {} nodes but the tree has {n}",
            up.f_up.len()
        )));
    }
    let total = up.f_up[tree.root()];
    let mut cost_at = vec![0.0; n];
    cost_at[tree.root()] = root_cost;
    for v in tree.top_down_order() {
        let host_term = tree.demand(v) * tree.self_cost(v);
        for &u in tree.children(v) {
            let d = tree.dist_to_parent(u);
            let f_down = total - up.f_up[u];
            let h = cost_at[v] + f_down * d - host_term;
            cost_at[u] = h - up.f_up[u] * d + tree.demand(u) * tree.self_cost(u);
        }
    }
    Ok(CostTable { cost_at })
}

/// Runs both sweeps and returns the region node minimizing the serving
/// cost (lowest global id among exact ties) together with the full table.
pub fn tree_cost_center(tree: &RootedRegionTree) -> (NodeId, CostTable) {
    let (up, root_cost) = upward_pass(tree);
    let table = downward_pass(tree, &up, root_cost).expect("messages built from the same tree");
    let mut best = 0;
    for v in 1..tree.len() {
        if table.cost_at[v] < table.cost_at[best] {
            best = v;
        }
    }
    (tree.global_id(best), table)
}

#[derive(Debug, Clone, Copy)]
enum UpMsg {
    F(f64),
    G(f64),
}

#[derive(Debug, Clone, Copy, Default)]
struct UpState {
    received: usize,
    f_acc: f64,
    g_acc: f64,
    f_up: f64,
    g_up: f64,
}

/// The upward sweep executed as a message-passing protocol: leaves start,
/// every other node forwards once all children have reported. Sends exactly
/// two scalar messages per tree edge; aggregate values match [`upward_pass`]
/// up to floating-point summation order.
pub fn upward_pass_protocol(
    graph: &Graph,
    tree: &RootedRegionTree,
) -> Result<(UpwardMessages, f64, SimStats)> {
    let n = tree.len();
    let local_of = build_local_map(graph, tree)?;
    let root = tree.root();
    if n == 1 {
        let root_cost = tree.demand(root) * tree.self_cost(root);
        let up = UpwardMessages { f_up: vec![tree.demand(root)], g_up: vec![0.0] };
        return Ok((up, root_cost, SimStats::default()));
    }

    let mut initial = Vec::new();
    for v in 0..n {
        if tree.children(v).is_empty() && v != root {
            let f = tree.demand(v);
            let g = f * tree.dist_to_parent(v);
            let from = tree.global_id(v);
            let to = tree.global_id(tree.parent(v).expect("non-root leaf"));
            initial.push((from, Outgoing { to, payload: UpMsg::F(f) }));
            initial.push((from, Outgoing { to, payload: UpMsg::G(g) }));
        }
    }

    let budget = 2 * (n as u64 - 1);
    let states = vec![UpState::default(); graph.node_count()];
    let (states, stats) = run_protocol(graph, states, initial, budget, |at, state, _, _, msg| {
        match msg {
            UpMsg::F(x) => state.f_acc += x,
            UpMsg::G(x) => state.g_acc += x,
        }
        state.received += 1;
        let v = local_of[at].expect("messages stay inside the region");
        if state.received < 2 * tree.children(v).len() || v == root {
            return Vec::new();
        }
        // All children reported: aggregate and pass toward the root.
        let f = tree.demand(v) + state.f_acc;
        let g = state.g_acc + f * tree.dist_to_parent(v);
        state.f_up = f;
        state.g_up = g;
        let to = tree.global_id(tree.parent(v).expect("non-root"));
        vec![
            Outgoing { to, payload: UpMsg::F(f) },
            Outgoing { to, payload: UpMsg::G(g) },
        ]
    })?;

    let mut f_up = vec![0.0; n];
    let mut g_up = vec![0.0; n];
    for v in 0..n {
        let s = &states[tree.global_id(v)];
        if v == root {
            f_up[v] = tree.demand(v) + s.f_acc;
        } else if tree.children(v).is_empty() {
            f_up[v] = tree.demand(v);
            g_up[v] = f_up[v] * tree.dist_to_parent(v);
        } else {
            f_up[v] = s.f_up;
            g_up[v] = s.g_up;
        }
    }
    let root_state = &states[tree.global_id(root)];
    let root_cost = tree.demand(root) * tree.self_cost(root) + root_state.g_acc;
    Ok((UpwardMessages { f_up, g_up }, root_cost, stats))
}

#[derive(Debug, Clone, Copy)]
enum DownMsg {
    Fd(f64),
    H(f64),
}

#[derive(Debug, Clone, Copy, Default)]
struct DownState {
    received: usize,
    fd: f64,
    h: f64,
    cost: f64,
    done: bool,
}

/// The downward sweep executed as a message-passing protocol. The root
/// initiates; every node combines the two received scalars with its cached
/// upward mass, fixes its own cost, and relays to its children. Sends
/// exactly two scalar messages per tree edge.
pub fn downward_pass_protocol(
    graph: &Graph,
    tree: &RootedRegionTree,
    up: &UpwardMessages,
    root_cost: f64,
) -> Result<(CostTable, SimStats)> {
    let n = tree.len();
    if up.f_up.len() != n {
        return Err(Error::InvalidArgument(format!(
            "upward messages cover {} nodes but the tree has {n}",
            up.f_up.len()
        )));
    }
    let local_of = build_local_map(graph, tree)?;
    let root = tree.root();
    if n == 1 {
        return Ok((CostTable { cost_at: vec![root_cost] }, SimStats::default()));
    }

    let total = up.f_up[root];
    let root_host = tree.demand(root) * tree.self_cost(root);
    let mut initial = Vec::new();
    for &u in tree.children(root) {
        let d = tree.dist_to_parent(u);
        let fd = total - up.f_up[u];
        let h = root_cost + fd * d - root_host;
        let to = tree.global_id(u);
        let from = tree.global_id(root);
        initial.push((from, Outgoing { to, payload: DownMsg::Fd(fd) }));
        initial.push((from, Outgoing { to, payload: DownMsg::H(h) }));
    }

    let budget = 2 * (n as u64 - 1);
    let states = vec![DownState::default(); graph.node_count()];
    let (states, stats) = run_protocol(graph, states, initial, budget, |at, state, _, _, msg| {
        match msg {
            DownMsg::Fd(x) => state.fd = x,
            DownMsg::H(x) => state.h = x,
        }
        state.received += 1;
        if state.received < 2 {
            return Vec::new();
        }
        let v = local_of[at].expect("messages stay inside the region");
        let d = tree.dist_to_parent(v);
        let host_term = tree.demand(v) * tree.self_cost(v);
        state.cost = state.h - up.f_up[v] * d + host_term;
        state.done = true;
        // Mass outside a child's subtree, reconstructed from local data:
        // everything outside v plus v's subtree minus the child's.
        let local_total = state.fd + up.f_up[v];
        tree.children(v)
            .iter()
            .flat_map(|&c| {
                let dc = tree.dist_to_parent(c);
                let fd_c = local_total - up.f_up[c];
                let h_c = state.cost + fd_c * dc - host_term;
                let to = tree.global_id(c);
                [
                    Outgoing { to, payload: DownMsg::Fd(fd_c) },
                    Outgoing { to, payload: DownMsg::H(h_c) },
                ]
            })
            .collect()
    })?;

    let mut cost_at = vec![0.0; n];
    cost_at[root] = root_cost;
    for v in 0..n {
        if v == root {
            continue;
        }
        let s = &states[tree.global_id(v)];
        if !s.done {
            return Err(Error::Protocol(format!(
                "node {} never received its downward messages",
                tree.global_id(v)
            )));
        }
        cost_at[v] = s.cost;
    }
    Ok((CostTable { cost_at }, stats))
}

fn build_local_map(graph: &Graph, tree: &RootedRegionTree) -> Result<Vec<Option<usize>>> {
    let mut map = vec![None; graph.node_count()];
    for (i, &v) in tree.region_nodes().iter().enumerate() {
        if v >= graph.node_count() {
            return Err(Error::InvalidArgument(format!(
                "tree node {v} out of range for the graph"
            )));
        }
        map[v] = Some(i);
    }
    Ok(map)
}
