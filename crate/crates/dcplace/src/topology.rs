//! Synthetic topology generators, demand generation, and edge-list /
//! demand-file I/O.
//!
//! Everything here is a deterministic function of its parameters and seed.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// How per-node demand is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemandDistribution {
    /// Heavy-tailed: `scale / U^(1/shape)` with `U` uniform on (0, 1].
    Pareto,
    /// Uniform on (0, scale].
    Uniform,
    /// Every node gets exactly `scale`.
    Constant,
}

/// Parameters for demand generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandSpec {
    pub distribution: DemandDistribution,
    /// Pareto tail index. The default 1.16 gives the classic 80-20 split.
    pub shape: f64,
    /// Pareto minimum / uniform upper bound / constant value.
    pub scale: f64,
    pub seed: u64,
}

impl DemandSpec {
    pub fn pareto(seed: u64) -> Self {
        DemandSpec {
            distribution: DemandDistribution::Pareto,
            shape: 1.16,
            scale: 1.0,
            seed,
        }
    }

    pub fn constant(value: f64) -> Self {
        DemandSpec {
            distribution: DemandDistribution::Constant,
            shape: 1.0,
            scale: value,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape.is_finite() && self.shape > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "demand shape must be > 0, got {}",
                self.shape
            )));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "demand scale must be > 0, got {}",
                self.scale
            )));
        }
        Ok(())
    }
}

/// `rows x cols` lattice with 4-neighbor connectivity, unit edge distances,
/// unit demands, zero self-costs.
pub fn gen_grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("grid dimensions must be positive".into()));
    }
    if rows * cols < 2 {
        return Err(Error::InvalidArgument("grid needs at least two nodes".into()));
    }
    let mut g = Graph::new(rows * cols)?;
    let id = |r: usize, c: usize| r * cols + c;
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                g.add_edge(id(r, c), id(r, c + 1), 1.0)?;
            }
            if r + 1 < rows {
                g.add_edge(id(r, c), id(r + 1, c), 1.0)?;
            }
        }
    }
    Ok(g)
}

/// Watts-Strogatz small world: ring lattice of even degree `base_degree`,
/// each lattice edge rewired with probability `rewire_prob` (new endpoint
/// redrawn until it is neither a self-loop nor a duplicate). Disconnected
/// draws are regenerated from the next seed, up to `SMALL_WORLD_RETRIES`
/// attempts. Unit edge distances.
pub fn gen_small_world(
    n: usize,
    base_degree: usize,
    rewire_prob: f64,
    seed: u64,
) -> Result<Graph> {
    if base_degree == 0 || !base_degree.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "base degree must be even and positive, got {base_degree}"
        )));
    }
    if base_degree >= n {
        return Err(Error::InvalidArgument(format!(
            "base degree {base_degree} must be < n = {n}"
        )));
    }
    if !(0.0..=1.0).contains(&rewire_prob) {
        return Err(Error::InvalidArgument(format!(
            "rewire probability must be in [0, 1], got {rewire_prob}"
        )));
    }
    for attempt in 0..SMALL_WORLD_RETRIES {
        let g = small_world_attempt(n, base_degree, rewire_prob, seed.wrapping_add(attempt))?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed(format!(
        "no connected small-world graph in {SMALL_WORLD_RETRIES} attempts (n={n}, \
         degree={base_degree}, p={rewire_prob}, seed={seed})"
    )))
}

const SMALL_WORLD_RETRIES: u64 = 100;

fn small_world_attempt(n: usize, base_degree: usize, p: f64, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = base_degree / 2;
    // Edge set as an adjacency matrix substitute; n is modest for this
    // generator so a per-node sorted Vec suffices.
    let mut g = Graph::new(n)?;
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n * half);
    for j in 1..=half {
        for u in 0..n {
            edges.push((u, (u + j) % n));
        }
    }
    let has_edge = |g: &Graph, a: usize, b: usize| g.neighbor_distance(a, b).is_some();
    // Rewire pass operates on the lattice edge list in a fixed order; edges
    // are inserted into the graph as decided.
    let mut decided: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
    for &(u, v) in &edges {
        let mut target = v;
        if p > 0.0 && rng.gen_bool(p) {
            // Redraw until valid; give up after n tries and keep the
            // lattice edge (only relevant on tiny dense rings).
            for _ in 0..n {
                let w = rng.gen_range(0..n);
                if w != u
                    && !decided.iter().any(|&(a, b)| (a, b) == (u, w) || (a, b) == (w, u))
                    && !edges_contains_pending(&edges, &decided, u, w)
                {
                    target = w;
                    break;
                }
            }
        }
        decided.push((u, target));
    }
    for (u, v) in decided {
        if !has_edge(&g, u, v) {
            g.add_edge(u, v, 1.0)?;
        } else {
            // Absorbed duplicate: can only happen in the give-up path above.
            return Err(Error::GenerationFailed("duplicate edge after rewiring".into()));
        }
    }
    Ok(g)
}

// A rewire target must avoid both already-decided edges and lattice edges
// not yet processed (they will be inserted unless themselves rewired; the
// conservative check keeps the edge count exact).
fn edges_contains_pending(
    lattice: &[(usize, usize)],
    decided: &[(usize, usize)],
    u: usize,
    w: usize,
) -> bool {
    lattice[decided.len()..]
        .iter()
        .any(|&(a, b)| (a, b) == (u, w) || (a, b) == (w, u))
}

/// Draw `n` independent demands per `spec`. Deterministic per seed.
pub fn gen_demand(n: usize, spec: &DemandSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let w = match spec.distribution {
            DemandDistribution::Constant => spec.scale,
            DemandDistribution::Uniform => {
                let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
                spec.scale * u
            }
            DemandDistribution::Pareto => {
                let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
                spec.scale / u.powf(1.0 / spec.shape)
            }
        };
        out.push(w);
    }
    Ok(out)
}

/// Parse an edge list: one `<u> <v> <distance>` per line, `#` comments and
/// blank lines ignored, each undirected edge listed once. Node count is
/// `max id + 1`.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_id = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let u = parse_field::<usize>(parts.next(), line_no, "source node")?;
        let v = parse_field::<usize>(parts.next(), line_no, "target node")?;
        let d = parse_field::<f64>(parts.next(), line_no, "distance")?;
        if parts.next().is_some() {
            return Err(Error::Format {
                line: line_no,
                message: "expected exactly three fields: <u> <v> <distance>".into(),
            });
        }
        if u == v {
            return Err(Error::Format {
                line: line_no,
                message: format!("self-loop at node {u}"),
            });
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::Format {
                line: line_no,
                message: format!("distance must be finite and > 0, got {d}"),
            });
        }
        if let Some(&(a, b, prev)) = edges
            .iter()
            .find(|&&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u))
        {
            let kind = if prev == d { "duplicate" } else { "conflicting duplicate" };
            return Err(Error::Format {
                line: line_no,
                message: format!("{kind} of edge ({a}, {b})"),
            });
        }
        max_id = max_id.max(u).max(v);
        edges.push((u, v, d));
    }
    if edges.is_empty() {
        return Err(Error::Format {
            line: 0,
            message: "edge list contains no edges".into(),
        });
    }
    let mut g = Graph::new(max_id + 1)?;
    for (u, v, d) in edges {
        g.add_edge(u, v, d)?;
    }
    Ok(g)
}

/// Parse a demand file: one `<node_id> <demand>` per line; nodes not listed
/// keep demand 1. Applied onto `graph`.
pub fn parse_demand_file(text: &str, graph: &mut Graph) -> Result<()> {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let v = parse_field::<usize>(parts.next(), line_no, "node id")?;
        let w = parse_field::<f64>(parts.next(), line_no, "demand")?;
        if parts.next().is_some() {
            return Err(Error::Format {
                line: line_no,
                message: "expected exactly two fields: <node_id> <demand>".into(),
            });
        }
        if v >= n {
            return Err(Error::Format {
                line: line_no,
                message: format!("node {v} out of range for {n} nodes"),
            });
        }
        if seen[v] {
            return Err(Error::Format {
                line: line_no,
                message: format!("duplicate demand entry for node {v}"),
            });
        }
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::Format {
                line: line_no,
                message: format!("demand must be finite and >= 0, got {w}"),
            });
        }
        seen[v] = true;
        graph.set_demand(v, w).map_err(|e| Error::Format {
            line: line_no,
            message: e.to_string(),
        })?;
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T> {
    let s = field.ok_or_else(|| Error::Format {
        line,
        message: format!("missing {what}"),
    })?;
    s.parse().map_err(|_| Error::Format {
        line,
        message: format!("cannot parse {what} from {s:?}"),
    })
}

/// Load a graph from an edge-list file, optionally applying a demand file.
pub fn load_graph(edge_path: &Path, demand_path: Option<&Path>) -> Result<Graph> {
    let text = fs::read_to_string(edge_path)?;
    let mut g = parse_edge_list(&text)?;
    if let Some(dp) = demand_path {
        let dtext = fs::read_to_string(dp)?;
        parse_demand_file(&dtext, &mut g)?;
    }
    Ok(g)
}

/// Write `graph` as an edge-list file and a demand file in the formats
/// `parse_edge_list` / `parse_demand_file` read back.
pub fn save_graph(graph: &Graph, edge_path: &Path, demand_path: &Path) -> Result<()> {
    let mut edge_out = String::new();
    for (u, v, d) in graph.edges() {
        edge_out.push_str(&format!("{u} {v} {d}\n"));
    }
    let mut demand_out = String::new();
    for v in 0..graph.node_count() {
        demand_out.push_str(&format!("{v} {}\n", graph.demand(v)));
    }
    fs::File::create(edge_path)?.write_all(edge_out.as_bytes())?;
    fs::File::create(demand_path)?.write_all(demand_out.as_bytes())?;
    Ok(())
}
