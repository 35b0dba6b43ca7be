//! Deterministic discrete-event simulator for message-passing protocols on a
//! graph. A message sent along an edge arrives after a delay equal to the
//! edge distance, so arrival order reproduces shortest-path order exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// A message handed to the simulator for delivery to a neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct Outgoing<P> {
    pub to: NodeId,
    pub payload: P,
}

/// Counters reported by a completed simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimStats {
    /// Messages enqueued, including the initial ones. Equals
    /// `events_processed` once the queue drains.
    pub messages_sent: u64,
    /// Messages delivered to their handler.
    pub events_processed: u64,
    /// Arrival time of the last delivered message.
    pub final_time: f64,
}

struct Event<P> {
    time: f64,
    dest: NodeId,
    sender: NodeId,
    seq: u64,
    payload: P,
}

// Events are totally ordered by (time, dest, sender, seq). The sequence
// number separates same-edge messages sent together; times are finite by
// construction so the f64 comparison never sees NaN.
impl<P> Ord for Event<P> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .partial_cmp(&other.time)
            .expect("event times are finite")
            .then(self.dest.cmp(&other.dest))
            .then(self.sender.cmp(&other.sender))
            .then(self.seq.cmp(&other.seq))
    }
}

impl<P> PartialOrd for Event<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> PartialEq for Event<P> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<P> Eq for Event<P> {}

/// Runs a protocol to quiescence and returns the per-node final states.
///
/// `initial` lists the messages in flight at time zero as `(sender, msg)`
/// pairs. Each delivered message invokes
/// `handler(at, &mut state[at], from, time, payload)`, whose return value is
/// sent onward from `at`. Every destination must be a neighbor of its
/// sender. The run fails once more than `budget` messages have been sent,
/// which bounds runaway protocols deterministically.
pub fn run_protocol<S, P, F>(
    graph: &Graph,
    mut states: Vec<S>,
    initial: Vec<(NodeId, Outgoing<P>)>,
    budget: u64,
    mut handler: F,
) -> Result<(Vec<S>, SimStats)>
where
    F: FnMut(NodeId, &mut S, NodeId, f64, P) -> Vec<Outgoing<P>>,
{
    if states.len() != graph.node_count() {
        return Err(Error::InvalidArgument(format!(
            "got {} node states for {} nodes",
            states.len(),
            graph.node_count()
        )));
    }
    let mut heap: BinaryHeap<std::cmp::Reverse<Event<P>>> = BinaryHeap::new();
    let mut stats = SimStats::default();
    let mut seq = 0u64;

    let send = |heap: &mut BinaryHeap<std::cmp::Reverse<Event<P>>>,
                    stats: &mut SimStats,
                    seq: &mut u64,
                    from: NodeId,
                    now: f64,
                    msg: Outgoing<P>|
     -> Result<()> {
        let delay = graph.neighbor_distance(from, msg.to).ok_or_else(|| {
            Error::Protocol(format!("node {from} sent a message to non-neighbor {}", msg.to))
        })?;
        stats.messages_sent += 1;
        if stats.messages_sent > budget {
            return Err(Error::EventBudgetExceeded { budget });
        }
        heap.push(std::cmp::Reverse(Event {
            time: now + delay,
            dest: msg.to,
            sender: from,
            seq: *seq,
            payload: msg.payload,
        }));
        *seq += 1;
        Ok(())
    };

    for (from, msg) in initial {
        send(&mut heap, &mut stats, &mut seq, from, 0.0, msg)?;
    }

    while let Some(std::cmp::Reverse(ev)) = heap.pop() {
        stats.events_processed += 1;
        stats.final_time = ev.time;
        let replies = handler(ev.dest, &mut states[ev.dest], ev.sender, ev.time, ev.payload);
        for msg in replies {
            send(&mut heap, &mut stats, &mut seq, ev.dest, ev.time, msg)?;
        }
    }
    Ok((states, stats))
}

/// Per-node outcome of [`first_arrival_broadcast`].
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastRecord {
    /// Distance to the nearest source.
    pub nearest_dist: f64,
    /// Lowest-id source among those at `nearest_dist`.
    pub arrival_source: NodeId,
    /// Neighbor that delivered the first arrival from `arrival_source`;
    /// `None` at sources.
    pub arrival_parent: Option<NodeId>,
    /// All sources at exactly `nearest_dist`, ascending.
    pub tied_sources: Vec<NodeId>,
    /// For each tied source, the neighbor that delivered its first arrival,
    /// ascending by source. Empty at a source's own node.
    pub source_parents: Vec<(NodeId, NodeId)>,
}

/// Floods a distance-accumulating announcement from every source at once and
/// keeps, per node and per source, only the first arrival. With delays equal
/// to edge distances the first arrival from a source carries its exact
/// shortest-path distance, and the delivering neighbor lies on a shortest
/// path. Sends at most `2 |E|` messages per source.
pub fn first_arrival_broadcast(
    graph: &Graph,
    sources: &[NodeId],
) -> Result<(Vec<BroadcastRecord>, SimStats)> {
    let n = graph.node_count();
    if sources.is_empty() {
        return Err(Error::InvalidArgument("broadcast needs at least one source".into()));
    }
    let mut is_source = vec![false; n];
    for &s in sources {
        if s >= n {
            return Err(Error::InvalidArgument(format!(
                "source {s} out of range for {n} nodes"
            )));
        }
        if is_source[s] {
            return Err(Error::InvalidArgument(format!("duplicate source {s}")));
        }
        is_source[s] = true;
    }

    // Node state: sorted (source, dist, delivering neighbor) triples.
    // Sources are few, so binary search on a Vec beats hashing here.
    let states: Vec<Vec<(NodeId, f64, NodeId)>> = vec![Vec::new(); n];
    let mut initial = Vec::new();
    for &s in sources {
        for &(u, _) in graph.neighbors(s) {
            initial.push((s, Outgoing { to: u, payload: s }));
        }
    }
    let budget = 10 * (graph.edge_count() as u64).max(1) * sources.len() as u64;

    let (best, stats) = run_protocol(graph, states, initial, budget, |at, state, from, time, src| {
        // `time` is the accumulated path length from `src`.
        match state.binary_search_by(|entry| entry.0.cmp(&src)) {
            Ok(_) => Vec::new(), // a first arrival from src already won
            Err(pos) => {
                state.insert(pos, (src, time, from));
                if is_source[at] {
                    // A source absorbs other sources' announcements.
                    return Vec::new();
                }
                graph
                    .neighbors(at)
                    .iter()
                    .map(|&(u, _)| Outgoing { to: u, payload: src })
                    .collect()
            }
        }
    })?;

    let mut records = Vec::with_capacity(n);
    for v in 0..n {
        if is_source[v] {
            records.push(BroadcastRecord {
                nearest_dist: 0.0,
                arrival_source: v,
                arrival_parent: None,
                tied_sources: vec![v],
                source_parents: Vec::new(),
            });
            continue;
        }
        let nearest = best[v]
            .iter()
            .map(|&(_, d, _)| d)
            .fold(f64::INFINITY, f64::min);
        if !nearest.is_finite() {
            return Err(Error::UnreachableDemand { node: v });
        }
        let tied: Vec<NodeId> = best[v]
            .iter()
            .filter(|&&(_, d, _)| d == nearest)
            .map(|&(s, _, _)| s)
            .collect();
        let parents: Vec<(NodeId, NodeId)> = best[v]
            .iter()
            .filter(|&&(_, d, _)| d == nearest)
            .map(|&(s, _, p)| (s, p))
            .collect();
        records.push(BroadcastRecord {
            nearest_dist: nearest,
            arrival_source: tied[0],
            arrival_parent: Some(parents[0].1),
            tied_sources: tied,
            source_parents: parents,
        });
    }
    Ok((records, stats))
}
