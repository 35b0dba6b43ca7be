//! Centralized placement algorithms used as comparison arms: greedy site
//! addition, exhaustive optimal search for small instances, and seeded
//! random placement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{
    serving_distance, shortest_distances, weighted_serving_cost, Graph, NodeId, Placement,
};

/// Shortest-path distances from every node, row-major.
fn all_pairs(graph: &Graph) -> Result<Vec<Vec<f64>>> {
    (0..graph.node_count())
        .map(|s| shortest_distances(graph, s).map(|f| f.dist))
        .collect()
}

/// Adds sites one at a time, each round picking the node whose addition
/// minimizes the total weighted serving cost so far (lowest id among exact
/// ties). Returns the sites in selection order and the cost after each
/// addition.
pub fn greedy_placement(graph: &Graph, k: usize) -> Result<(Placement, Vec<f64>)> {
    let n = graph.node_count();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "greedy placement needs 1 <= k < n, got k={k}, n={n}"
        )));
    }
    let rows = all_pairs(graph)?;
    let demands = graph.demands();
    let self_costs = graph.self_costs();

    let mut chosen: Vec<NodeId> = Vec::with_capacity(k);
    let mut costs = Vec::with_capacity(k);
    // serving[v] = distance at which v is currently served by the chosen
    // sites; mins here reproduce the shared evaluator's values exactly.
    let mut serving = vec![f64::INFINITY; n];
    let mut taken = vec![false; n];
    for _ in 0..k {
        let mut best_site = usize::MAX;
        let mut best_cost = f64::INFINITY;
        for c in 0..n {
            if taken[c] {
                continue;
            }
            let mut cost = 0.0;
            for v in 0..n {
                let d = serving[v].min(serving_distance(c, v, rows[c][v], self_costs[v]));
                cost += demands[v] * d;
            }
            if cost < best_cost {
                best_cost = cost;
                best_site = c;
            }
        }
        if !best_cost.is_finite() {
            return Err(Error::Disconnected(
                "graph is not connected: no site can serve every node".into(),
            ));
        }
        taken[best_site] = true;
        for v in 0..n {
            let d = serving_distance(best_site, v, rows[best_site][v], self_costs[v]);
            if d < serving[v] {
                serving[v] = d;
            }
        }
        chosen.push(best_site);
        costs.push(best_cost);
    }
    Ok((Placement::new(chosen, n)?, costs))
}

/// Default cap on the number of k-subsets [`brute_force_optimal`] will scan.
pub const DEFAULT_SUBSET_BUDGET: u64 = 10_000_000;

/// Exact optimum by scanning every k-subset in lexicographic order, keeping
/// the first placement achieving the minimum cost (hence the
/// lexicographically smallest among ties).
pub fn brute_force_optimal(graph: &Graph, k: usize) -> Result<(Placement, f64)> {
    brute_force_optimal_with_budget(graph, k, DEFAULT_SUBSET_BUDGET)
}

pub fn brute_force_optimal_with_budget(
    graph: &Graph,
    k: usize,
    budget: u64,
) -> Result<(Placement, f64)> {
    let n = graph.node_count();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search needs 1 <= k < n, got k={k}, n={n}"
        )));
    }
    let combinations = binomial(n as u128, k as u128);
    if combinations > budget as u128 {
        return Err(Error::InstanceTooLarge { combinations, budget });
    }
    let rows = all_pairs(graph)?;
    let demands = graph.demands();
    let self_costs = graph.self_costs();

    let mut subset: Vec<usize> = (0..k).collect();
    let mut row_refs: Vec<&[f64]> = Vec::with_capacity(k);
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        row_refs.clear();
        row_refs.extend(subset.iter().map(|&s| rows[s].as_slice()));
        let cost = weighted_serving_cost(&subset, &row_refs, demands, self_costs)?;
        match &best {
            Some((_, c)) if cost >= *c => {}
            _ => best = Some((subset.clone(), cost)),
        }
        if !next_subset(&mut subset, n) {
            break;
        }
    }
    let (sites, cost) = best.expect("at least one subset exists");
    Ok((Placement::new(sites, n)?, cost))
}

// Advances to the lexicographically next k-subset of 0..n; false at the end.
fn next_subset(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Exact at every step: the running product over i+1 terms is a
        // binomial coefficient itself. Saturate on overflow.
        acc = match acc.checked_mul(n - i) {
            Some(x) => x / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// A uniformly random k-subset of the nodes, deterministic per seed.
pub fn random_placement(graph: &Graph, k: usize, seed: u64) -> Result<Placement> {
    let n = graph.node_count();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "random placement needs 1 <= k < n, got k={k}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<NodeId> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    Placement::new(pool, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, placement_cost, Graph};

    #[test]
    fn greedy_p5_first_pick_is_the_center() {
        let g = path_graph(5);
        let (p, costs) = greedy_placement(&g, 1).unwrap();
        assert_eq!(p.sites(), &[2]);
        assert_eq!(costs, vec![6.0]);
    }

    #[test]
    fn greedy_p5_two_sites_cost_four() {
        let g = path_graph(5);
        let (p, costs) = greedy_placement(&g, 2).unwrap();
        assert_eq!(p.sites()[0], 2);
        assert_eq!(costs, vec![6.0, 4.0]);
        assert_eq!(placement_cost(&g, &p).unwrap(), 4.0);
    }

    #[test]
    fn greedy_cost_sequence_is_non_increasing() {
        let g = crate::topology::gen_grid(5, 6).unwrap();
        let (_, costs) = greedy_placement(&g, 6).unwrap();
        for w in costs.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn brute_p5_two_sites_optimum_is_three() {
        let g = path_graph(5);
        let (p, cost) = brute_force_optimal(&g, 2).unwrap();
        assert_eq!(cost, 3.0);
        // Three placements tie at cost 3; the scan keeps the
        // lexicographically smallest.
        assert_eq!(p.sites(), &[0, 3]);
    }

    #[test]
    fn brute_beats_greedy_on_p5() {
        let g = path_graph(5);
        let (_, greedy_costs) = greedy_placement(&g, 2).unwrap();
        let (_, opt) = brute_force_optimal(&g, 2).unwrap();
        assert_eq!(greedy_costs[1], 4.0);
        assert_eq!(opt, 3.0);
        assert!(opt < greedy_costs[1]);
    }

    #[test]
    fn brute_star_center() {
        let mut g = Graph::new(4).unwrap();
        g.add_edge(0, 1, 1.0).unwrap();
        g.add_edge(0, 2, 1.0).unwrap();
        g.add_edge(0, 3, 1.0).unwrap();
        let (p, cost) = brute_force_optimal(&g, 1).unwrap();
        assert_eq!(p.sites(), &[0]);
        assert_eq!(cost, 3.0);
    }

    #[test]
    fn brute_all_but_one_site() {
        // With k = n-1, exactly one node is served remotely; the optimum
        // excludes the node whose served cost is smallest.
        let mut g = path_graph(4);
        g.set_demands(&[10.0, 1.0, 1.0, 10.0]).unwrap();
        let (p, cost) = brute_force_optimal(&g, 3).unwrap();
        assert_eq!(p.sites(), &[0, 1, 3]);
        assert_eq!(cost, 1.0);
    }

    #[test]
    fn brute_budget_rejects_large_instances() {
        let g = crate::topology::gen_grid(10, 10).unwrap();
        let err = brute_force_optimal_with_budget(&g, 5, 1000).unwrap_err();
        match err {
            Error::InstanceTooLarge { combinations, budget } => {
                assert_eq!(budget, 1000);
                assert_eq!(combinations, 75_287_520);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn greedy_single_site_is_exact() {
        let g = crate::topology::gen_small_world(30, 4, 0.2, 3).unwrap();
        let (gp, gc) = greedy_placement(&g, 1).unwrap();
        let (bp, bc) = brute_force_optimal(&g, 1).unwrap();
        assert_eq!(gp.sites(), bp.sites());
        assert_eq!(gc[0], bc);
    }

    #[test]
    fn subset_iteration_is_exhaustive() {
        let mut subset = vec![0, 1, 2];
        let mut count = 1;
        while next_subset(&mut subset, 6) {
            count += 1;
        }
        assert_eq!(count, 20);
        assert_eq!(subset, vec![3, 4, 5]);
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(16, 3), 560);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn random_placement_is_seed_stable() {
        let g = path_graph(10);
        let a = random_placement(&g, 3, 42).unwrap();
        let b = random_placement(&g, 3, 42).unwrap();
        assert_eq!(a.sites(), b.sites());
    }

    #[test]
    fn random_placement_rejects_full_cover() {
        let g = path_graph(4);
        assert!(random_placement(&g, 4, 1).is_err());
    }

    #[test]
    fn random_placement_is_roughly_uniform() {
        let g = path_graph(10);
        let mut hits = [0u32; 10];
        for seed in 0..10_000 {
            let p = random_placement(&g, 1, seed).unwrap();
            hits[p.sites()[0]] += 1;
        }
        for (v, &h) in hits.iter().enumerate() {
            let freq = h as f64 / 10_000.0;
            assert!((freq - 0.1).abs() <= 0.02, "node {v}: {freq}");
        }
    }
}
