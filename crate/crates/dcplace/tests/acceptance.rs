//! Acceptance gate: eight checks covering sweep-vs-direct cost agreement,
//! message complexity, convergence on trees, fixed-point structure, the
//! optimality ordering, benchmark-scale cost ratios, distributed/centralized
//! agreement, and end-to-end determinism. Every test prints one PASS/FAIL
//! line (visible with `--nocapture`); details live in the panic message.

mod common;

use std::time::{Duration, Instant};

use common::{
    all_pairs, argmin, partition_oracle, random_connected_graph, random_sites, random_tree_graph,
    tree_costs_direct,
};
use dcplace::baselines::{brute_force_optimal, greedy_placement};
use dcplace::dlm::{initialize_placement, run_dlm, run_dlm_from, DlmConfig};
use dcplace::graph::{placement_cost, shortest_distances, Graph, Placement};
use dcplace::harness::{preset, run_experiment, summarize, ExperimentConfig};
use dcplace::mpcost::{downward_pass_protocol, tree_cost_center, upward_pass_protocol};
use dcplace::netsim::first_arrival_broadcast;
use dcplace::region_tree::region_tree;
use dcplace::seeding::derive_seed;
use dcplace::topology::{gen_demand, gen_grid, gen_small_world, DemandSpec};
use dcplace::voronoi::{is_centroidal, voronoi_partition, TieMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() <= tol * scale
}

fn report(name: &str, failures: &[String], ok: bool) {
    println!("acceptance {name}: {}", verdict(ok));
    assert!(
        ok,
        "{name}: {} failure(s); first few: {:#?}",
        failures.len(),
        &failures[..failures.len().min(5)]
    );
}

#[test]
fn acceptance_1_tree_costs_match_direct_recomputation() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);
    let mut failures = Vec::new();
    for round in 0..500 {
        let n = rng.gen_range(1..=200);
        let g = random_tree_graph(&mut rng, n, true);
        let root = rng.gen_range(0..n);
        let region: Vec<usize> = (0..n).collect();
        let tree = region_tree(&g, &region, root).unwrap();
        let (center, table) = tree_cost_center(&tree);
        let direct = tree_costs_direct(&tree);
        for (v, (&sweep, &want)) in table.cost_at.iter().zip(&direct).enumerate() {
            if !close(sweep, want, 1e-9) {
                failures.push(format!(
                    "round {round}: node {v} sweep cost {sweep} vs direct {want}"
                ));
            }
        }
        let oracle_center = tree.global_id(argmin(&direct));
        if center != oracle_center {
            failures.push(format!(
                "round {round}: sweep center {center} vs direct argmin {oracle_center}"
            ));
        }
    }
    let elapsed = started.elapsed();
    if elapsed >= Duration::from_secs(30) {
        failures.push(format!("took {elapsed:?}, budget 30s"));
    }
    let ok = failures.is_empty();
    report(
        "1 (500 random rooted trees: sweep costs within 1e-9 of direct recomputation, centers exact, <30s)",
        &failures,
        ok,
    );
}

#[test]
fn acceptance_2_each_pass_sends_two_messages_per_tree_edge() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let mut failures = Vec::new();
    for round in 0..50 {
        let n = rng.gen_range(1..=150);
        let g = random_tree_graph(&mut rng, n, true);
        let root = rng.gen_range(0..n);
        let region: Vec<usize> = (0..n).collect();
        let tree = region_tree(&g, &region, root).unwrap();
        let expect = 2 * (n as u64 - 1);
        let (up, root_cost, up_stats) = upward_pass_protocol(&g, &tree).unwrap();
        let (_, down_stats) = downward_pass_protocol(&g, &tree, &up, root_cost).unwrap();
        if up_stats.messages_sent != expect {
            failures.push(format!(
                "round {round}: upward sent {} messages on {n} nodes, expected {expect}",
                up_stats.messages_sent
            ));
        }
        if down_stats.messages_sent != expect {
            failures.push(format!(
                "round {round}: downward sent {} messages on {n} nodes, expected {expect}",
                down_stats.messages_sent
            ));
        }
    }
    let ok = failures.is_empty();
    report("2 (both sweeps send exactly 2(n-1) messages over the simulator, 50 trees)", &failures, ok);
}

/// The shared instance stream for acceptance 3 and 4: the fixed generator
/// seed makes both tests see the same 200 tree runs.
fn tree_runs() -> impl Iterator<Item = (usize, Graph, DlmConfig)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    (0..200).map(move |round| {
        let n = rng.gen_range(10..=300);
        let k = [2, 3, 5][round % 3];
        let g = random_tree_graph(&mut rng, n, false);
        let config = DlmConfig {
            k,
            eta: 0.0,
            max_iter: n * n,
            seed: rng.gen(),
            tie_mode: TieMode::LowestId,
        };
        (n, g, config)
    })
}

#[test]
fn acceptance_3_tree_runs_never_raise_cost_and_settle() {
    let mut failures = Vec::new();
    for (round, (n, g, config)) in tree_runs().enumerate() {
        let init = initialize_placement(&g, &config).unwrap();
        let mut prev = placement_cost(&g, &init).unwrap();
        let trace = run_dlm_from(&g, init, &config).unwrap();
        for (i, it) in trace.iterations.iter().enumerate() {
            if it.cost > prev {
                failures.push(format!(
                    "round {round}: cost rose {prev} -> {} at iteration {i}",
                    it.cost
                ));
            }
            prev = it.cost;
        }
        if !trace.converged {
            failures.push(format!("round {round}: no convergence within {} iterations", config.max_iter));
        } else if trace.iteration_count() >= n * n {
            failures.push(format!(
                "round {round}: needed {} iterations on {n} nodes",
                trace.iteration_count()
            ));
        }
    }
    let ok = failures.is_empty();
    report(
        "3 (200 tree runs: exactly non-increasing costs, zero-shift convergence before n^2 iterations)",
        &failures,
        ok,
    );
}

#[test]
fn acceptance_4_converged_tree_placements_are_centroidal() {
    let mut failures = Vec::new();
    let mut converged_runs = 0;
    for (round, (_, g, config)) in tree_runs().enumerate() {
        let trace = run_dlm(&g, &config).unwrap();
        if !trace.converged {
            continue;
        }
        converged_runs += 1;
        match is_centroidal(&g, &trace.final_placement, config.tie_mode) {
            Ok(true) => {}
            Ok(false) => failures.push(format!("round {round}: converged placement is not centroidal")),
            Err(e) => failures.push(format!("round {round}: {e}")),
        }
    }
    if converged_runs == 0 {
        failures.push("no run converged, nothing was checked".into());
    }
    let ok = failures.is_empty();
    report("4 (every converged tree placement is a fixed point of recentering)", &failures, ok);
}

fn small_instances() -> Vec<(String, Graph)> {
    let mut out: Vec<(String, Graph)> = Vec::new();
    for n in 4..=16 {
        out.push((format!("path-{n}"), gen_grid(1, n).unwrap()));
    }
    for n in 4..=16 {
        let mut g = Graph::new(n).unwrap();
        for v in 1..n {
            g.add_edge(0, v, 1.0).unwrap();
        }
        out.push((format!("star-{n}"), g));
    }
    for (r, c) in [(2, 3), (2, 4), (2, 5), (2, 6), (2, 7), (2, 8), (3, 3), (3, 4), (3, 5), (4, 4)] {
        out.push((format!("grid-{r}x{c}"), gen_grid(r, c).unwrap()));
    }
    for n in 8..=16 {
        out.push((format!("small-world-{n}"), gen_small_world(n, 4, 0.2, n as u64).unwrap()));
    }
    out
}

#[test]
fn acceptance_5_exhaustive_optimum_lower_bounds_both_heuristics() {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (index, (label, mut g)) in small_instances().into_iter().enumerate() {
        let n = g.node_count();
        let demands = gen_demand(n, &DemandSpec::pareto(derive_seed(0xACC5, &[index as u64]))).unwrap();
        g.set_demands(&demands).unwrap();
        for k in 1..=3.min(n - 1) {
            checked += 1;
            let (_, optimal) = brute_force_optimal(&g, k).unwrap();
            let (_, greedy_costs) = greedy_placement(&g, k).unwrap();
            let greedy = *greedy_costs.last().unwrap();
            let config = DlmConfig {
                k,
                eta: 0.0,
                max_iter: 100,
                seed: derive_seed(0xACC5, &[index as u64, k as u64]),
                tie_mode: TieMode::SeededUniform(derive_seed(0xACC5, &[k as u64, index as u64])),
            };
            let dlm = run_dlm(&g, &config).unwrap().final_cost;
            if optimal > greedy || optimal > dlm {
                failures.push(format!(
                    "{label} k={k}: optimum {optimal} above greedy {greedy} or dlm {dlm}"
                ));
            }
        }
    }
    if checked < 100 {
        failures.push(format!("only {checked} instances checked, need at least 100"));
    }

    // The five-node path with unit demands: greedy pays 4 where the true
    // two-site optimum pays 3.
    let p5 = gen_grid(1, 5).unwrap();
    let (_, greedy_costs) = greedy_placement(&p5, 2).unwrap();
    let (_, optimal) = brute_force_optimal(&p5, 2).unwrap();
    if *greedy_costs.last().unwrap() != 4.0 || optimal != 3.0 {
        failures.push(format!(
            "five-node path: greedy {} / optimum {optimal}, expected 4 / 3",
            greedy_costs.last().unwrap()
        ));
    }

    let ok = failures.is_empty();
    report(
        "5 (135 small instances: exhaustive optimum <= both heuristics; path-5 gap reproduced)",
        &failures,
        ok,
    );
}

#[test]
fn acceptance_6_benchmark_scale_cost_ratios() {
    let started = Instant::now();
    let mut failures = Vec::new();
    for (name, bound) in [("grid-ci", 1.05), ("small-world-ci", 1.15)] {
        let config: ExperimentConfig = preset(name).unwrap();
        let rows = run_experiment(&config).unwrap();
        for row in &rows {
            if row.status != "ok" {
                failures.push(format!("{name}: failed row n={} k={}: {}", row.n, row.k, row.status));
            }
        }
        let cells = summarize(&rows, "greedy");
        let expected_cells = config.sizes.len() * config.k_ratios.len();
        if cells.len() != expected_cells {
            failures.push(format!(
                "{name}: expected {expected_cells} summary cells, got {}",
                cells.len()
            ));
        }
        for cell in &cells {
            let Some(mean) = cell.mean_ratio else {
                failures.push(format!("{name}: cell n={} k={} has no ratio: {}", cell.n, cell.k, cell.status));
                continue;
            };
            if cell.instances != config.instances_per_cell {
                failures.push(format!(
                    "{name}: cell n={} k={} aggregated {} instances",
                    cell.n, cell.k, cell.instances
                ));
            }
            if mean > bound {
                failures.push(format!(
                    "{name}: cell n={} k={} mean ratio {mean:.4} above {bound}",
                    cell.n, cell.k
                ));
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed >= Duration::from_secs(600) {
        failures.push(format!("took {elapsed:?}, budget 10 min"));
    }
    let ok = failures.is_empty();
    report(
        "6 (n in 400..=1000, k/n in {0.5,1.0,1.5}%: per-cell mean cost vs greedy <= 1.05 grid / 1.15 small-world, <10 min)",
        &failures,
        ok,
    );
}

#[test]
fn acceptance_7_distributed_agrees_with_centralized() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC7);
    let mut failures = Vec::new();

    for round in 0..100 {
        let integer = round % 2 == 0;
        let n = rng.gen_range(2..=80);
        let extra = rng.gen_range(0..n);
        let g = random_connected_graph(&mut rng, n, extra, integer);
        let source_count = rng.gen_range(1..=4.min(n));
        let sources = random_sites(&mut rng, n, source_count);
        let (records, _) = first_arrival_broadcast(&g, &sources).unwrap();
        let fields: Vec<Vec<f64>> = sources
            .iter()
            .map(|&s| shortest_distances(&g, s).unwrap().dist)
            .collect();
        for v in 0..n {
            let expect = fields.iter().map(|f| f[v]).fold(f64::INFINITY, f64::min);
            let got = records[v].nearest_dist;
            let agree = if integer { got == expect } else { close(got, expect, 1e-9) };
            if !agree {
                failures.push(format!(
                    "round {round}: node {v} broadcast distance {got} vs centralized {expect}"
                ));
            }
        }
    }

    for round in 0..100 {
        let n = rng.gen_range(3..=60);
        let extra = rng.gen_range(0..n);
        let g = random_connected_graph(&mut rng, n, extra, true);
        let k = rng.gen_range(1..=5.min(n - 1));
        let sites = random_sites(&mut rng, n, k);
        let placement = Placement::new(sites.clone(), n).unwrap();
        let partition = voronoi_partition(&g, &placement, TieMode::LowestId).unwrap();
        let oracle = partition_oracle(&g, &all_pairs(&g), &sites);
        for (v, &want) in oracle.iter().enumerate() {
            if partition.region_of(v) != want {
                failures.push(format!(
                    "round {round}: node {v} in region {} vs direct assignment {want}",
                    partition.region_of(v)
                ));
            }
        }
    }

    let ok = failures.is_empty();
    report(
        "7 (broadcast distances match per-source sweeps on 100 graphs; partitions match direct assignment on 100 graphs)",
        &failures,
        ok,
    );
}

#[test]
fn acceptance_8_experiments_are_deterministic() {
    use dcplace::harness::{
        AlgorithmKind, DemandTemplate, DlmSettings, ResultRow, TopologyKind,
    };
    let config = ExperimentConfig {
        topology: TopologyKind::Grid,
        graph_file: None,
        demand_file: None,
        sizes: vec![25, 36],
        k_ratios: vec![0.08],
        instances_per_cell: 2,
        demand: DemandTemplate::default(),
        dlm: DlmSettings::default(),
        algorithms: vec![AlgorithmKind::Dlm, AlgorithmKind::Greedy, AlgorithmKind::Random],
        master_seed: 17,
        output_path: None,
        small_world_degree: 4,
        small_world_rewire: 0.1,
    };
    let strip = |rows: Vec<ResultRow>| -> Vec<ResultRow> {
        rows.into_iter().map(|mut r| {
            r.runtime_ms = 0.0;
            r
        })
        .collect()
    };
    let first = strip(run_experiment(&config).unwrap());
    let second = strip(run_experiment(&config).unwrap());
    let mut failures = Vec::new();
    if first.is_empty() {
        failures.push("sweep produced no rows".into());
    }
    if first != second {
        for (a, b) in first.iter().zip(&second) {
            if a != b {
                failures.push(format!("row diverged: {a:?} vs {b:?}"));
            }
        }
    }
    let ok = failures.is_empty();
    report("8 (identical configs give identical result rows, runtime column excluded)", &failures, ok);
}
