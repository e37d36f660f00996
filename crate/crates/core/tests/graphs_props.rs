use std::collections::HashSet;

use colored_ldp::graphs::{empirical_measures, sample_colored_graph, sample_conditional, ColoredGraph, ModelParams};
use colored_ldp::mcharness::{
    estimate_tail_exponent, exact_er_edge_exponent, tally_replicas, Sampling, TailEvent, TailExperiment,
};
use colored_ldp::measures::{degree_distribution, ColorMeasure, Kernel};
use colored_ldp::oracles::support_bound_check;
use colored_ldp::seed::rng_from_seed;
use colored_ldp::validation::{random_kernel, random_probability};
use colored_ldp::Error;
use proptest::prelude::*;

fn random_params(seed: u64, m: usize, n: usize) -> ModelParams {
    let mut rng = rng_from_seed(seed);
    ModelParams::new(random_probability(&mut rng, m, 0.05), random_kernel(&mut rng, m, 0.1, 6.0), n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sampled_graphs_are_simple_and_exact(seed in any::<u64>(), m in 1usize..=3, n in 1usize..400) {
        let g = sample_colored_graph(&random_params(seed, m, n), seed ^ 1);
        let mut seen = HashSet::new();
        for &(u, v) in g.edges() {
            prop_assert!(u < v && (v as usize) < n);
            prop_assert!(seen.insert((u, v)));
        }
        let emp = empirical_measures(&g);
        prop_assert!(emp.neighborhoods.matches(&emp.colors, &emp.pairs));
        let degree_sum: u64 = g.degrees().iter().sum();
        prop_assert_eq!(degree_sum, 2 * g.edge_count() as u64);
        let pair_total: u64 = emp.pairs.counts().iter().sum();
        prop_assert_eq!(pair_total, degree_sum);
        let magnitudes: u64 = emp.neighborhoods.iter().map(|(_, l, k)| l.magnitude() * k).sum();
        prop_assert_eq!(magnitudes, degree_sum);
        let d = degree_distribution(&emp.neighborhoods.to_measure());
        prop_assert!((d.mean() - degree_sum as f64 / n as f64).abs() <= 1e-9);
        prop_assert!(support_bound_check(&emp.neighborhoods).holds);
    }

    #[test]
    fn edge_lists_round_trip(seed in any::<u64>(), m in 1usize..=3, n in 1usize..120) {
        let g = sample_colored_graph(&random_params(seed, m, n), seed);
        let text = g.to_edge_list();
        prop_assert_eq!(ColoredGraph::parse_edge_list(&text).unwrap(), g.clone());
        let json = serde_json::to_string(&g).unwrap();
        prop_assert_eq!(serde_json::from_str::<ColoredGraph>(&json).unwrap(), g);
    }

    #[test]
    fn conditional_samples_hit_their_targets(seed in any::<u64>(), m in 1usize..=3, n in 1usize..150) {
        let target = empirical_measures(&sample_colored_graph(&random_params(seed, m, n), seed));
        let h = sample_conditional(&target.colors, &target.pairs, seed.wrapping_add(17), 1).unwrap();
        let emp = empirical_measures(&h);
        prop_assert_eq!(emp.colors, target.colors);
        prop_assert_eq!(emp.pairs, target.pairs);
    }
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let params = random_params(5, 3, 500);
    assert_eq!(sample_colored_graph(&params, 9), sample_colored_graph(&params, 9));
    assert_ne!(sample_colored_graph(&params, 9), sample_colored_graph(&params, 10));
}

#[test]
fn parser_reports_line_numbers() {
    let bad = "3 2\n0 1 1\n0 1\n1 x\n";
    match ColoredGraph::parse_edge_list(bad) {
        Err(Error::Parse(msg)) => assert!(msg.contains("line 4"), "{msg}"),
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(ColoredGraph::parse_edge_list("3 2\n0 1 1\n0 0\n").is_err());
    assert!(ColoredGraph::parse_edge_list("3 2\n0 1 1\n0 1\n1 0\n").is_err());
}

#[test]
fn zero_retry_budget_is_rejected() {
    let target = empirical_measures(&sample_colored_graph(&random_params(1, 2, 30), 1));
    assert!(matches!(sample_conditional(&target.colors, &target.pairs, 1, 0), Err(Error::Construction(_))));
}

fn er_experiment(event: TailEvent, sizes: Vec<usize>, replicas: Vec<u64>) -> TailExperiment {
    TailExperiment {
        mu: ColorMeasure::uniform(1).unwrap(),
        kernel: Kernel::constant(1, 2.0).unwrap(),
        event,
        sizes,
        replicas,
        sampling: Sampling::Plain,
        seed: 99,
    }
}

#[test]
fn tail_estimates_are_deterministic_and_mergeable() {
    let exp = er_experiment(TailEvent::EdgesAtLeast { x: 1.2 }, vec![40, 80], vec![30_000, 30_000]);
    assert_eq!(estimate_tail_exponent(&exp).unwrap(), estimate_tail_exponent(&exp).unwrap());
    for n in [40, 80] {
        let full = tally_replicas(&exp, n, 0..30_000).unwrap();
        let mut parts = tally_replicas(&exp, n, 0..12_345).unwrap();
        parts.merge(&tally_replicas(&exp, n, 12_345..30_000).unwrap());
        assert_eq!((full.hits, full.replicas), (parts.hits, parts.replicas));
    }
}

#[test]
fn plain_estimates_agree_with_exact_tail() {
    let sizes = vec![40usize, 80, 160];
    let exp = er_experiment(TailEvent::EdgesAtLeast { x: 1.2 }, sizes.clone(), vec![40_000; 3]);
    let est = estimate_tail_exponent(&exp).unwrap();
    let mut compared = 0;
    for s in &est.sizes {
        if s.hits < 50 {
            continue;
        }
        compared += 1;
        let p = (-exact_er_edge_exponent(s.n as u64, 2.0, 1.2).unwrap() * s.n as f64).exp();
        let se = (p * (1.0 - p) / s.replicas as f64).sqrt();
        assert!((s.p_hat - p).abs() <= 3.0 * se, "n = {}: {} vs {p}", s.n, s.p_hat);
    }
    assert!(compared >= 2);
}

#[test]
fn exact_exponent_vanishes_at_the_mean() {
    let values: Vec<f64> =
        [100u64, 1000, 10_000].iter().map(|&n| exact_er_edge_exponent(n, 2.0, 1.0).unwrap()).collect();
    assert!(values[0] > values[1] && values[1] > values[2] && values[2] < 1e-3, "{values:?}");
}
