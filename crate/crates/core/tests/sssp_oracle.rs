use proptest::prelude::*;
use relaxsim_core::sched::{AdversaryStrategy, SchedulerConfig};
use relaxsim_core::sssp::{
    bucket_stats, dijkstra_oracle, random_graph, relaxed_sssp, DuplicateMode, WeightedDigraph, UNREACHABLE,
};

fn configs(seed: u64) -> Vec<SchedulerConfig> {
    let mut out = vec![
        SchedulerConfig::exact(),
        SchedulerConfig::multiqueue(8, seed),
        SchedulerConfig::multiqueue(16, seed),
    ];
    for k in [2, 4, 8] {
        for s in AdversaryStrategy::ALL {
            out.push(SchedulerConfig::adversarial(k, s, seed));
        }
    }
    out
}

#[test]
fn relaxed_distances_equal_dijkstra() {
    for seed in 0..5 {
        let g = random_graph(2000, 12000, 100, seed).unwrap();
        let oracle = dijkstra_oracle(&g);
        for cfg in configs(seed) {
            for mode in [DuplicateMode::DecreaseKey, DuplicateMode::InsertOnly] {
                let run = relaxed_sssp(&g, &cfg, mode).unwrap();
                assert_eq!(run.dist, oracle, "{cfg:?} {mode:?}");
            }
        }
    }
}

#[test]
fn exact_decrease_key_pops_each_reachable_vertex_once() {
    let g = random_graph(3000, 9000, 100, 1).unwrap();
    let run = relaxed_sssp(&g, &SchedulerConfig::exact(), DuplicateMode::DecreaseKey).unwrap();
    assert_eq!(run.stats.total_pops, run.stats.reachable);
    assert_eq!(run.stats.stale_pops, 0);
    assert_eq!(run.stats.premature_pops, 0);
    assert_eq!(run.stats.bucket_sizes.iter().sum::<u64>(), run.stats.reachable);
}

#[test]
fn insert_only_mode_produces_stale_pops() {
    let g = random_graph(3000, 30000, 100, 2).unwrap();
    let cfg = SchedulerConfig::adversarial(8, AdversaryStrategy::MaxRank, 0);
    let dk = relaxed_sssp(&g, &cfg, DuplicateMode::DecreaseKey).unwrap();
    let io = relaxed_sssp(&g, &cfg, DuplicateMode::InsertOnly).unwrap();
    assert_eq!(dk.stats.stale_pops, 0);
    assert!(io.stats.stale_pops > 0);
    assert_eq!(
        io.stats.total_pops,
        io.stats.stale_pops + io.stats.premature_pops + io.stats.reachable
    );
}

#[test]
fn shortest_path_tree_buckets_strictly_increase() {
    let g = random_graph(5000, 50000, 100, 4).unwrap();
    let dist = dijkstra_oracle(&g);
    let b = bucket_stats(&dist, &g);
    let sample: Vec<u32> = (0..100).map(|i| i * 50).collect();
    assert!(b.check_paths(&dist, &sample).is_empty());
    // the parent pointers realise the distances
    for v in 0..g.n() as u32 {
        if let Some(p) = b.parent[v as usize] {
            let w = g.out_edges(p).filter(|&(t, _)| t == v).map(|(_, w)| w).min().unwrap();
            assert_eq!(dist[p as usize] + w, dist[v as usize]);
        }
    }
}

#[test]
fn pop_bound_holds_for_compliant_adversaries() {
    for seed in 0..3 {
        let g = random_graph(3000, 30000, 100, 10 + seed).unwrap();
        for k in [2, 4, 8] {
            for s in AdversaryStrategy::ALL {
                let cfg = SchedulerConfig::adversarial(k, s, seed);
                let run = relaxed_sssp(&g, &cfg, DuplicateMode::DecreaseKey).unwrap();
                assert!((run.stats.total_pops as f64) <= run.stats.pop_bound(k, 1.0), "{cfg:?}");
            }
        }
    }
}

fn arb_graph() -> impl Strategy<Value = WeightedDigraph> {
    (1usize..30).prop_flat_map(|n| {
        let edge = (0..n as u32, 0..n as u32, 1u64..20);
        proptest::collection::vec(edge, 0..120)
            .prop_map(move |edges| WeightedDigraph::from_edges(n, &edges, 0).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distances_match_oracle_and_upper_bound_it(g in arb_graph(), seed in any::<u64>(), k in 1u32..6) {
        let oracle = dijkstra_oracle(&g);
        let cfg = SchedulerConfig::adversarial(k, AdversaryStrategy::RandomTopK, seed);
        let run = relaxed_sssp(&g, &cfg, DuplicateMode::DecreaseKey).unwrap();
        prop_assert_eq!(&run.dist, &oracle);
        let reachable = oracle.iter().filter(|&&d| d != UNREACHABLE).count() as u64;
        prop_assert_eq!(run.stats.reachable, reachable);
        prop_assert!(run.stats.total_pops >= reachable);
    }
}
