use relaxsim_core::incremental::run_with;
use relaxsim_core::sched::{AdversaryStrategy, Scheduler, SchedulerConfig};
use relaxsim_core::txsim::{simulate, verify_tx_properties, TxConfig, TxViolation};
use relaxsim_core::workloads::{BstSortInstance, DagShape, DelaunayInstance, SyntheticDagInstance};
use relaxsim_core::{assert_lemmas, run, CheckMode, LemmaViolation};

#[test]
fn compliant_adversaries_satisfy_both_lemmas() {
    for seed in 0..10 {
        let bst = BstSortInstance::generate(512, seed).unwrap();
        let dt = DelaunayInstance::generate(128, seed).unwrap();
        for k in [2, 4, 8] {
            for s in AdversaryStrategy::ALL {
                let cfg = SchedulerConfig::adversarial(k, s, seed);
                let (report, trace) = run(&mut bst.workload(), &cfg, CheckMode::Structural).unwrap();
                assert_eq!(assert_lemmas(&report, &trace, k), []);
                let (report, trace) = run(&mut dt.workload(), &cfg, CheckMode::Structural).unwrap();
                assert_eq!(assert_lemmas(&report, &trace, k), []);
            }
        }
    }
}

#[test]
fn widened_fairness_window_breaks_the_r_bound() {
    let inst = SyntheticDagInstance::generate(200, DagShape::Empty, 0).unwrap();
    let k = 2;
    let cfg = SchedulerConfig::adversarial(k, AdversaryStrategy::DelayTop, 0);
    let sched = Scheduler::new(cfg).unwrap().with_fairness_window(3 * k);
    let (report, trace) = run_with(&mut inst.workload(), sched, CheckMode::Oracle).unwrap();
    let violations = assert_lemmas(&report, &trace, k);
    assert!(violations.iter().any(|v| matches!(v, LemmaViolation::RBound { .. })));
    // the rank bound itself still held
    assert!(trace.max_rank_observed <= k);
}

#[test]
fn compliant_txsim_runs_satisfy_all_properties() {
    for seed in 0..10 {
        let bst = BstSortInstance::generate(256, seed).unwrap();
        let dag = SyntheticDagInstance::generate(256, DagShape::Tail { c: 2.0 }, seed).unwrap();
        for k in [2, 4, 8] {
            for s in AdversaryStrategy::ALL {
                for (c, workers, duration) in [(8, 8, 1), (8, 4, 2), (3, 1, 3)] {
                    let cfg = TxConfig {
                        duration,
                        ..TxConfig::new(k, c, workers, s, seed)
                    };
                    for oracle in [bst.oracle(), dag.oracle()] {
                        let r = simulate(oracle, &cfg).unwrap();
                        assert_eq!(r.commits, 256);
                        assert_eq!(verify_tx_properties(&r, oracle, &cfg), [], "{cfg:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn txsim_without_availability_rule_fetches_far_labels() {
    let inst = BstSortInstance::generate(256, 1).unwrap();
    let cfg = TxConfig {
        availability_rule: false,
        ..TxConfig::new(2, 8, 8, AdversaryStrategy::MaxRank, 0)
    };
    let r = simulate(inst.oracle(), &cfg).unwrap();
    assert_eq!(r.commits, 256);
    let v = verify_tx_properties(&r, inst.oracle(), &cfg);
    assert!(v.iter().any(|x| matches!(x, TxViolation::FarFetch { .. })));
    assert!(v.iter().any(|x| matches!(x, TxViolation::Availability { .. })));
}

#[test]
fn single_worker_has_no_contention() {
    let inst = BstSortInstance::generate(128, 3).unwrap();
    let cfg = TxConfig::new(4, 1, 1, AdversaryStrategy::RandomTopK, 3);
    let r = simulate(inst.oracle(), &cfg).unwrap();
    assert!(verify_tx_properties(&r, inst.oracle(), &cfg).is_empty());
}

#[test]
fn txsim_is_deterministic_per_seed() {
    let inst = BstSortInstance::generate(128, 3).unwrap();
    let cfg = TxConfig::new(4, 8, 8, AdversaryStrategy::RandomTopK, 3);
    assert_eq!(simulate(inst.oracle(), &cfg), simulate(inst.oracle(), &cfg));
}
