use relaxsim_core::sched::{Scheduler, SchedulerConfig, SchedulerTrace};

fn drain(q: u32, n: u32, seed: u64) -> SchedulerTrace {
    let mut s = Scheduler::new(SchedulerConfig::multiqueue(q, seed)).unwrap();
    for label in 1..=n {
        s.insert(label, u64::from(label)).unwrap();
    }
    while !s.empty() {
        let (id, _) = s.approx_get_min().unwrap();
        s.delete_task(id).unwrap();
    }
    s.finalize_trace()
}

/// Worst rank over 100 seeds is at most this times `q ln q`; 6.4 observed.
const RANK_C: f64 = 10.0;

#[test]
fn worst_rank_is_order_q_log_q() {
    let q = 8u32;
    let worst = (0..100).map(|seed| drain(q, 10_000, seed).max_rank_observed).max().unwrap();
    let bound = RANK_C * f64::from(q) * f64::from(q).ln();
    assert!(f64::from(worst) <= bound, "max rank {worst} above {bound}");
    // the relaxation is real: two-choice sampling must miss the top sometimes
    assert!(worst > 1);
}
