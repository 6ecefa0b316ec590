use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    AdversaryStrategy, Key, Priority, SchedError, SchedulerConfig, SchedulerKind, SchedulerTrace,
    StepRecord, TaskId,
};
use crate::ostree::{splitmix64, OrderStatTree};

#[derive(Clone, Copy, Debug)]
struct Resident {
    priority: Priority,
    queue: u32,
    /// Steps during which this task was the minimum but something else was returned.
    pending_inv: u32,
    inv_done: bool,
}

#[derive(Clone, Debug)]
enum Policy {
    Exact,
    Adversarial {
        k: u32,
        window: u32,
        strategy: AdversaryStrategy,
    },
    MultiQueue {
        queues: Vec<BTreeSet<Key>>,
    },
}

/// Instrumented relaxed priority scheduler.
#[derive(Clone, Debug)]
pub struct Scheduler {
    config: SchedulerConfig,
    policy: Policy,
    rng: ChaCha8Rng,
    residents: Vec<Option<Resident>>,
    order: OrderStatTree<Key>,
    trace: SchedulerTrace,
    step: u64,
    last_sample: Option<(u32, u32)>,
}

impl Scheduler {
    pub fn new(config: SchedulerConfig) -> Result<Self, SchedError> {
        config.validate()?;
        let policy = match config.kind {
            SchedulerKind::Exact => Policy::Exact,
            SchedulerKind::Adversarial => Policy::Adversarial {
                k: config.k,
                window: config.k,
                strategy: config.strategy,
            },
            SchedulerKind::Multiqueue => Policy::MultiQueue {
                queues: (0..config.q).map(|_| BTreeSet::new()).collect(),
            },
        };
        Ok(Self {
            config,
            policy,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            residents: Vec::new(),
            order: OrderStatTree::new(),
            trace: SchedulerTrace::default(),
            step: 0,
            last_sample: None,
        })
    }

    /// Replaces the fairness window of an adversarial scheduler.
    ///
    /// Any window other than `k` breaks the Fairness property; this exists
    /// for negative-control experiments only.
    pub fn with_fairness_window(mut self, window: u32) -> Self {
        if let Policy::Adversarial { window: w, .. } = &mut self.policy {
            *w = window.max(1);
        }
        self
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.empty()
    }

    pub fn contains(&self, id: TaskId) -> bool {
        self.resident(id).is_some()
    }

    pub fn priority_of(&self, id: TaskId) -> Option<Priority> {
        self.resident(id).map(|r| r.priority)
    }

    /// Home queue of a resident task (always 0 outside multiqueue mode).
    pub fn home_queue(&self, id: TaskId) -> Option<u32> {
        self.resident(id).map(|r| r.queue)
    }

    /// Current top of every multiqueue queue; empty for other kinds.
    pub fn queue_tops(&self) -> Vec<Option<Key>> {
        match &self.policy {
            Policy::MultiQueue { queues } => queues.iter().map(|q| q.first().copied()).collect(),
            _ => Vec::new(),
        }
    }

    /// Queues sampled by the most recent multiqueue peek.
    pub fn last_sample(&self) -> Option<(u32, u32)> {
        self.last_sample
    }

    /// 1-based rank of a resident task among all resident tasks.
    pub fn rank_of(&self, id: TaskId) -> Option<usize> {
        let r = self.resident(id)?;
        self.order.rank(&Key::new(r.priority, id))
    }

    pub fn trace(&self) -> &SchedulerTrace {
        &self.trace
    }

    pub fn finalize_trace(self) -> SchedulerTrace {
        self.trace
    }

    fn resident(&self, id: TaskId) -> Option<&Resident> {
        self.residents.get(id as usize).and_then(Option::as_ref)
    }

    fn home_queue_for(&self, id: TaskId) -> u32 {
        match &self.policy {
            Policy::MultiQueue { queues } => {
                let mut s = self.config.seed ^ (u64::from(id)).wrapping_mul(0xA24B_AED4_963E_E407);
                (splitmix64(&mut s) % queues.len() as u64) as u32
            }
            _ => 0,
        }
    }

    pub fn insert(&mut self, id: TaskId, priority: Priority) -> Result<(), SchedError> {
        if self.contains(id) {
            return Err(SchedError::DuplicateResident(id));
        }
        let queue = self.home_queue_for(id);
        let key = Key::new(priority, id);
        if let Policy::MultiQueue { queues } = &mut self.policy {
            queues[queue as usize].insert(key);
        }
        self.order.insert(key);
        let slot = id as usize;
        if self.residents.len() <= slot {
            self.residents.resize(slot + 1, None);
        }
        self.residents[slot] = Some(Resident {
            priority,
            queue,
            pending_inv: 0,
            inv_done: false,
        });
        Ok(())
    }

    pub fn delete_task(&mut self, id: TaskId) -> Result<(), SchedError> {
        let r = self
            .residents
            .get_mut(id as usize)
            .and_then(Option::take)
            .ok_or(SchedError::NotResident(id))?;
        let key = Key::new(r.priority, id);
        self.order.remove(&key);
        if let Policy::MultiQueue { queues } = &mut self.policy {
            queues[r.queue as usize].remove(&key);
        }
        Ok(())
    }

    pub fn decrease_key(&mut self, id: TaskId, new_priority: Priority) -> Result<(), SchedError> {
        let r = self
            .residents
            .get_mut(id as usize)
            .and_then(Option::as_mut)
            .ok_or(SchedError::NotResident(id))?;
        if new_priority >= r.priority {
            return Err(SchedError::NonDecreasingKey {
                id,
                current: r.priority,
                new: new_priority,
            });
        }
        let old = Key::new(r.priority, id);
        let new = Key::new(new_priority, id);
        r.priority = new_priority;
        let queue = r.queue;
        self.order.remove(&old);
        self.order.insert(new);
        if let Policy::MultiQueue { queues } = &mut self.policy {
            let q = &mut queues[queue as usize];
            q.remove(&old);
            q.insert(new);
        }
        Ok(())
    }

    /// Returns a resident task without removing it and records the step.
    pub fn approx_get_min(&mut self) -> Result<(TaskId, Priority), SchedError> {
        let top = self.order.first().ok_or(SchedError::Empty)?;
        let top_state = *self.resident(top.id).expect("ordered key without resident entry");
        let len = self.order.len();

        self.last_sample = None;
        let chosen = match &mut self.policy {
            Policy::Exact => top,
            Policy::Adversarial {
                k,
                window,
                strategy,
            } => {
                let forced = !top_state.inv_done && top_state.pending_inv + 1 >= *window;
                let reach = (*k as usize).min(len);
                let rank = if forced {
                    1
                } else {
                    match strategy {
                        AdversaryStrategy::MaxRank => reach,
                        AdversaryStrategy::DelayTop => reach.min(2),
                        AdversaryStrategy::RandomTopK => self.rng.random_range(1..=reach),
                    }
                };
                self.order.select(rank).expect("rank within resident count")
            }
            Policy::MultiQueue { queues } => {
                let q = queues.len() as u32;
                loop {
                    let a = self.rng.random_range(0..q);
                    let b = self.rng.random_range(0..q);
                    let ta = queues[a as usize].first().copied();
                    let tb = queues[b as usize].first().copied();
                    let pick = match (ta, tb) {
                        (None, None) => None,
                        (Some(x), None) | (None, Some(x)) => Some(x),
                        (Some(x), Some(y)) => Some(x.min(y)),
                    };
                    if let Some(x) = pick {
                        self.last_sample = Some((a, b));
                        break x;
                    }
                }
            }
        };

        let rank = (self.order.count_less(&chosen) + 1) as u32;
        let step = self.step;

        // fairness bookkeeping is charged to the current minimum
        let top_entry = self.residents[top.id as usize].as_mut().expect("top resident");
        if chosen == top {
            if !top_entry.inv_done {
                top_entry.inv_done = true;
                let inv = top_entry.pending_inv;
                let e = self.trace.per_task_inversions.entry(top.id).or_insert(0);
                *e = (*e).max(inv);
                let h = &mut self.trace.inversion_histogram;
                if h.len() <= inv as usize {
                    h.resize(inv as usize + 1, 0);
                }
                h[inv as usize] += 1;
            }
        } else if !top_entry.inv_done {
            top_entry.pending_inv += 1;
        }

        if let Policy::Adversarial { k, window, .. } = &self.policy {
            if rank > *k {
                return Err(SchedError::RankBound { step, rank, k: *k });
            }
            if !top_entry.inv_done && top_entry.pending_inv >= *window {
                return Err(SchedError::Fairness {
                    id: top.id,
                    inv: top_entry.pending_inv,
                    window: *window,
                });
            }
        }

        self.trace.per_step.push(StepRecord {
            t: step,
            label: chosen.id,
            rank,
        });
        self.trace.max_rank_observed = self.trace.max_rank_observed.max(rank);
        self.step += 1;
        Ok((chosen.id, chosen.priority))
    }

    /// Peek followed by delete, as used by the SSSP loop.
    pub fn pop(&mut self) -> Result<(TaskId, Priority), SchedError> {
        let (id, p) = self.approx_get_min()?;
        self.delete_task(id)?;
        Ok((id, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BinaryHeap;
    use core::cmp::Reverse;
    use proptest::prelude::*;

    fn loaded(config: SchedulerConfig, labels: impl IntoIterator<Item = u32>) -> Scheduler {
        let mut s = Scheduler::new(config).unwrap();
        for l in labels {
            s.insert(l, u64::from(l)).unwrap();
        }
        s
    }

    #[test]
    fn exact_singleton_and_order() {
        let mut s = loaded(SchedulerConfig::exact(), [5]);
        assert_eq!(s.rank_of(5), Some(1));
        let mut s2 = loaded(SchedulerConfig::exact(), [3, 1, 2]);
        assert_eq!(s2.approx_get_min().unwrap().0, 1);
        assert_eq!(s.approx_get_min().unwrap(), (5, 5));
    }

    #[test]
    fn exact_returns_rank_one() {
        let mut s = loaded(SchedulerConfig::exact(), 1..=10);
        assert_eq!(s.approx_get_min().unwrap().0, 1);
        assert_eq!(s.trace().per_step[0].rank, 1);
    }

    #[test]
    fn adversarial_max_rank_returns_rank_k() {
        let cfg = SchedulerConfig::adversarial(3, AdversaryStrategy::MaxRank, 1);
        let mut s = loaded(cfg, 1..=10);
        assert_eq!(s.approx_get_min().unwrap().0, 3);
        assert_eq!(s.approx_get_min().unwrap().0, 3);
        // third pass-over would exceed k - 1 = 2, so the top is forced
        assert_eq!(s.approx_get_min().unwrap().0, 1);
        assert_eq!(s.trace().per_task_inversions[&1], 2);
    }

    #[test]
    fn delay_top_returns_top_on_kth_opportunity() {
        let cfg = SchedulerConfig::adversarial(4, AdversaryStrategy::DelayTop, 0);
        let mut s = loaded(cfg, 1..=10);
        let got: Vec<u32> = (0..4).map(|_| s.approx_get_min().unwrap().0).collect();
        assert_eq!(got, [2, 2, 2, 1]);
    }

    #[test]
    fn multiqueue_two_choice_on_forced_tops() {
        let mut s = Scheduler::new(SchedulerConfig::multiqueue(2, 11)).unwrap();
        // find labels whose home queues differ so both tops are populated
        s.insert(5, 5).unwrap();
        let q5 = s.home_queue(5).unwrap();
        let other = (6..100).find(|&l| {
            let mut probe = Scheduler::new(SchedulerConfig::multiqueue(2, 11)).unwrap();
            probe.insert(l, 0).unwrap();
            probe.home_queue(l).unwrap() != q5
        });
        let other = other.unwrap();
        s.insert(other, 2).unwrap();
        for _ in 0..50 {
            let (id, _) = s.approx_get_min().unwrap();
            let (a, b) = s.last_sample().unwrap();
            if a != b {
                assert_eq!(id, other);
            }
        }
    }

    #[test]
    fn home_queue_is_a_function_of_id() {
        let mut a = Scheduler::new(SchedulerConfig::multiqueue(4, 9)).unwrap();
        a.insert(7, 100).unwrap();
        let home = a.home_queue(7).unwrap();
        a.decrease_key(7, 3).unwrap();
        assert_eq!(a.home_queue(7), Some(home));
        assert_eq!(a.priority_of(7), Some(3));
        a.delete_task(7).unwrap();
        a.insert(7, 50).unwrap();
        assert_eq!(a.home_queue(7), Some(home));
    }

    #[test]
    fn delete_advances_queue_top() {
        let mut s = Scheduler::new(SchedulerConfig::multiqueue(1, 0)).unwrap();
        for l in [4, 2, 9] {
            s.insert(l, u64::from(l)).unwrap();
        }
        assert_eq!(s.queue_tops()[0].unwrap().id, 2);
        s.delete_task(2).unwrap();
        assert_eq!(s.queue_tops()[0].unwrap().id, 4);
    }

    #[test]
    fn error_paths() {
        let mut s = loaded(SchedulerConfig::exact(), [1, 2]);
        assert_eq!(s.insert(1, 1), Err(SchedError::DuplicateResident(1)));
        assert_eq!(s.delete_task(9), Err(SchedError::NotResident(9)));
        s.delete_task(1).unwrap();
        assert_eq!(s.rank_of(2), Some(1));
        assert_eq!(
            s.decrease_key(2, 2),
            Err(SchedError::NonDecreasingKey {
                id: 2,
                current: 2,
                new: 2
            })
        );
        assert_eq!(s.decrease_key(9, 0), Err(SchedError::NotResident(9)));
        s.delete_task(2).unwrap();
        assert!(s.empty());
        assert_eq!(s.approx_get_min(), Err(SchedError::Empty));
        assert!(Scheduler::new(SchedulerConfig::adversarial(0, Default::default(), 0)).is_err());
    }

    #[test]
    fn decrease_key_repositions() {
        let mut s = loaded(SchedulerConfig::exact(), [1, 2]);
        s.insert(10, 10).unwrap();
        s.decrease_key(10, 0).unwrap();
        assert_eq!(s.approx_get_min().unwrap(), (10, 0));
    }

    #[test]
    fn empty_transitions() {
        let mut s = Scheduler::new(SchedulerConfig::exact()).unwrap();
        assert!(s.empty());
        s.insert(1, 1).unwrap();
        assert!(!s.empty());
        s.pop().unwrap();
        assert!(s.empty());
    }

    fn drain(config: SchedulerConfig, n: u32) -> SchedulerTrace {
        let mut s = loaded(config, 1..=n);
        while !s.empty() {
            let (id, _) = s.approx_get_min().unwrap();
            s.delete_task(id).unwrap();
        }
        s.finalize_trace()
    }

    #[test]
    fn multiqueue_single_queue_is_exact() {
        let t = drain(SchedulerConfig::multiqueue(1, 3), 50);
        assert_eq!(t.max_rank_observed, 1);
    }

    proptest! {
        #[test]
        fn exact_matches_binary_heap(ops in proptest::collection::vec((0u32..40, 0u64..1000, any::<bool>()), 1..200)) {
            let mut s = Scheduler::new(SchedulerConfig::exact()).unwrap();
            let mut heap = BinaryHeap::new();
            let mut resident = alloc::collections::BTreeSet::new();
            for (id, p, pop) in ops {
                if pop && !resident.is_empty() {
                    let (got, gp) = s.pop().unwrap();
                    let Reverse((hp, hid)) = heap.pop().unwrap();
                    prop_assert_eq!((got, gp), (hid, hp));
                    resident.remove(&got);
                } else if resident.insert(id) {
                    s.insert(id, p).unwrap();
                    heap.push(Reverse((p, id)));
                }
            }
            prop_assert!(s.trace().per_step.iter().all(|r| r.rank == 1));
        }

        #[test]
        fn adversarial_rank_and_fairness(k in 1u32..9, seed in any::<u64>(), n in 1u32..120, strat in 0usize..3) {
            let cfg = SchedulerConfig::adversarial(k, AdversaryStrategy::ALL[strat], seed);
            let t = drain(cfg, n);
            prop_assert!(t.max_rank_observed <= k);
            prop_assert!(t.per_step.iter().all(|r| r.rank >= 1));
            prop_assert!(t.per_task_inversions.values().all(|&v| v < k));
        }

        #[test]
        fn seeded_runs_are_identical(seed in any::<u64>(), q in 1u32..10) {
            let a = drain(SchedulerConfig::multiqueue(q, seed), 80);
            let b = drain(SchedulerConfig::multiqueue(q, seed), 80);
            prop_assert_eq!(a, b);
            let c = drain(SchedulerConfig::adversarial(3, AdversaryStrategy::RandomTopK, seed), 80);
            let d = drain(SchedulerConfig::adversarial(3, AdversaryStrategy::RandomTopK, seed), 80);
            prop_assert_eq!(c, d);
        }

        #[test]
        fn multiqueue_returns_min_of_sampled_tops(seed in any::<u64>(), q in 1u32..8) {
            let mut s = loaded(SchedulerConfig::multiqueue(q, seed), 1..=60);
            while !s.empty() {
                let tops = s.queue_tops();
                let (id, _) = s.approx_get_min().unwrap();
                let (a, b) = s.last_sample().unwrap();
                if let (Some(x), Some(y)) = (tops[a as usize], tops[b as usize]) {
                    prop_assert_eq!(id, x.min(y).id);
                }
                s.delete_task(id).unwrap();
            }
        }
    }
}
