//! Generic execution loop for incremental algorithms under a relaxed scheduler.
//!
//! Each loop iteration peeks one task. If all of its ancestors are processed
//! the task is deleted and processed; otherwise the iteration is an extra
//! step, and the step is charged to a label pair by walking the chain of
//! highest-priority unprocessed ancestors.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::sched::{SchedError, Scheduler, SchedulerConfig, SchedulerKind, SchedulerTrace};

/// Task label; `1..=n`, lower is higher priority.
pub type Label = u32;

/// For every label, the sorted list of smaller labels it depends on.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DependencyOracle {
    ancestors: Vec<Vec<Label>>,
}

impl DependencyOracle {
    /// Builds an oracle from per-label ancestor lists (`lists[l - 1]` for label `l`).
    ///
    /// Lists are sorted and deduplicated. Every ancestor must be a smaller label.
    pub fn from_lists(mut lists: Vec<Vec<Label>>) -> Result<Self, WorkloadError> {
        for (idx, list) in lists.iter_mut().enumerate() {
            let label = idx as Label + 1;
            list.sort_unstable();
            list.dedup();
            if let Some(&bad) = list.iter().find(|&&a| a == 0 || a >= label) {
                return Err(WorkloadError::InvalidDependency {
                    ancestor: bad,
                    label,
                });
            }
        }
        Ok(Self { ancestors: lists })
    }

    pub fn from_edges(n: usize, edges: &[(Label, Label)]) -> Result<Self, WorkloadError> {
        let mut lists = vec![Vec::new(); n];
        for &(i, j) in edges {
            if j == 0 || j as usize > n {
                return Err(WorkloadError::LabelOutOfRange(j));
            }
            lists[j as usize - 1].push(i);
        }
        Self::from_lists(lists)
    }

    pub fn task_count(&self) -> usize {
        self.ancestors.len()
    }

    pub fn ancestors(&self, label: Label) -> &[Label] {
        &self.ancestors[label as usize - 1]
    }

    /// Whether `j` depends on `i`.
    pub fn depends_on(&self, j: Label, i: Label) -> bool {
        self.ancestors(j).binary_search(&i).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.ancestors.iter().map(Vec::len).sum()
    }

    /// `processed` is indexed by label (slot 0 unused).
    pub fn is_ready(&self, label: Label, processed: &[bool]) -> bool {
        self.ancestors(label).iter().all(|&a| processed[a as usize])
    }

    /// Highest-priority unprocessed ancestor of `label`.
    pub fn first_unprocessed(&self, label: Label, processed: &[bool]) -> Option<Label> {
        self.ancestors(label)
            .iter()
            .copied()
            .find(|&a| !processed[a as usize])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Label, Label)> + '_ {
        self.ancestors
            .iter()
            .enumerate()
            .flat_map(|(idx, list)| list.iter().map(move |&i| (i, idx as Label + 1)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorkloadError {
    #[error("label {0} is out of range")]
    LabelOutOfRange(Label),
    #[error("label {label} cannot depend on label {ancestor}")]
    InvalidDependency { ancestor: Label, label: Label },
    #[error("label {0} was processed twice")]
    AlreadyProcessed(Label),
    #[error("label {0} processed before its dependencies")]
    NotReady(Label),
    #[error("invalid instance: {0}")]
    InvalidInstance(&'static str),
}

/// An incremental algorithm whose tasks are labelled `1..=n`.
pub trait Workload {
    fn task_count(&self) -> usize;

    /// Structural readiness check against the workload's own live state.
    fn check_dependencies(&self, label: Label) -> bool;

    /// Executes the task. Called at most once per label.
    fn process(&mut self, label: Label) -> Result<(), WorkloadError>;

    /// Normative dependency relation, used for charging and assertion mode.
    fn oracle(&self) -> &DependencyOracle;
}

/// Which readiness test drives the loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CheckMode {
    /// The workload's structural check.
    #[default]
    Structural,
    /// The precomputed dependency oracle.
    Oracle,
    /// Both, failing the run on any disagreement.
    CrossCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Sched(#[from] SchedError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error("no progress after {blocked} consecutive blocked steps (step {step}); dependency relation is broken")]
    Deadlock { step: u64, blocked: u64 },
    #[error("readiness mismatch for label {label} at step {step}: structural={structural}, oracle={oracle}")]
    OracleMismatch {
        step: u64,
        label: Label,
        structural: bool,
        oracle: bool,
    },
    #[error("charge_step called on processable label {0}")]
    NothingToCharge(Label),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChargedPair {
    pub i: Label,
    pub j: Label,
    pub count: u64,
}

/// Totals of one execution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExecutionReport {
    pub n: usize,
    pub total_steps: u64,
    pub extra_steps: u64,
    /// Blocked steps for which no chain could be built (structural/oracle disagreement).
    pub uncharged_steps: u64,
    /// Sorted by `(i, j)`.
    pub charged_pairs: Vec<ChargedPair>,
    pub processed_order: Vec<Label>,
    /// Step at which each label was processed, indexed by `label - 1`.
    pub processed_at: Vec<u64>,
    /// Observed `R_i`, indexed by `label - 1`: returns of a larger label before `i` was processed.
    pub per_label_r: Vec<u64>,
}

impl ExecutionReport {
    /// Steps executed relative to the `n` steps of an exact run.
    pub fn overhead_ratio(&self) -> f64 {
        if self.n == 0 {
            1.0
        } else {
            self.total_steps as f64 / self.n as f64
        }
    }

    pub fn charge_total(&self) -> u64 {
        self.charged_pairs.iter().map(|p| p.count).sum()
    }

    pub fn charges_of(&self, i: Label, j: Label) -> u64 {
        self.charged_pairs
            .binary_search_by(|p| (p.i, p.j).cmp(&(i, j)))
            .map(|idx| self.charged_pairs[idx].count)
            .unwrap_or(0)
    }
}

/// Fenwick tree over labels `1..=n`.
pub(crate) struct LabelCounter {
    tree: Vec<u64>,
}

impl LabelCounter {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
        }
    }

    pub(crate) fn add(&mut self, label: Label) {
        let mut i = label as usize;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of recorded labels `> label`.
    pub(crate) fn count_above(&self, label: Label) -> u64 {
        self.prefix(self.tree.len() as Label - 1) - self.prefix(label)
    }

    /// Count of recorded labels `<= label`.
    pub(crate) fn prefix(&self, label: Label) -> u64 {
        let mut i = (label as usize).min(self.tree.len() - 1);
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        acc
    }
}

/// Walks the highest-priority-unprocessed-ancestor chain from a blocked label
/// and returns the pair `(i, j)` where `i` is ready and is the first
/// unprocessed ancestor of `j`.
pub fn charge_step(
    oracle: &DependencyOracle,
    blocked: Label,
    processed: &[bool],
) -> Result<(Label, Label), RunError> {
    let mut upper = blocked;
    let mut lower = oracle
        .first_unprocessed(blocked, processed)
        .ok_or(RunError::NothingToCharge(blocked))?;
    // invariant: `lower` is the first unprocessed ancestor of `upper`
    while let Some(next) = oracle.first_unprocessed(lower, processed) {
        upper = lower;
        lower = next;
    }
    Ok((lower, upper))
}

/// Runs a workload to completion under a scheduler built from `config`.
pub fn run<W: Workload + ?Sized>(
    workload: &mut W,
    config: &SchedulerConfig,
    mode: CheckMode,
) -> Result<(ExecutionReport, SchedulerTrace), RunError> {
    run_with(workload, Scheduler::new(*config)?, mode)
}

/// Runs a workload with a caller-built (possibly misconfigured) scheduler.
pub fn run_with<W: Workload + ?Sized>(
    workload: &mut W,
    mut sched: Scheduler,
    mode: CheckMode,
) -> Result<(ExecutionReport, SchedulerTrace), RunError> {
    let n = workload.task_count();
    for label in 1..=n as Label {
        sched.insert(label, u64::from(label))?;
    }
    let cfg = *sched.config();
    let deadlock_window = u64::from(match cfg.kind {
        SchedulerKind::Exact => 1,
        SchedulerKind::Adversarial => cfg.k,
        SchedulerKind::Multiqueue => cfg.q.max(cfg.k),
    });

    let mut processed = vec![false; n + 1];
    let mut report = ExecutionReport {
        n,
        processed_at: vec![u64::MAX; n],
        per_label_r: vec![0; n],
        ..Default::default()
    };
    let mut charges: BTreeMap<(Label, Label), u64> = BTreeMap::new();
    let mut returned = LabelCounter::new(n);
    let mut consecutive_blocked = 0u64;
    let mut blocked_top = false;

    while !sched.empty() {
        let (label, _) = sched.approx_get_min()?;
        let step = report.total_steps;
        report.total_steps += 1;

        let ready = match mode {
            CheckMode::Structural => workload.check_dependencies(label),
            CheckMode::Oracle => workload.oracle().is_ready(label, &processed),
            CheckMode::CrossCheck => {
                let structural = workload.check_dependencies(label);
                let oracle = workload.oracle().is_ready(label, &processed);
                if structural != oracle {
                    return Err(RunError::OracleMismatch {
                        step,
                        label,
                        structural,
                        oracle,
                    });
                }
                structural
            }
        };

        if ready {
            sched.delete_task(label)?;
            workload.process(label)?;
            processed[label as usize] = true;
            report.processed_order.push(label);
            report.processed_at[label as usize - 1] = step;
            report.per_label_r[label as usize - 1] = step - returned.prefix(label);
            consecutive_blocked = 0;
            blocked_top = false;
        } else {
            report.extra_steps += 1;
            match charge_step(workload.oracle(), label, &processed) {
                Ok(pair) => *charges.entry(pair).or_insert(0) += 1,
                Err(_) => report.uncharged_steps += 1,
            }
            consecutive_blocked += 1;
            let rank = sched.trace().per_step.last().map_or(0, |r| r.rank);
            blocked_top |= rank == 1;
            if blocked_top && consecutive_blocked >= deadlock_window {
                return Err(RunError::Deadlock {
                    step,
                    blocked: consecutive_blocked,
                });
            }
        }
        returned.add(label);
    }

    report.charged_pairs = charges
        .into_iter()
        .map(|((i, j), count)| ChargedPair { i, j, count })
        .collect();
    Ok((report, sched.finalize_trace()))
}

/// A failed check of one of the deterministic lemmas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LemmaViolation {
    /// A label at least `i + 2k^2` was returned while `i` was unprocessed.
    FarReturn {
        step: u64,
        returned: Label,
        unprocessed: Label,
    },
    /// `R_i > k^2`.
    RBound { label: Label, r: u64, bound: u64 },
}

/// Checks the distance lemma and the `R_i <= k^2` lemma against a finished run.
pub fn assert_lemmas(
    report: &ExecutionReport,
    trace: &SchedulerTrace,
    k: u32,
) -> Vec<LemmaViolation> {
    let k2 = u64::from(k) * u64::from(k);
    let mut out = Vec::new();
    let n = report.n;
    let mut min_unprocessed: usize = 1;
    for rec in &trace.per_step {
        while min_unprocessed <= n && report.processed_at[min_unprocessed - 1] < rec.t {
            min_unprocessed += 1;
        }
        if min_unprocessed > n {
            break;
        }
        if u64::from(rec.label) >= min_unprocessed as u64 + 2 * k2 {
            out.push(LemmaViolation::FarReturn {
                step: rec.t,
                returned: rec.label,
                unprocessed: min_unprocessed as Label,
            });
        }
    }
    for (idx, &r) in report.per_label_r.iter().enumerate() {
        if r > k2 {
            out.push(LemmaViolation::RBound {
                label: idx as Label + 1,
                r,
                bound: k2,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sched::AdversaryStrategy;

    /// Dependencies given by an explicit oracle; structural check = oracle.
    struct Explicit {
        oracle: DependencyOracle,
        done: Vec<bool>,
    }

    impl Explicit {
        fn new(n: usize, edges: &[(Label, Label)]) -> Self {
            Self {
                oracle: DependencyOracle::from_edges(n, edges).unwrap(),
                done: vec![false; n + 1],
            }
        }
    }

    impl Workload for Explicit {
        fn task_count(&self) -> usize {
            self.oracle.task_count()
        }
        fn check_dependencies(&self, label: Label) -> bool {
            self.oracle.is_ready(label, &self.done)
        }
        fn process(&mut self, label: Label) -> Result<(), WorkloadError> {
            if self.done[label as usize] {
                return Err(WorkloadError::AlreadyProcessed(label));
            }
            self.done[label as usize] = true;
            Ok(())
        }
        fn oracle(&self) -> &DependencyOracle {
            &self.oracle
        }
    }

    #[test]
    fn one_level_chain_charge() {
        let o = DependencyOracle::from_edges(3, &[(1, 3)]).unwrap();
        let processed = vec![false; 4];
        assert_eq!(charge_step(&o, 3, &processed).unwrap(), (1, 3));
    }

    #[test]
    fn two_level_chain_charge() {
        // v=3 -> u=2 -> w=1
        let o = DependencyOracle::from_edges(3, &[(1, 2), (2, 3)]).unwrap();
        let processed = vec![false; 4];
        assert_eq!(charge_step(&o, 3, &processed).unwrap(), (1, 2));
        assert!(matches!(
            charge_step(&o, 1, &processed),
            Err(RunError::NothingToCharge(1))
        ));
    }

    #[test]
    fn repeated_blocked_returns_are_charged_each_time() {
        // 3 depends on 2, 2 depends on 1; delay-top with k=4 keeps returning 2
        let mut w = Explicit::new(3, &[(1, 2), (2, 3)]);
        let cfg = SchedulerConfig::adversarial(4, AdversaryStrategy::DelayTop, 0);
        let (report, _) = run(&mut w, &cfg, CheckMode::CrossCheck).unwrap();
        assert_eq!(report.charges_of(1, 2), 3);
        assert_eq!(report.charge_total(), report.extra_steps);
        assert!(report.charges_of(1, 2) <= report.per_label_r[0]);
    }

    #[test]
    fn exact_has_no_extra_steps() {
        let mut w = Explicit::new(5, &[(1, 2), (2, 3), (1, 5)]);
        let (report, trace) = run(&mut w, &SchedulerConfig::exact(), CheckMode::CrossCheck).unwrap();
        assert_eq!(report.extra_steps, 0);
        assert_eq!(report.processed_order, [1, 2, 3, 4, 5]);
        assert_eq!(trace.max_rank_observed, 1);
        assert!(assert_lemmas(&report, &trace, 1).is_empty());
    }

    #[test]
    fn no_dependencies_no_extra_steps() {
        let mut w = Explicit::new(100, &[]);
        let cfg = SchedulerConfig::adversarial(4, AdversaryStrategy::MaxRank, 3);
        let (report, _) = run(&mut w, &cfg, CheckMode::Structural).unwrap();
        assert_eq!(report.extra_steps, 0);
        assert_eq!(report.total_steps, 100);
    }

    /// Label 1 waits on label 2, which is never satisfiable.
    struct Cyclic {
        oracle: DependencyOracle,
    }

    impl Workload for Cyclic {
        fn task_count(&self) -> usize {
            2
        }
        fn check_dependencies(&self, _label: Label) -> bool {
            false
        }
        fn process(&mut self, _label: Label) -> Result<(), WorkloadError> {
            Ok(())
        }
        fn oracle(&self) -> &DependencyOracle {
            &self.oracle
        }
    }

    #[test]
    fn broken_workload_deadlocks() {
        let mut w = Cyclic {
            oracle: DependencyOracle::from_edges(2, &[(1, 2)]).unwrap(),
        };
        let cfg = SchedulerConfig::adversarial(3, AdversaryStrategy::MaxRank, 0);
        assert!(matches!(
            run(&mut w, &cfg, CheckMode::Structural),
            Err(RunError::Deadlock { .. })
        ));
        assert!(matches!(
            run(&mut w, &SchedulerConfig::exact(), CheckMode::Structural),
            Err(RunError::Deadlock { step: 0, .. })
        ));
    }

    #[test]
    fn invalid_oracle_edges_rejected() {
        assert!(DependencyOracle::from_edges(3, &[(2, 2)]).is_err());
        assert!(DependencyOracle::from_edges(3, &[(3, 2)]).is_err());
        assert!(DependencyOracle::from_edges(3, &[(1, 4)]).is_err());
    }

    #[test]
    fn label_counter_prefix() {
        let mut c = LabelCounter::new(8);
        for l in [3, 5, 5, 8] {
            c.add(l);
        }
        assert_eq!(c.prefix(4), 1);
        assert_eq!(c.prefix(5), 3);
        assert_eq!(c.prefix(8), 4);
    }
}
