//! Relaxed priority schedulers.
//!
//! A scheduler holds `(task, priority)` pairs and exposes the peek/delete
//! split used by the incremental execution loop: [`Scheduler::approx_get_min`]
//! returns a resident task without removing it and
//! [`Scheduler::delete_task`] removes it once the caller decides to process
//! it. Three selection policies share one instrumented pool:
//!
//! * `exact`: always the minimum key.
//! * `adversarial`: any key of rank at most `k`, picked by an
//!   [`AdversaryStrategy`], but the minimum key is forced out before it has
//!   been passed over `k` times.
//! * `multiqueue`: `q` sequential queues; inserts go to a seeded home queue
//!   and a peek samples two queues and returns the smaller of their tops.
//!
//! Every peek is recorded in a [`SchedulerTrace`] with the rank of the
//! returned key among all resident keys.

mod scheduler;

pub use scheduler::Scheduler;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

/// Identity of a task inside one scheduler.
pub type TaskId = u32;

/// Priority key; lower is more urgent.
pub type Priority = u64;

/// Total order used by every scheduler: priority first, then task id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub priority: Priority,
    pub id: TaskId,
}

impl Key {
    pub fn new(priority: Priority, id: TaskId) -> Self {
        Self { priority, id }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SchedulerKind {
    Exact,
    Adversarial,
    Multiqueue,
}

/// How an adversarial scheduler picks among the top `k` keys.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AdversaryStrategy {
    /// Return the key of rank `min(k, len)`.
    #[default]
    MaxRank,
    /// Return the rank-2 key until the top key's last allowed opportunity.
    DelayTop,
    /// Uniform over the top `min(k, len)` keys.
    RandomTopK,
}

impl AdversaryStrategy {
    pub const ALL: [AdversaryStrategy; 3] = [Self::MaxRank, Self::DelayTop, Self::RandomTopK];

    pub fn name(self) -> &'static str {
        match self {
            Self::MaxRank => "max-rank",
            Self::DelayTop => "delay-top",
            Self::RandomTopK => "random-top-k",
        }
    }
}

impl core::str::FromStr for AdversaryStrategy {
    type Err = SchedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max-rank" => Ok(Self::MaxRank),
            "delay-top" => Ok(Self::DelayTop),
            "random-top-k" => Ok(Self::RandomTopK),
            _ => Err(SchedError::InvalidConfig("unknown adversary strategy")),
        }
    }
}

impl SchedulerKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Adversarial => "adversarial",
            Self::Multiqueue => "multiqueue",
        }
    }
}

impl core::str::FromStr for SchedulerKind {
    type Err = SchedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "adversarial" => Ok(Self::Adversarial),
            "multiqueue" => Ok(Self::Multiqueue),
            _ => Err(SchedError::InvalidConfig("unknown scheduler kind")),
        }
    }
}

/// Scheduler construction parameters. The seed fixes every random choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, rename_all = "kebab-case"))]
pub struct SchedulerConfig {
    pub kind: SchedulerKind,
    /// Relaxation factor; forced to 1 for the exact scheduler.
    pub k: u32,
    /// Queue count, multiqueue only.
    pub q: u32,
    pub strategy: AdversaryStrategy,
    pub seed: u64,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self::exact()
    }
}

impl SchedulerConfig {
    pub fn exact() -> Self {
        Self {
            kind: SchedulerKind::Exact,
            k: 1,
            q: 1,
            strategy: AdversaryStrategy::MaxRank,
            seed: 0,
        }
    }

    pub fn adversarial(k: u32, strategy: AdversaryStrategy, seed: u64) -> Self {
        Self {
            kind: SchedulerKind::Adversarial,
            k,
            q: 1,
            strategy,
            seed,
        }
    }

    pub fn multiqueue(q: u32, seed: u64) -> Self {
        Self {
            kind: SchedulerKind::Multiqueue,
            k: 1,
            q,
            strategy: AdversaryStrategy::MaxRank,
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SchedError> {
        if self.k == 0 {
            return Err(SchedError::InvalidConfig("k must be at least 1"));
        }
        if self.q == 0 {
            return Err(SchedError::InvalidConfig("q must be at least 1"));
        }
        if self.kind == SchedulerKind::Exact && self.k != 1 {
            return Err(SchedError::InvalidConfig("exact scheduler requires k = 1"));
        }
        Ok(())
    }

    /// Relaxation factor the deterministic guarantees are stated against.
    pub fn relaxation(&self) -> u32 {
        match self.kind {
            SchedulerKind::Exact => 1,
            _ => self.k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchedError {
    #[error("scheduler is empty")]
    Empty,
    #[error("task {0} is already resident")]
    DuplicateResident(TaskId),
    #[error("task {0} is not resident")]
    NotResident(TaskId),
    #[error("decrease_key on task {id}: new priority {new} is not below current {current}")]
    NonDecreasingKey {
        id: TaskId,
        current: Priority,
        new: Priority,
    },
    #[error("invalid scheduler config: {0}")]
    InvalidConfig(&'static str),
    #[error("rank bound violated at step {step}: rank {rank} > k = {k}")]
    RankBound { step: u64, rank: u32, k: u32 },
    #[error("fairness violated for task {id}: passed over {inv} times with window {window}")]
    Fairness { id: TaskId, inv: u32, window: u32 },
}

/// One `approx_get_min` call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    pub t: u64,
    pub label: TaskId,
    pub rank: u32,
}

/// Per-step ranks and per-task inversion counts of one scheduler run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SchedulerTrace {
    pub per_step: Vec<StepRecord>,
    /// inv(u) for every task that was returned while it was the minimum.
    /// A task id that became resident several times keeps its largest value.
    pub per_task_inversions: BTreeMap<TaskId, u32>,
    pub max_rank_observed: u32,
    /// `inversion_histogram[v]` counts finalized inv values equal to `v`.
    pub inversion_histogram: Vec<u64>,
}

impl SchedulerTrace {
    pub fn steps(&self) -> u64 {
        self.per_step.len() as u64
    }

    pub fn max_inversion(&self) -> u32 {
        self.per_task_inversions.values().copied().max().unwrap_or(0)
    }

    /// Smallest `k` for which this trace satisfies both RankBound and Fairness.
    pub fn effective_relaxation(&self) -> u32 {
        self.max_rank_observed.max(self.max_inversion() + 1).max(1)
    }
}
