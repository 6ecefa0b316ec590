//! Discrete-step simulator of concurrently executing transactions.
//!
//! Workers fetch labels from a transactional scheduler, run each attempt for
//! `duration` steps and try to commit at the end of the last step. Label `u`
//! is available once at least `u - k` smaller labels have committed, which
//! makes the available set the `k` smallest uncommitted labels. Among the
//! available labels that are not running, the scheduler's adversary picks one,
//! but the smallest is forced out before it has been passed over `k` times.
//!
//! An attempt aborts at commit time if an ancestor ran at some point during
//! its interval, or if an ancestor has not committed yet. The aborted label
//! re-enters the scheduler with its original priority.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::incremental::{DependencyOracle, Label, LabelCounter};
use crate::sched::AdversaryStrategy;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, rename_all = "kebab-case"))]
pub struct TxConfig {
    pub k: u32,
    /// Interval-contention bound.
    pub c: u32,
    pub workers: u32,
    /// Steps per attempt.
    pub duration: u32,
    pub seed: u64,
    pub strategy: AdversaryStrategy,
    /// Disabling the availability rule is only meant for negative controls.
    pub availability_rule: bool,
}

impl Default for TxConfig {
    fn default() -> Self {
        Self {
            k: 1,
            c: 1,
            workers: 1,
            duration: 1,
            seed: 0,
            strategy: AdversaryStrategy::MaxRank,
            availability_rule: true,
        }
    }
}

impl TxConfig {
    pub fn new(k: u32, c: u32, workers: u32, strategy: AdversaryStrategy, seed: u64) -> Self {
        Self {
            k,
            c,
            workers,
            strategy,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TxError> {
        if self.k == 0 {
            return Err(TxError::InvalidConfig("k must be at least 1"));
        }
        if self.workers == 0 || self.duration == 0 {
            return Err(TxError::InvalidConfig("workers and duration must be at least 1"));
        }
        if u64::from(self.workers) * u64::from(self.duration) > u64::from(self.c) {
            return Err(TxError::InvalidConfig("workers * duration exceeds contention bound C"));
        }
        Ok(())
    }

    /// Distance beyond which a fetch while a smaller label is uncommitted is impossible.
    pub fn far_distance(&self) -> u64 {
        2 * u64::from(self.k) * (u64::from(self.c) + u64::from(self.k))
    }

    pub fn r_bound(&self) -> u64 {
        u64::from(self.k) * (u64::from(self.k) + u64::from(self.c))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TxError {
    #[error("invalid transaction config: {0}")]
    InvalidConfig(&'static str),
    #[error("instance has no tasks")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TxEventKind {
    Fetch,
    Commit,
    Abort,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TxEvent {
    pub step: u64,
    pub worker: u32,
    #[cfg_attr(feature = "serde", serde(rename = "event"))]
    pub kind: TxEventKind,
    pub label: Label,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AbortCause {
    /// The ancestor ran during the attempt.
    Overlap,
    /// The ancestor had not committed and did not run during the attempt.
    Pending,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AbortRecord {
    pub step: u64,
    pub label: Label,
    pub ancestor: Label,
    pub cause: AbortCause,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TxReport {
    pub n: usize,
    pub commits: u64,
    pub aborts: u64,
    /// Steps until the last commit.
    pub steps: u64,
    /// Indexed by `label - 1`.
    pub per_tx_abort_counts: Vec<u32>,
    /// First step at which each label could be fetched, indexed by `label - 1`.
    pub availability_trace: Vec<u64>,
    pub events: Vec<TxEvent>,
    pub abort_records: Vec<AbortRecord>,
}

#[derive(Clone, Copy, Debug)]
struct Attempt {
    label: Label,
    start: u64,
}

pub fn simulate(oracle: &DependencyOracle, config: &TxConfig) -> Result<TxReport, TxError> {
    config.validate()?;
    let n = oracle.task_count();
    if n == 0 {
        return Err(TxError::Empty);
    }
    let k = config.k as usize;
    let duration = u64::from(config.duration);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut uncommitted: BTreeSet<Label> = (1..=n as Label).collect();
    let mut committed_at = vec![u64::MAX; n + 1];
    let mut running = vec![false; n + 1];
    // `intervals[l]` holds `(start, end)` of finished attempts of `l`
    let mut intervals: Vec<Vec<(u64, u64)>> = vec![Vec::new(); n + 1];
    let mut pending = vec![0u32; n + 1];
    let mut workers: Vec<Option<Attempt>> = vec![None; config.workers as usize];
    let mut report = TxReport {
        n,
        per_tx_abort_counts: vec![0; n],
        availability_trace: vec![u64::MAX; n],
        ..Default::default()
    };
    let mut available_upto = 0usize;
    let mut candidates: Vec<Label> = Vec::new();
    let mut step = 0u64;

    while !uncommitted.is_empty() {
        let frontier = if config.availability_rule {
            uncommitted.iter().nth(k - 1).map_or(n, |&l| l as usize)
        } else {
            n
        };
        for l in available_upto + 1..=frontier {
            report.availability_trace[l - 1] = step;
        }
        available_upto = available_upto.max(frontier);

        for (w, slot) in workers.iter_mut().enumerate() {
            if slot.is_some() {
                continue;
            }
            candidates.clear();
            candidates.extend(
                uncommitted
                    .range(..=frontier as Label)
                    .copied()
                    .filter(|&l| !running[l as usize]),
            );
            let Some(&top) = candidates.first() else {
                break;
            };
            let pick = if pending[top as usize] + 1 >= config.k {
                top
            } else {
                match config.strategy {
                    AdversaryStrategy::MaxRank => *candidates.last().unwrap(),
                    AdversaryStrategy::DelayTop => *candidates.get(1).unwrap_or(&top),
                    AdversaryStrategy::RandomTopK => candidates[rng.random_range(0..candidates.len())],
                }
            };
            if pick != top {
                pending[top as usize] += 1;
            }
            pending[pick as usize] = 0;
            running[pick as usize] = true;
            *slot = Some(Attempt { label: pick, start: step });
            report.events.push(TxEvent {
                step,
                worker: w as u32,
                kind: TxEventKind::Fetch,
                label: pick,
            });
        }

        let mut ending: Vec<(Label, usize, u64)> = workers
            .iter()
            .enumerate()
            .filter_map(|(w, a)| a.filter(|a| a.start + duration - 1 == step).map(|a| (a.label, w, a.start)))
            .collect();
        ending.sort_unstable();
        for (label, w, start) in ending {
            let blocker = conflict(oracle, label, start, step, &committed_at, &running, &intervals);
            workers[w] = None;
            running[label as usize] = false;
            intervals[label as usize].push((start, step));
            let kind = match blocker {
                None => {
                    committed_at[label as usize] = step;
                    uncommitted.remove(&label);
                    report.commits += 1;
                    TxEventKind::Commit
                }
                Some((ancestor, cause)) => {
                    report.aborts += 1;
                    report.per_tx_abort_counts[label as usize - 1] += 1;
                    report.abort_records.push(AbortRecord {
                        step,
                        label,
                        ancestor,
                        cause,
                    });
                    TxEventKind::Abort
                }
            };
            report.events.push(TxEvent {
                step,
                worker: w as u32,
                kind,
                label,
            });
        }
        step += 1;
    }
    report.steps = step;
    Ok(report)
}

/// First ancestor that forces the attempt `[start, end]` of `label` to abort.
fn conflict(
    oracle: &DependencyOracle,
    label: Label,
    start: u64,
    end: u64,
    committed_at: &[u64],
    running: &[bool],
    intervals: &[Vec<(u64, u64)>],
) -> Option<(Label, AbortCause)> {
    let mut pending = None;
    for &a in oracle.ancestors(label) {
        let a_idx = a as usize;
        if committed_at[a_idx] < start {
            continue;
        }
        let overlapped = running[a_idx] || intervals[a_idx].iter().any(|&(s, e)| s <= end && e >= start);
        if overlapped {
            return Some((a, AbortCause::Overlap));
        }
        if committed_at[a_idx] == u64::MAX && pending.is_none() {
            pending = Some((a, AbortCause::Pending));
        }
    }
    pending
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TxViolation {
    /// Fetched before `label - k` smaller labels committed.
    Availability { step: u64, label: Label },
    /// Passed over at least `k` times.
    Fairness { step: u64, label: Label, inv: u32 },
    /// An attempt overlapped more than `C` other attempts.
    Contention { label: Label, start: u64, concurrent: u64 },
    /// Fetched while a label at least `far_distance` smaller was uncommitted.
    FarFetch { step: u64, label: Label, unprocessed: Label },
    RBound { label: Label, r: u64, bound: u64 },
    /// Abort without a matching conflicting ancestor in the log.
    AbortCause { step: u64, label: Label },
    /// The smallest uncommitted label aborted although it was the smallest when fetched.
    TopAborted { step: u64, label: Label },
    /// Events of one worker do not alternate fetch / finish.
    WorkerTimeline { step: u64, worker: u32 },
}

#[derive(Clone, Copy, Debug)]
struct Replayed {
    label: Label,
    start: u64,
    end: u64,
    committed: bool,
    top_at_fetch: bool,
}

/// Replays the event log and checks the scheduler and model properties.
pub fn verify_tx_properties(
    report: &TxReport,
    oracle: &DependencyOracle,
    config: &TxConfig,
) -> Vec<TxViolation> {
    let n = report.n;
    let k = config.k;
    let mut out = Vec::new();
    let mut committed = LabelCounter::new(n);
    let mut committed_at = vec![u64::MAX; n + 1];
    let mut uncommitted: BTreeSet<Label> = (1..=n as Label).collect();
    let mut running = vec![false; n + 1];
    let mut inv = vec![0u32; n + 1];
    let mut larger_fetches = LabelCounter::new(n);
    let mut fetches_before = vec![0u64; n + 1];
    let mut open: Vec<Option<(Label, u64, bool)>> = vec![None; config.workers as usize];
    let mut attempts: Vec<Replayed> = Vec::new();

    for ev in &report.events {
        let l = ev.label as usize;
        let Some(slot) = open.get_mut(ev.worker as usize) else {
            out.push(TxViolation::WorkerTimeline {
                step: ev.step,
                worker: ev.worker,
            });
            continue;
        };
        match ev.kind {
            TxEventKind::Fetch => {
                if slot.is_some() || running[l] || committed_at[l] != u64::MAX {
                    out.push(TxViolation::WorkerTimeline {
                        step: ev.step,
                        worker: ev.worker,
                    });
                }
                let min_unc = *uncommitted.first().unwrap_or(&ev.label);
                let below = committed.prefix(ev.label - 1);
                if below + u64::from(k) < u64::from(ev.label) {
                    out.push(TxViolation::Availability {
                        step: ev.step,
                        label: ev.label,
                    });
                }
                // fairness: the smallest fetchable label is the top
                let frontier = if config.availability_rule {
                    uncommitted.iter().nth(k as usize - 1).copied().unwrap_or(n as Label)
                } else {
                    n as Label
                };
                let top = uncommitted
                    .range(..=frontier)
                    .copied()
                    .find(|&x| !running[x as usize]);
                if let Some(top) = top {
                    if top != ev.label {
                        inv[top as usize] += 1;
                        if inv[top as usize] > k - 1 {
                            out.push(TxViolation::Fairness {
                                step: ev.step,
                                label: top,
                                inv: inv[top as usize],
                            });
                        }
                    }
                }
                inv[l] = 0;
                if u64::from(ev.label) >= u64::from(min_unc) + config.far_distance() {
                    out.push(TxViolation::FarFetch {
                        step: ev.step,
                        label: ev.label,
                        unprocessed: min_unc,
                    });
                }
                // fetches of larger labels so far, sampled at each fetch of `l`
                fetches_before[l] = larger_fetches.count_above(ev.label);
                larger_fetches.add(ev.label);
                running[l] = true;
                *slot = Some((ev.label, ev.step, ev.label == min_unc));
            }
            TxEventKind::Commit | TxEventKind::Abort => {
                match slot.take() {
                    Some((label, start, top_at_fetch)) if label == ev.label => {
                        attempts.push(Replayed {
                            label,
                            start,
                            end: ev.step,
                            committed: ev.kind == TxEventKind::Commit,
                            top_at_fetch,
                        });
                    }
                    _ => out.push(TxViolation::WorkerTimeline {
                        step: ev.step,
                        worker: ev.worker,
                    }),
                }
                running[l] = false;
                if ev.kind == TxEventKind::Commit {
                    committed.add(ev.label);
                    committed_at[l] = ev.step;
                    uncommitted.remove(&ev.label);
                }
            }
        }
    }

    // interval contention: attempts sorted by start; an attempt lasts at most `duration` steps
    attempts.sort_by_key(|a| (a.start, a.label));
    let span = u64::from(config.duration);
    let mut concurrent_with = vec![0u64; attempts.len()];
    for (i, a) in attempts.iter().enumerate() {
        let lo = attempts.partition_point(|b| b.start + span <= a.start);
        let hi = attempts.partition_point(|b| b.start <= a.end);
        let count = attempts[lo..hi]
            .iter()
            .enumerate()
            .filter(|&(j, b)| lo + j != i && b.start <= a.end && b.end >= a.start)
            .count() as u64;
        concurrent_with[i] = count;
        if count > u64::from(config.c) {
            out.push(TxViolation::Contention {
                label: a.label,
                start: a.start,
                concurrent: count,
            });
        }
    }

    // R_i: larger-label fetches before the committing fetch, plus attempts
    // concurrent with any attempt of i
    let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (i, a) in attempts.iter().enumerate() {
        by_label[a.label as usize].push(i);
    }
    let mut seen = vec![usize::MAX; attempts.len()];
    for label in 1..=n {
        let mut r = 0u64;
        for &ai in &by_label[label] {
            let a = attempts[ai];
            if a.committed {
                r += fetches_before[label];
            }
            let lo = attempts.partition_point(|b| b.start + span <= a.start);
            let hi = attempts.partition_point(|b| b.start <= a.end);
            for j in lo..hi {
                let b = attempts[j];
                if b.label as usize != label && b.start <= a.end && b.end >= a.start && seen[j] != label {
                    seen[j] = label;
                    r += 1;
                }
            }
        }
        if r > config.r_bound() {
            out.push(TxViolation::RBound {
                label: label as Label,
                r,
                bound: config.r_bound(),
            });
        }
    }

    for rec in &report.abort_records {
        let Some(a) = attempts
            .iter()
            .find(|a| a.label == rec.label && a.end == rec.step && !a.committed)
        else {
            out.push(TxViolation::AbortCause {
                step: rec.step,
                label: rec.label,
            });
            continue;
        };
        let anc = rec.ancestor as usize;
        let confirmed = oracle.depends_on(rec.label, rec.ancestor)
            && match rec.cause {
                AbortCause::Overlap => by_label[anc]
                    .iter()
                    .any(|&j| attempts[j].start <= a.end && attempts[j].end >= a.start),
                AbortCause::Pending => committed_at[anc] > rec.step,
            };
        if !confirmed {
            out.push(TxViolation::AbortCause {
                step: rec.step,
                label: rec.label,
            });
        }
        if a.top_at_fetch {
            out.push(TxViolation::TopAborted {
                step: rec.step,
                label: rec.label,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::{DagShape, SyntheticDagInstance};

    #[test]
    fn no_dependencies_no_aborts() {
        let inst = SyntheticDagInstance::generate(200, DagShape::Empty, 0).unwrap();
        let cfg = TxConfig::new(4, 8, 8, AdversaryStrategy::RandomTopK, 1);
        let r = simulate(inst.oracle(), &cfg).unwrap();
        assert_eq!(r.aborts, 0);
        assert_eq!(r.commits, 200);
        assert!(verify_tx_properties(&r, inst.oracle(), &cfg).is_empty());
    }

    #[test]
    fn serial_exact_never_aborts() {
        let inst = SyntheticDagInstance::generate(100, DagShape::Chain, 0).unwrap();
        let cfg = TxConfig::new(1, 1, 1, AdversaryStrategy::MaxRank, 0);
        let r = simulate(inst.oracle(), &cfg).unwrap();
        assert_eq!(r.aborts, 0);
        assert_eq!(r.steps, 100);
        let order: Vec<_> = r
            .events
            .iter()
            .filter(|e| e.kind == TxEventKind::Commit)
            .map(|e| e.label)
            .collect();
        assert_eq!(order, (1..=100).collect::<Vec<_>>());
    }

    #[test]
    fn chain_with_parallel_workers_aborts_and_completes() {
        let inst = SyntheticDagInstance::generate(50, DagShape::Chain, 0).unwrap();
        let cfg = TxConfig::new(3, 4, 4, AdversaryStrategy::MaxRank, 0);
        let r = simulate(inst.oracle(), &cfg).unwrap();
        assert_eq!(r.commits, 50);
        assert!(r.aborts > 0);
        assert_eq!(verify_tx_properties(&r, inst.oracle(), &cfg), []);
    }

    #[test]
    fn contention_config_validated() {
        let cfg = TxConfig::new(2, 3, 4, AdversaryStrategy::MaxRank, 0);
        assert!(cfg.validate().is_err());
        let cfg = TxConfig {
            duration: 2,
            ..TxConfig::new(2, 8, 4, AdversaryStrategy::MaxRank, 0)
        };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn first_k_available_at_start() {
        let inst = SyntheticDagInstance::generate(10, DagShape::Empty, 0).unwrap();
        let cfg = TxConfig::new(3, 1, 1, AdversaryStrategy::MaxRank, 0);
        let r = simulate(inst.oracle(), &cfg).unwrap();
        assert_eq!(&r.availability_trace[..3], &[0, 0, 0]);
        assert!(r.availability_trace[3] > 0);
        // max-rank picks label 3 first
        assert_eq!(r.events[0].label, 3);
    }
}
