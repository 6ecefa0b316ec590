//! Comparison sorting by BST insertion.
//!
//! A task is a key; its dependencies are its ancestors in the BST obtained by
//! inserting keys in label order.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::incremental::{DependencyOracle, Label, Workload, WorkloadError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BstSortInstance {
    /// `keys[l - 1]` is the key of label `l`.
    keys: Vec<i64>,
    /// Parent label in the sequential BST, indexed by `label - 1`.
    parent: Vec<Option<Label>>,
    oracle: DependencyOracle,
}

impl BstSortInstance {
    /// Keys `1..=n` under a uniformly random label permutation.
    pub fn generate(n: usize, seed: u64) -> Result<Self, WorkloadError> {
        if n == 0 {
            return Err(WorkloadError::InvalidInstance("n must be at least 1"));
        }
        let mut keys: Vec<i64> = (1..=n as i64).collect();
        keys.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::from_keys_by_label(keys)
    }

    /// `keys[l - 1]` becomes the key of label `l`. Keys must be distinct.
    pub fn from_keys_by_label(keys: Vec<i64>) -> Result<Self, WorkloadError> {
        let n = keys.len();
        if n == 0 {
            return Err(WorkloadError::InvalidInstance("n must be at least 1"));
        }
        let mut inserted: BTreeMap<i64, Label> = BTreeMap::new();
        let mut parent = vec![None; n];
        for (idx, &key) in keys.iter().enumerate() {
            let label = idx as Label + 1;
            let pred = inserted.range(..key).next_back().map(|(_, &l)| l);
            let succ = inserted.range(key..).next().map(|(&k, &l)| (k, l));
            if let Some((k, _)) = succ {
                if k == key {
                    return Err(WorkloadError::InvalidInstance("duplicate key"));
                }
            }
            // the later-inserted of the two neighbours is the parent
            parent[idx] = match (pred, succ.map(|(_, l)| l)) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
            inserted.insert(key, label);
        }
        let lists = (0..n)
            .map(|idx| {
                let mut anc = Vec::new();
                let mut cur = parent[idx];
                while let Some(p) = cur {
                    anc.push(p);
                    cur = parent[p as usize - 1];
                }
                anc
            })
            .collect();
        Ok(Self {
            keys,
            parent,
            oracle: DependencyOracle::from_lists(lists)?,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, label: Label) -> i64 {
        self.keys[label as usize - 1]
    }

    pub fn keys_by_label(&self) -> &[i64] {
        &self.keys
    }

    pub fn sequential_parent(&self, label: Label) -> Option<Label> {
        self.parent[label as usize - 1]
    }

    /// Ancestors of `label` in the sequential BST, ascending.
    pub fn bst_dependencies(&self, label: Label) -> &[Label] {
        self.oracle.ancestors(label)
    }

    pub fn oracle(&self) -> &DependencyOracle {
        &self.oracle
    }

    pub fn workload(&self) -> BstSortWorkload<'_> {
        BstSortWorkload::new(self)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Node {
    left: Option<Label>,
    right: Option<Label>,
    parent: Option<Label>,
}

/// Live BST built as tasks are processed.
#[derive(Clone, Debug)]
pub struct BstSortWorkload<'a> {
    instance: &'a BstSortInstance,
    nodes: Vec<Node>,
    present: Vec<bool>,
    root: Option<Label>,
}

impl<'a> BstSortWorkload<'a> {
    pub fn new(instance: &'a BstSortInstance) -> Self {
        let n = instance.len();
        Self {
            instance,
            nodes: vec![Node::default(); n + 1],
            present: vec![false; n + 1],
            root: None,
        }
    }

    /// Where `label` would attach: `(parent, goes_left)`; `None` for an empty tree.
    fn descend(&self, label: Label) -> Option<(Label, bool)> {
        let key = self.instance.key(label);
        let mut cur = self.root?;
        loop {
            let left = key < self.instance.key(cur);
            let node = &self.nodes[cur as usize];
            match if left { node.left } else { node.right } {
                Some(next) => cur = next,
                None => return Some((cur, left)),
            }
        }
    }

    pub fn bst_process(&mut self, label: Label) -> Result<(), WorkloadError> {
        if self.present[label as usize] {
            return Err(WorkloadError::AlreadyProcessed(label));
        }
        let slot = self.descend(label);
        if slot.map(|(p, _)| p) != self.instance.sequential_parent(label) {
            return Err(WorkloadError::NotReady(label));
        }
        match slot {
            None => self.root = Some(label),
            Some((p, true)) => self.nodes[p as usize].left = Some(label),
            Some((p, false)) => self.nodes[p as usize].right = Some(label),
        }
        self.nodes[label as usize].parent = slot.map(|(p, _)| p);
        self.present[label as usize] = true;
        Ok(())
    }

    /// Parent of each processed label in the live tree, indexed by `label - 1`.
    pub fn live_parents(&self) -> Vec<Option<Label>> {
        self.nodes[1..].iter().map(|n| n.parent).collect()
    }

    pub fn in_order_keys(&self) -> Vec<i64> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        let mut cur = self.root;
        while cur.is_some() || !stack.is_empty() {
            while let Some(c) = cur {
                stack.push(c);
                cur = self.nodes[c as usize].left;
            }
            let top = stack.pop().unwrap();
            out.push(self.instance.key(top));
            cur = self.nodes[top as usize].right;
        }
        out
    }
}

impl Workload for BstSortWorkload<'_> {
    fn task_count(&self) -> usize {
        self.instance.len()
    }

    /// Ready iff the live insertion path ends at the sequential parent.
    fn check_dependencies(&self, label: Label) -> bool {
        !self.present[label as usize]
            && self.descend(label).map(|(p, _)| p) == self.instance.sequential_parent(label)
    }

    fn process(&mut self, label: Label) -> Result<(), WorkloadError> {
        self.bst_process(label)
    }

    fn oracle(&self) -> &DependencyOracle {
        &self.instance.oracle
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incremental::{run, CheckMode};
    use crate::sched::{AdversaryStrategy, SchedulerConfig};

    #[test]
    fn hand_built_ancestors() {
        let inst = BstSortInstance::from_keys_by_label(vec![50, 30, 70, 20]).unwrap();
        assert!(inst.bst_dependencies(1).is_empty());
        assert_eq!(inst.bst_dependencies(4), &[1, 2]);
        assert_eq!(inst.bst_dependencies(3), &[1]);
    }

    #[test]
    fn duplicate_keys_rejected() {
        assert!(BstSortInstance::from_keys_by_label(vec![3, 1, 3]).is_err());
        assert!(BstSortInstance::generate(0, 1).is_err());
    }

    #[test]
    fn single_task() {
        let inst = BstSortInstance::generate(1, 9).unwrap();
        assert!(inst.bst_dependencies(1).is_empty());
    }

    #[test]
    fn label_order_reproduces_sequential_tree() {
        let inst = BstSortInstance::generate(200, 4).unwrap();
        let mut w = inst.workload();
        for l in 1..=200 {
            assert!(w.check_dependencies(l));
            w.bst_process(l).unwrap();
        }
        let expected: Vec<_> = (1..=200).map(|l| inst.sequential_parent(l)).collect();
        assert_eq!(w.live_parents(), expected);
        assert_eq!(w.in_order_keys(), (1..=200).collect::<Vec<i64>>());
    }

    #[test]
    fn processing_before_ancestor_is_rejected() {
        let inst = BstSortInstance::from_keys_by_label(vec![50, 30, 70, 20]).unwrap();
        let mut w = inst.workload();
        w.bst_process(1).unwrap();
        assert!(!w.check_dependencies(4));
        assert_eq!(w.bst_process(4), Err(WorkloadError::NotReady(4)));
    }

    #[test]
    fn relaxed_run_builds_the_same_tree() {
        let inst = BstSortInstance::generate(8, 77).unwrap();
        for seed in 0..20 {
            let cfg = SchedulerConfig::adversarial(2, AdversaryStrategy::RandomTopK, seed);
            let mut w = inst.workload();
            run(&mut w, &cfg, CheckMode::CrossCheck).unwrap();
            let expected: Vec<_> = (1..=8).map(|l| inst.sequential_parent(l)).collect();
            assert_eq!(w.live_parents(), expected);
        }
    }
}
