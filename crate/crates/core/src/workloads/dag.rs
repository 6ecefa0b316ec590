//! Explicit dependency DAGs for controlled experiments.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::incremental::{DependencyOracle, Label, Workload, WorkloadError};

/// Edge generators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DagShape {
    /// No dependencies.
    Empty,
    /// Each pair `i < j` is an edge independently with probability `min(1, c / i)`.
    Tail { c: f64 },
    /// `i -> i + 1`.
    Chain,
    /// Complete `width`-ary tree in label order.
    Fanout { width: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticDagInstance {
    n: usize,
    edges: Vec<(Label, Label)>,
    oracle: DependencyOracle,
}

impl SyntheticDagInstance {
    pub fn from_edges(n: usize, mut edges: Vec<(Label, Label)>) -> Result<Self, WorkloadError> {
        if n == 0 {
            return Err(WorkloadError::InvalidInstance("n must be at least 1"));
        }
        for &(i, j) in &edges {
            if i == 0 || i as usize > n {
                return Err(WorkloadError::LabelOutOfRange(i));
            }
            if j == 0 || j as usize > n {
                return Err(WorkloadError::LabelOutOfRange(j));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let oracle = DependencyOracle::from_edges(n, &edges)?;
        Ok(Self { n, edges, oracle })
    }

    pub fn generate(n: usize, shape: DagShape, seed: u64) -> Result<Self, WorkloadError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        match shape {
            DagShape::Empty => {}
            DagShape::Chain => edges.extend((1..n as Label).map(|i| (i, i + 1))),
            DagShape::Fanout { width } => {
                let w = width.max(1);
                edges.extend((2..=n as Label).map(|j| ((j - 2) / w + 1, j)));
            }
            DagShape::Tail { c } => {
                for j in 2..=n as Label {
                    for i in 1..j {
                        let p = (c / f64::from(i)).min(1.0);
                        if p > 0.0 && rng.random_bool(p) {
                            edges.push((i, j));
                        }
                    }
                }
            }
        }
        Self::from_edges(n, edges)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edges(&self) -> &[(Label, Label)] {
        &self.edges
    }

    pub fn oracle(&self) -> &DependencyOracle {
        &self.oracle
    }

    pub fn workload(&self) -> DagWorkload<'_> {
        DagWorkload {
            instance: self,
            done: vec![false; self.n + 1],
        }
    }
}

#[derive(Clone, Debug)]
pub struct DagWorkload<'a> {
    instance: &'a SyntheticDagInstance,
    done: Vec<bool>,
}

impl Workload for DagWorkload<'_> {
    fn task_count(&self) -> usize {
        self.instance.n
    }

    fn check_dependencies(&self, label: Label) -> bool {
        self.instance.oracle.is_ready(label, &self.done)
    }

    fn process(&mut self, label: Label) -> Result<(), WorkloadError> {
        if self.done[label as usize] {
            return Err(WorkloadError::AlreadyProcessed(label));
        }
        if !self.check_dependencies(label) {
            return Err(WorkloadError::NotReady(label));
        }
        self.done[label as usize] = true;
        Ok(())
    }

    fn oracle(&self) -> &DependencyOracle {
        &self.instance.oracle
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let chain = SyntheticDagInstance::generate(4, DagShape::Chain, 0).unwrap();
        assert_eq!(chain.edges(), &[(1, 2), (2, 3), (3, 4)]);
        let fan = SyntheticDagInstance::generate(5, DagShape::Fanout { width: 2 }, 0).unwrap();
        assert_eq!(fan.edges(), &[(1, 2), (1, 3), (2, 4), (2, 5)]);
        let tail = SyntheticDagInstance::generate(50, DagShape::Tail { c: 1.0 }, 3).unwrap();
        // c / 1 = 1, so label 1 precedes everything
        assert!((2..=50).all(|j| tail.oracle().depends_on(j, 1)));
    }

    #[test]
    fn reversed_edges_rejected() {
        assert!(SyntheticDagInstance::from_edges(3, vec![(2, 1)]).is_err());
        assert!(SyntheticDagInstance::from_edges(3, vec![(1, 9)]).is_err());
    }
}
