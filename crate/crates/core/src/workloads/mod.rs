//! Concrete incremental algorithms.

pub mod bst;
pub mod dag;
pub mod delaunay;
pub mod geometry;

pub use bst::{BstSortInstance, BstSortWorkload};
pub use dag::{DagShape, DagWorkload, SyntheticDagInstance};
pub use delaunay::{DelaunayInstance, DelaunayWorkload, Mesh, Vertex};
pub use geometry::Point;

use crate::incremental::{DependencyOracle, WorkloadError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum WorkloadKind {
    BstSort,
    Delaunay,
}

impl WorkloadKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::BstSort => "bst-sort",
            Self::Delaunay => "delaunay",
        }
    }
}

impl core::str::FromStr for WorkloadKind {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bst-sort" | "sort" => Ok(Self::BstSort),
            "delaunay" => Ok(Self::Delaunay),
            _ => Err(WorkloadError::InvalidInstance("unknown workload kind")),
        }
    }
}

/// A generated instance of either random-permutation workload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    BstSort(BstSortInstance),
    Delaunay(DelaunayInstance),
}

impl Instance {
    pub fn len(&self) -> usize {
        match self {
            Self::BstSort(i) => i.len(),
            Self::Delaunay(i) => i.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn oracle(&self) -> &DependencyOracle {
        match self {
            Self::BstSort(i) => i.oracle(),
            Self::Delaunay(i) => i.oracle(),
        }
    }
}

pub fn generate_instance(kind: WorkloadKind, n: usize, seed: u64) -> Result<Instance, WorkloadError> {
    Ok(match kind {
        WorkloadKind::BstSort => Instance::BstSort(BstSortInstance::generate(n, seed)?),
        WorkloadKind::Delaunay => Instance::Delaunay(DelaunayInstance::generate(n, seed)?),
    })
}
