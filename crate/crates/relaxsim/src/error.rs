use std::path::PathBuf;

use relaxsim_core::sssp::{GraphError, SsspError};
use relaxsim_core::txsim::TxError;
use relaxsim_core::{RunError, SchedError, WorkloadError};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Violation(String),
    #[error(transparent)]
    Run(#[from] RunError),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Self::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// 1 for violated properties, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Violation(_) | Self::Run(_) => 1,
            Self::Io { .. } | Self::Parse { .. } | Self::Input(_) => 2,
        }
    }
}

impl From<SchedError> for HarnessError {
    fn from(e: SchedError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<WorkloadError> for HarnessError {
    fn from(e: WorkloadError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<GraphError> for HarnessError {
    fn from(e: GraphError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<TxError> for HarnessError {
    fn from(e: TxError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<SsspError> for HarnessError {
    fn from(e: SsspError) -> Self {
        match e {
            SsspError::Graph(g) => g.into(),
            SsspError::Sched(s) => s.into(),
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
