use std::path::PathBuf;

use crate::physics::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("configuration has {} violation(s): {}", .0.len(), join_violations(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("drift matrix is not stable (spectral abscissa {spectral_abscissa:e})")]
    Unstable { spectral_abscissa: f64 },

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix")]
    EigenNoConvergence { dim: usize },

    #[error("stability verdicts disagree: eigenvalue says {eigenvalue}, Lyapunov certificate says {certificate}")]
    StabilityDisagreement { eigenvalue: bool, certificate: bool },

    #[error("unphysical covariance matrix: smallest symplectic eigenvalue {0:e} < 1/2")]
    Unphysical(f64),

    #[error("negative radicand {0:e} in partially transposed symplectic eigenvalue")]
    NegativeRadicand(f64),

    #[error("covariance integration produced non-finite entries at t = {time:e} s")]
    IntegrationBlowup { time: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    /// Process exit code for the CLI: 1 validation, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::InvalidConfig(_) | Error::Parse { .. } => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
