use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot parse {what}: {detail}")]
    Parse { what: String, detail: String },

    #[error("model invariant violated ({invariant}): {detail}")]
    Validation { invariant: &'static str, detail: String },

    #[error("inertia tensor is singular; the nonlinear-molecule formalism does not apply")]
    NonLinear,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension {dim} exceeds the limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("matrix is not Hermitian: anti-Hermitian residue {residue:.3e} cm^-1")]
    NotHermitian { residue: f64 },

    #[error("near-degenerate perturbation denominator {denominator:.4} cm^-1 between {state} and {other}")]
    Resonance {
        state: String,
        other: String,
        denominator: f64,
    },

    #[error("overlap matrix keeps rank {rank}, fewer than the {requested} states requested")]
    RankDeficient { rank: usize, requested: usize },

    #[error("all probability mass has the wrong parity")]
    EmptyParitySector,

    #[error("iterative eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Failures of the input data rather than of the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation { .. }
                | Error::InvalidArgument(_)
                | Error::Io { .. }
                | Error::DimensionLimit { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
