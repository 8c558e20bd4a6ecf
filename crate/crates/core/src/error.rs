use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Material constants outside the admissible isotropic range.
    #[error("invalid Lamé parameters: {0}")]
    InvalidParameters(String),

    /// An argument violated an operation's domain (non-unit normal,
    /// point inside a cavity, non-positive radius, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Kernel evaluated at coincident points.
    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    /// The smallness gate `eps < c d` (or a comparable admissibility gate) failed.
    #[error("gate violated: {0}")]
    Gate(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("Neumann series did not converge after {iterations} terms (last increment {increment:e})")]
    Convergence { iterations: usize, increment: f64 },

    /// One or more validation checks exceeded their thresholds.
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Process exit code for the command-line tool: 2 input, 3 gate, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameters(_)
            | Error::Domain(_)
            | Error::Geometry(_)
            | Error::Input(_)
            | Error::Io { .. }
            | Error::Json { .. } => 2,
            Error::Gate(_) | Error::Capacity(_) => 3,
            Error::Singular(_) | Error::Numerical(_) | Error::Convergence { .. } | Error::ChecksFailed { .. } => 4,
        }
    }
}
