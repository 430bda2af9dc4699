use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("initial state is degenerate: all expansion coefficients vanish")]
    DegenerateState,

    #[error("matrix is not Hermitian: max |A - A^H| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("pair ({0}, {1}) appears in more than one frequency group")]
    OverlappingGroups(usize, usize),

    #[error("integration blew up at step {step} (t = {time}): non-finite density matrix")]
    Blowup { step: usize, time: f64 },

    #[error("imaginary residue {residue:e} in {what} exceeds tolerance; Hermiticity drift")]
    HermiticityDrift { what: &'static str, residue: f64 },

    #[error("time grids do not align: {0}")]
    Alignment(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
