use thiserror::Error;

/// Errors produced by the beamforming library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{what} entry {index} has modulus {modulus}, expected 1")]
    NotUnitModulus {
        what: &'static str,
        index: usize,
        modulus: f64,
    },

    /// `Σ|m_j|² = 0`: the DMA radiates nothing and the power scaling is undefined.
    #[error("degenerate beamformer: effective beam has zero energy")]
    DegenerateBeamformer,

    #[error("degenerate problem: {0}")]
    DegenerateProblem(String),

    #[error("grid search needs {size} evaluations, cap is {cap}")]
    GridTooLarge { size: f64, cap: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}
