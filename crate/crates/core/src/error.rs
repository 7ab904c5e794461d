use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the channel model, the design routines and the sweep harness.
#[derive(Debug, Error)]
pub enum HrisError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate channel: overall BS-UE channel has zero norm")]
    DegenerateChannel,

    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),

    #[error("oracle scale exceeded: {0}")]
    OracleScale(String),

    #[error("internal consistency violated: {0}")]
    InternalConsistency(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("trial {trial} (seed {seed:#018x}) failed: {source}")]
    Trial {
        trial: usize,
        seed: u64,
        #[source]
        source: Box<HrisError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, HrisError>;
