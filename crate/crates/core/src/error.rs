use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not antisymmetric (symmetric-part norm {0:e})")]
    NotAntisymmetric(f64),

    #[error("matrix is not a rotation (orthogonality residual {orthogonality:e}, det {det})")]
    NotRotation { orthogonality: f64, det: f64 },

    #[error("quaternion norm {0} deviates from 1")]
    NotUnitQuaternion(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("vector sensor {sensor} produced a degenerate measurement twice")]
    DegenerateMeasurement { sensor: usize },

    #[error("non-finite state at tick {tick}: {what}")]
    NonFinite { tick: usize, what: &'static str },

    #[error("statistics window [{start}, {end}] s selects no samples")]
    EmptyWindow { start: f64, end: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("tick {tick}: {source}")]
    AtTick {
        tick: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::AtTick { source, .. } => source.is_config(),
            e => matches!(
                e,
                Error::Config(_) | Error::Parse { .. } | Error::NotRotation { .. } | Error::NotUnitQuaternion(_)
            ),
        }
    }

    /// Tick at which a simulation failed, if known.
    pub fn tick(&self) -> Option<usize> {
        match self {
            Error::AtTick { tick, .. } | Error::NonFinite { tick, .. } => Some(*tick),
            _ => None,
        }
    }

    pub(crate) fn at_tick(self, tick: usize) -> Self {
        match self {
            e @ (Error::AtTick { .. } | Error::NonFinite { .. }) => e,
            e => Error::AtTick { tick, source: Box::new(e) },
        }
    }
}
