use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = TrineError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TrineError {
    /// An argument fell outside the domain the operation is defined on.
    #[error("{name} = {value} is outside {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A list of symmetric triples that does not satisfy the two POVM
    /// conditions `sum p = 1` and `sum p sin^2(phi) = 1/3`.
    #[error(
        "triples do not form a POVM: |sum p - 1| = {weight_residual:.3e}, \
         |sum p sin^2(phi) - 1/3| = {lift_residual:.3e}"
    )]
    InvalidTriples { weight_residual: f64, lift_residual: f64 },

    #[error("triple weight must be positive, got {0}")]
    NonPositiveWeight(f64),

    #[error("POVM elements do not sum to the identity (max-entry residual {0:.3e})")]
    Incomplete(f64),

    #[error("alpha = {0} is at or beyond the 8/9 limit of the supported regime")]
    UnsupportedRegime(f64),

    #[error("malformed config record: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TrineError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TrineError::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(TrineError::Domain {
            name,
            value,
            expected: "[0, 1]",
        })
    }
}

pub(crate) fn check_lift_angle(phi: f64) -> Result<()> {
    if (0.0..=std::f64::consts::FRAC_PI_2).contains(&phi) {
        Ok(())
    } else {
        Err(TrineError::Domain {
            name: "phi",
            value: phi,
            expected: "[0, pi/2]",
        })
    }
}
