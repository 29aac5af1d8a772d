//! Cached `gamma1` value stored as a small `key = value` text record.
//!
//! ```text
//! # lifted-trine tangent lift
//! gamma1 = 0.0613668873
//! tolerance = 1e-6
//! version = 0.1.0
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::envelope::find_gamma1;
use crate::error::{Result, TrineError};
use crate::reports::write_atomic;

#[derive(Debug, Clone, PartialEq)]
pub struct Gamma1Record {
    pub gamma1: f64,
    pub tolerance: f64,
    pub version: String,
}

impl Gamma1Record {
    pub fn compute(tolerance: f64) -> Result<Self> {
        Ok(Gamma1Record {
            gamma1: find_gamma1(tolerance)?,
            tolerance,
            version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)
            .map_err(|e| TrineError::io(path, e))?
            .parse()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_string().as_bytes())
    }

    /// Loads the record at `path` when it is at least as tight as
    /// `tolerance`; otherwise recomputes and rewrites it.
    pub fn load_or_compute(path: &Path, tolerance: f64) -> Result<Self> {
        if let Ok(record) = Gamma1Record::load(path) {
            if record.tolerance <= tolerance {
                return Ok(record);
            }
        }
        let record = Gamma1Record::compute(tolerance)?;
        record.save(path)?;
        Ok(record)
    }
}

impl fmt::Display for Gamma1Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# lifted-trine tangent lift")?;
        writeln!(f, "gamma1 = {}", self.gamma1)?;
        writeln!(f, "tolerance = {:e}", self.tolerance)?;
        writeln!(f, "version = {}", self.version)
    }
}

impl FromStr for Gamma1Record {
    type Err = TrineError;

    fn from_str(s: &str) -> Result<Self> {
        let (mut gamma1, mut tolerance, mut version) = (None, None, None);
        for line in s.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| TrineError::Config(format!("expected key = value, got {line:?}")))?;
            let value = value.trim();
            let number = || {
                value
                    .parse::<f64>()
                    .map_err(|_| TrineError::Config(format!("{} is not a number: {value:?}", key.trim())))
            };
            match key.trim() {
                "gamma1" => gamma1 = Some(number()?),
                "tolerance" => tolerance = Some(number()?),
                "version" => version = Some(value.to_string()),
                other => return Err(TrineError::Config(format!("unknown key {other:?}"))),
            }
        }
        Ok(Gamma1Record {
            gamma1: gamma1.ok_or_else(|| TrineError::Config("missing gamma1".into()))?,
            tolerance: tolerance.ok_or_else(|| TrineError::Config("missing tolerance".into()))?,
            version: version.ok_or_else(|| TrineError::Config("missing version".into()))?,
        })
    }
}
