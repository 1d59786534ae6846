//! The one record of tunable run settings shared by the CLI, the
//! verification suite and the acceptance tests.

use std::path::PathBuf;

use serde::Serialize;

use crate::dynamics::MIN_FIELD_M;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid_m: usize,
    /// Threshold for "numerically zero" eigenvalues and real parts.
    pub kernel_tol: f64,
    pub identity_tol: f64,
    pub dt: f64,
    pub seed: u64,
    /// Where files go; not part of the serialized record, so the same
    /// settings hash the same wherever the output lands.
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid_m: 256,
            kernel_tol: 1e-7,
            identity_tol: 1e-6,
            dt: 1e-3,
            seed: 1,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_m < MIN_FIELD_M || !self.grid_m.is_multiple_of(2) {
            return Err(Error::InvalidGrid {
                m: self.grid_m,
                min: MIN_FIELD_M,
            });
        }
        for (name, v) in [
            ("kernel_tol", self.kernel_tol),
            ("identity_tol", self.identity_tol),
            ("dt", self.dt),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(name, v, "must be positive and finite"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            RunConfig {
                grid_m: 255,
                ..Default::default()
            },
            RunConfig {
                grid_m: 32,
                ..Default::default()
            },
            RunConfig {
                kernel_tol: 0.0,
                ..Default::default()
            },
            RunConfig {
                identity_tol: -1.0,
                ..Default::default()
            },
            RunConfig {
                dt: f64::NAN,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
