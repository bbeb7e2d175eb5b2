use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "U")]
    pub u: f64,
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self { j: 1.0, u: -2.0 }
    }
}

impl LatticeParams {
    /// Validated constructor. The dimer band must not dip into the
    /// two-particle continuum, which requires |U| >= 2J.
    pub fn new(j: f64, u: f64) -> Result<Self> {
        let p = Self { j, u };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j.is_finite() && self.j > 0.0) {
            return Err(Error::InvalidParams(format!("J must be positive, got {}", self.j)));
        }
        if !self.u.is_finite() || self.u.abs() < 2.0 * self.j * (1.0 - 1e-12) {
            return Err(Error::InvalidParams(format!(
                "|U| must be at least 2J (J={}, U={})",
                self.j, self.u
            )));
        }
        Ok(())
    }

    /// Bottom of the two-free-particle continuum.
    pub fn continuum_bottom(&self) -> f64 {
        -2.0 * self.j
    }

    /// Lower and upper edge of the dimer band.
    pub fn dimer_band(&self) -> (f64, f64) {
        (-(4.0 * self.j * self.j + self.u * self.u).sqrt(), -self.u.abs())
    }
}
