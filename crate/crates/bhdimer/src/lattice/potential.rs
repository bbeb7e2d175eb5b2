use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values below this magnitude are treated as exact zeros.
const GAUSS_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialKind {
    Gaussian {
        #[serde(rename = "V")]
        v: f64,
        sigma: f64,
        #[serde(default)]
        center: i64,
    },
    Point {
        #[serde(rename = "V")]
        v: f64,
        #[serde(default)]
        center: i64,
    },
    Table { values: Vec<(i64, f64)> },
}

/// On-site potential with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct OnSitePotential {
    kind: PotentialKind,
    center: i64,
    support_radius: i64,
}

impl OnSitePotential {
    pub fn new(kind: PotentialKind) -> Result<Self> {
        let (center, support_radius) = match &kind {
            PotentialKind::Gaussian { v, sigma, center } => {
                if !v.is_finite() || !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::InvalidParams(format!("bad gaussian V={v} sigma={sigma}")));
                }
                let r = if *v == 0.0 {
                    0
                } else {
                    let x2 = 2.0 * sigma * sigma * (v.abs() / GAUSS_CUTOFF).ln();
                    let mut r = x2.max(0.0).sqrt().floor() as i64;
                    while (v * (-((r + 1) as f64).powi(2) / (2.0 * sigma * sigma)).exp()).abs()
                        >= GAUSS_CUTOFF
                    {
                        r += 1;
                    }
                    while r > 0
                        && (v * (-(r as f64).powi(2) / (2.0 * sigma * sigma)).exp()).abs()
                            < GAUSS_CUTOFF
                    {
                        r -= 1;
                    }
                    r
                };
                (*center, r)
            }
            PotentialKind::Point { v, center } => {
                if !v.is_finite() {
                    return Err(Error::InvalidParams(format!("bad point V={v}")));
                }
                (*center, 0)
            }
            PotentialKind::Table { values } => {
                if values.iter().any(|(_, x)| !x.is_finite()) {
                    return Err(Error::InvalidParams("non-finite table entry".into()));
                }
                let nz: Vec<i64> = values.iter().filter(|(_, x)| *x != 0.0).map(|(m, _)| *m).collect();
                match (nz.iter().min(), nz.iter().max()) {
                    (Some(&lo), Some(&hi)) => {
                        let c = (lo + hi).div_euclid(2);
                        (c, (hi - c).max(c - lo))
                    }
                    _ => (0, 0),
                }
            }
        };
        Ok(Self { kind, center, support_radius })
    }

    pub fn gaussian(v: f64, sigma: f64) -> Result<Self> {
        Self::new(PotentialKind::Gaussian { v, sigma, center: 0 })
    }

    pub fn point(v: f64) -> Result<Self> {
        Self::new(PotentialKind::Point { v, center: 0 })
    }

    pub fn zero() -> Self {
        Self::new(PotentialKind::Point { v: 0.0, center: 0 }).unwrap()
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn center(&self) -> i64 {
        self.center
    }

    pub fn support_radius(&self) -> i64 {
        self.support_radius
    }

    /// Sites `[lo, hi]` outside which v vanishes identically.
    pub fn support(&self) -> (i64, i64) {
        (self.center - self.support_radius, self.center + self.support_radius)
    }

    pub fn value(&self, m: i64) -> f64 {
        if (m - self.center).abs() > self.support_radius {
            return 0.0;
        }
        match &self.kind {
            PotentialKind::Gaussian { v, sigma, center } => {
                let d = (m - center) as f64;
                v * (-d * d / (2.0 * sigma * sigma)).exp()
            }
            PotentialKind::Point { v, center } => {
                if m == *center {
                    *v
                } else {
                    0.0
                }
            }
            PotentialKind::Table { values } => {
                values.iter().filter(|(s, _)| *s == m).map(|(_, x)| x).sum()
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        let (lo, hi) = self.support();
        (lo..=hi).all(|m| self.value(m) == 0.0)
    }

    /// True when v >= 0 everywhere, so no state can bind below the band.
    pub fn is_repulsive(&self) -> bool {
        let (lo, hi) = self.support();
        (lo..=hi).all(|m| self.value(m) >= 0.0)
    }
}
