use faer::c64;
use serde::{Deserialize, Serialize};

use crate::lattice::{LatticeParams, OnSitePotential, Side};

/// Square two-particle grid [lo, hi]^2. Sites with either coordinate at or
/// beyond the wall are inactive and carry zero amplitude.
#[derive(Debug, Clone)]
pub struct Grid2D {
    pub lo: i64,
    pub hi: i64,
    side: usize,
    pub v: Vec<f64>,
    /// 1D complex absorber profile, added for each particle.
    pub absorber: Vec<c64>,
    blocked: Vec<bool>,
    pub params: LatticeParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Absorber {
    pub width: usize,
    pub strength: f64,
    pub order: i32,
    pub at_lo: bool,
    pub at_hi: bool,
}

impl Default for Absorber {
    fn default() -> Self {
        Self { width: 40, strength: 1.0, order: 4, at_lo: true, at_hi: false }
    }
}

impl Absorber {
    pub fn none() -> Self {
        Self { width: 0, strength: 0.0, order: 4, at_lo: false, at_hi: false }
    }

    /// -i strength d^order with d the fractional depth into the skirt.
    pub fn profile(&self, lo: i64, hi: i64) -> Vec<c64> {
        let w = self.width as i64;
        (lo..=hi)
            .map(|x| {
                let mut d: f64 = 0.0;
                if self.at_lo && w > 0 && x < lo + w {
                    d = d.max((lo + w - x) as f64 / w as f64);
                }
                if self.at_hi && w > 0 && x > hi - w {
                    d = d.max((x - (hi - w)) as f64 / w as f64);
                }
                c64::new(0.0, -self.strength * d.powi(self.order))
            })
            .collect()
    }
}

impl Grid2D {
    pub fn new(lo: i64, hi: i64, v: &OnSitePotential, p: LatticeParams) -> Self {
        assert!(hi > lo, "empty grid");
        let side = (hi - lo + 1) as usize;
        Self {
            lo,
            hi,
            side,
            v: (lo..=hi).map(|m| v.value(m)).collect(),
            absorber: vec![c64::new(0.0, 0.0); side],
            blocked: vec![false; side],
            params: p,
        }
    }

    /// Hard wall: amplitude vanishes whenever a coordinate is at or beyond
    /// `site`, on the side opposite to `open_side`.
    pub fn with_wall(mut self, site: i64, open_side: Side) -> Self {
        for (i, b) in self.blocked.iter_mut().enumerate() {
            let x = self.lo + i as i64;
            *b = match open_side {
                Side::L => x >= site,
                Side::R => x <= site,
            };
        }
        self
    }

    pub fn with_absorber(mut self, a: &Absorber) -> Self {
        self.absorber = a.profile(self.lo, self.hi);
        self
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.side * self.side
    }

    pub fn is_empty(&self) -> bool {
        self.side == 0
    }

    pub fn index(&self, m: i64, n: i64) -> Option<usize> {
        if m < self.lo || m > self.hi || n < self.lo || n > self.hi {
            return None;
        }
        Some((m - self.lo) as usize * self.side + (n - self.lo) as usize)
    }

    pub fn site(&self, i: usize) -> (i64, i64) {
        (self.lo + (i / self.side) as i64, self.lo + (i % self.side) as i64)
    }

    pub fn is_active(&self, i: usize) -> bool {
        !self.blocked[i / self.side] && !self.blocked[i % self.side]
    }

    /// Hermitian on-site energy of site i (absorber excluded).
    pub fn onsite(&self, i: usize) -> f64 {
        let (a, b) = (i / self.side, i % self.side);
        self.v[a] + self.v[b] + if a == b { self.params.u } else { 0.0 }
    }

    /// State with f evaluated on the active sites.
    pub fn sample(&self, f: impl Fn(i64, i64) -> c64) -> Vec<c64> {
        (0..self.len())
            .map(|i| {
                if self.is_active(i) {
                    let (m, n) = self.site(i);
                    f(m, n)
                } else {
                    c64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    /// Hermitian part of H applied to psi.
    pub fn apply_h(&self, psi: &[c64]) -> Vec<c64> {
        let s = self.side;
        let t = -self.params.j / 2.0;
        let mut out = vec![c64::new(0.0, 0.0); self.len()];
        for a in 0..s {
            for b in 0..s {
                let i = a * s + b;
                if !self.is_active(i) {
                    continue;
                }
                let mut acc = psi[i] * self.onsite(i);
                if a > 0 {
                    acc += psi[i - s] * t;
                }
                if a + 1 < s {
                    acc += psi[i + s] * t;
                }
                if b > 0 {
                    acc += psi[i - 1] * t;
                }
                if b + 1 < s {
                    acc += psi[i + 1] * t;
                }
                out[i] = acc;
            }
        }
        out
    }

    pub fn energy(&self, psi: &[c64]) -> f64 {
        let h = self.apply_h(psi);
        let num: f64 = psi.iter().zip(&h).map(|(x, y)| (x.conj() * y).re).sum();
        num / norm_sqr(psi)
    }

    /// max |psi(m,n) - psi(n,m)|
    pub fn symmetry_defect(&self, psi: &[c64]) -> f64 {
        let s = self.side;
        let mut d: f64 = 0.0;
        for a in 0..s {
            for b in a + 1..s {
                d = d.max((psi[a * s + b] - psi[b * s + a]).norm());
            }
        }
        d
    }
}

pub fn norm_sqr(psi: &[c64]) -> f64 {
    psi.iter().map(|x| x.norm_sqr()).sum()
}

/// Rectangle of sites m in [m_lo, m_hi], n in [n_lo, n_hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub m: (i64, i64),
    pub n: (i64, i64),
}

impl Region {
    pub fn square(lo: i64, hi: i64) -> Self {
        Self { m: (lo, hi), n: (lo, hi) }
    }

    pub fn contains(&self, m: i64, n: i64) -> bool {
        (self.m.0..=self.m.1).contains(&m) && (self.n.0..=self.n.1).contains(&n)
    }

    pub fn probability(&self, grid: &Grid2D, psi: &[c64]) -> f64 {
        let mut p = 0.0;
        for m in self.m.0.max(grid.lo)..=self.m.1.min(grid.hi) {
            for n in self.n.0.max(grid.lo)..=self.n.1.min(grid.hi) {
                p += psi[grid.index(m, n).unwrap()].norm_sqr();
            }
        }
        p
    }
}
