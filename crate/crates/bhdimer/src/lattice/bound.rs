use faer::{Mat, Side};

use super::{LatticeParams, OnSitePotential};
use crate::error::{Error, Result};

/// Single-particle line `[lo, hi]`. A closed end is a hard wall at that
/// site; an open end means the line continues to infinity, and `lo`/`hi`
/// only have to enclose the potential support there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Window {
    pub fn symmetric(half_width: i64) -> Self {
        Self { lo: -half_width, hi: half_width, lo_open: true, hi_open: true }
    }

    /// Default window for a scattering box of radius `n`.
    pub fn for_box(n: i64) -> Self {
        Self::symmetric((4 * n).max(200))
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

/// Bound level with E_b = -J cosh(kappa). `psi` holds the core `[lo, hi]`;
/// on open sides the state continues as an exact exponential tail.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    pub kappa: f64,
    pub lo: i64,
    pub psi: Vec<f64>,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl BoundState {
    pub fn hi(&self) -> i64 {
        self.lo + self.psi.len() as i64 - 1
    }

    pub fn at(&self, m: i64) -> f64 {
        let hi = self.hi();
        if m < self.lo {
            if self.lo_open { self.psi[0] * (-self.kappa * (self.lo - m) as f64).exp() } else { 0.0 }
        } else if m > hi {
            if self.hi_open { self.psi[self.psi.len() - 1] * (-self.kappa * (m - hi) as f64).exp() } else { 0.0 }
        } else {
            self.psi[(m - self.lo) as usize]
        }
    }

    /// Norm over the whole line, tails included.
    pub fn norm_sqr(&self) -> f64 {
        let q = (-2.0 * self.kappa).exp();
        let tail = q / (1.0 - q);
        let mut s: f64 = self.psi.iter().map(|x| x * x).sum();
        if self.lo_open {
            s += self.psi[0].powi(2) * tail;
        }
        if self.hi_open {
            s += self.psi[self.psi.len() - 1].powi(2) * tail;
        }
        s
    }
}

fn core_matrix(v: &OnSitePotential, p: &LatticeParams, lo: i64, n: usize, edge: (f64, f64)) -> Mat<f64> {
    Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            let mut d = v.value(lo + i as i64);
            if i == 0 {
                d += edge.0;
            }
            if i == n - 1 {
                d += edge.1;
            }
            d
        } else if i.abs_diff(j) == 1 {
            -p.j / 2.0
        } else {
            0.0
        }
    })
}

/// Levels below the band, E_b < -J, sorted ascending by energy.
///
/// Outside the support on an open side the eigenfunction is e^{-kappa |m|},
/// which folds into an energy-dependent diagonal term -J/2 e^{-kappa} at the
/// core edge. Each level solves lambda_j(E) = E; lambda_j decreases with E,
/// so bisection brackets every root.
pub fn single_particle_bound_states(v: &OnSitePotential, p: &LatticeParams, window: Window) -> Result<Vec<BoundState>> {
    if window.is_empty() || v.is_repulsive() {
        return Ok(Vec::new());
    }
    let (slo, shi) = v.support();
    if (window.lo_open && slo < window.lo) || (window.hi_open && shi > window.hi) {
        return Err(Error::InvalidParams("potential support extends past an open window end".into()));
    }
    let lo = if window.lo_open { slo.max(window.lo) } else { window.lo };
    let hi = if window.hi_open { shi.min(window.hi) } else { window.hi };
    if hi < lo {
        return Ok(Vec::new());
    }
    let n = (hi - lo + 1) as usize;
    let j = p.j;
    let edge = |e: f64| {
        // e^{-kappa} with cosh(kappa) = -E/J, in the cancellation-free form.
        let x = (-e / j).max(1.0);
        let t = -j / 2.0 / (x + (x * x - 1.0).sqrt());
        (if window.lo_open { t } else { 0.0 }, if window.hi_open { t } else { 0.0 })
    };
    let spectrum = |e: f64| -> Result<(Vec<f64>, Mat<f64>)> {
        let evd = core_matrix(v, p, lo, n, edge(e))
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        Ok(((0..n).map(|i| evd.S()[i]).collect(), evd.U().to_owned()))
    };
    let (at_edge, _) = spectrum(-j)?;
    let count = at_edge.iter().filter(|&&l| l < -j).count();
    let vmin = (lo..=hi).map(|m| v.value(m)).fold(0.0, f64::min);
    let mut out = Vec::with_capacity(count);
    for level in 0..count {
        let (mut a, mut b) = (vmin - 2.0 * j, -j);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if spectrum(mid)?.0[level] > mid {
                a = mid;
            } else {
                b = mid;
            }
        }
        let e = 0.5 * (a + b);
        let kappa = (-e / j).acosh();
        if !(kappa > 1e-6) {
            return Err(Error::PoorLocalization { energy: e, kappa });
        }
        let (_, u) = spectrum(e)?;
        let mut bs = BoundState {
            energy: e,
            kappa,
            lo,
            psi: (0..n).map(|i| u[(i, level)]).collect(),
            lo_open: window.lo_open,
            hi_open: window.hi_open,
        };
        let imax = (0..n).max_by(|&x, &y| bs.psi[x].abs().partial_cmp(&bs.psi[y].abs()).unwrap()).unwrap();
        let s = bs.psi[imax].signum() / bs.norm_sqr().sqrt();
        bs.psi.iter_mut().for_each(|x| *x *= s);
        out.push(bs);
    }
    Ok(out)
}
