use std::sync::Arc;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    build_channel_set_at, single_particle_bound_states, BoundState, ChannelSet, LatticeParams,
    OnSitePotential, Side, Sides, Window,
};
use crate::linalg::CMat;
use crate::scattering::{build_couplings, build_effective_hamiltonian, EffectiveHamiltonian, InteriorBox, Tamper};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapGeometry {
    /// First site of the hard wall; amplitude vanishes here and beyond.
    pub wall_site: i64,
    pub open_side: Side,
    /// Box radius on the open side.
    #[serde(rename = "N")]
    pub n: i64,
    /// Inclusive site range of the trap interior.
    pub interior: (i64, i64),
}

impl Default for TrapGeometry {
    fn default() -> Self {
        Self { wall_site: 15, open_side: Side::L, n: 10, interior: (1, 14) }
    }
}

#[derive(Debug, Clone)]
pub struct TrapConfig {
    pub geometry: TrapGeometry,
    pub barrier: OnSitePotential,
    pub params: LatticeParams,
}

impl TrapConfig {
    pub fn default_with_barrier(v: f64, sigma: f64) -> Result<Self> {
        Ok(Self {
            geometry: TrapGeometry::default(),
            barrier: OnSitePotential::gaussian(v, sigma)?,
            params: LatticeParams::default(),
        })
    }

    /// Box edges (lo, hi), wall excluded.
    pub fn box_range(&self) -> (i64, i64) {
        let g = &self.geometry;
        match g.open_side {
            Side::L => (-g.n, g.wall_site - 1),
            Side::R => (g.wall_site + 1, g.n),
        }
    }

    pub fn with_radius(&self, n: i64) -> Self {
        let mut c = self.clone();
        c.geometry.n = n;
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let (lo, hi) = self.box_range();
        let (slo, shi) = self.barrier.support();
        if hi <= lo {
            return Err(Error::InvalidParams("empty trap box".into()));
        }
        if slo <= lo || shi >= hi {
            return Err(Error::InvalidParams(format!(
                "barrier support [{slo}, {shi}] not strictly inside box [{lo}, {hi}]"
            )));
        }
        let (a, b) = self.geometry.interior;
        if a > b || a < lo || b > hi {
            return Err(Error::InvalidParams(format!("trap interior [{a}, {b}] outside box")));
        }
        Ok(())
    }
}

/// Prepared trap: interior box, bound states of the walled potential and
/// the spectral decomposition of the closed-box Hamiltonian.
pub struct Trap {
    pub config: TrapConfig,
    pub bx: InteriorBox,
    pub bound: Vec<Arc<BoundState>>,
    evals: Vec<f64>,
    evecs: Mat<f64>,
    /// Box indices of the open boundary rows.
    boundary: Vec<usize>,
}

/// Boundary terms of H_eff(z) in the form U F Ud^T, restricted to the
/// boundary rows.
pub struct LowRank {
    pub factors: Vec<c64>,
    /// Columns on the boundary index list (len = boundary rows).
    pub u: Vec<Vec<c64>>,
    pub ud: Vec<Vec<c64>>,
    pub channels: ChannelSet,
}

impl Trap {
    pub fn new(config: TrapConfig) -> Result<Self> {
        config.validate()?;
        let (lo, hi) = config.box_range();
        let p = config.params;
        let g = &config.geometry;
        let w = (4 * g.n).max(200);
        let window = match g.open_side {
            Side::L => Window { lo: lo - w, hi, lo_open: true, hi_open: false },
            Side::R => Window { lo, hi: hi + w, lo_open: false, hi_open: true },
        };
        let bound = single_particle_bound_states(&config.barrier, &p, window)?
            .into_iter()
            .map(Arc::new)
            .collect();
        let bx = InteriorBox::new(lo, hi, &config.barrier, &p);
        let evd = bx
            .h0()
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let evals: Vec<f64> = (0..bx.dim()).map(|i| evd.S()[i]).collect();
        let evecs = evd.U().to_owned();
        let edge = bx.edge(g.open_side);
        let mut boundary = Vec::new();
        for x in lo..=hi {
            boundary.push(bx.index(edge, x).unwrap());
            if x != edge {
                boundary.push(bx.index(x, edge).unwrap());
            }
        }
        boundary.sort_unstable();
        Ok(Self { config, bx, bound, evals, evecs, boundary })
    }

    pub fn params(&self) -> &LatticeParams {
        &self.config.params
    }

    pub fn dim(&self) -> usize {
        self.bx.dim()
    }

    /// Eigenvalues of the closed-box Hamiltonian, ascending.
    pub fn box_spectrum(&self) -> &[f64] {
        &self.evals
    }

    /// |<phi_k|psi>|^2 over the closed-box eigenstates, in `box_spectrum` order.
    pub fn spectral_weights(&self, psi: &[c64]) -> Vec<f64> {
        (0..self.dim())
            .map(|k| psi.iter().enumerate().map(|(i, x)| x * self.evecs[(i, k)]).sum::<c64>().norm_sqr())
            .collect()
    }

    pub fn interior_mask(&self) -> Vec<bool> {
        let (a, b) = self.config.geometry.interior;
        (0..self.dim())
            .map(|i| {
                let (m, n) = self.bx.site(i);
                (a..=b).contains(&m) && (a..=b).contains(&n)
            })
            .collect()
    }

    pub fn channels_at(&self, z: c64) -> Result<ChannelSet> {
        let j = self.config.params.j;
        if z.im.abs() >= 0.5 * j {
            return Err(Error::ContinuationFailure(format!("|Im z| = {} exceeds 0.5J", z.im.abs())));
        }
        let (lo, hi) = self.config.params.dimer_band();
        if z.re < lo || z.re > hi {
            return Err(Error::ContinuationFailure(format!("Re z = {} outside the dimer band", z.re)));
        }
        build_channel_set_at(z, &self.bound, &self.config.params, Sides::Only(self.config.geometry.open_side))
    }

    /// Full effective Hamiltonian at complex energy z.
    pub fn heff(&self, z: c64) -> Result<EffectiveHamiltonian> {
        let ch = self.channels_at(z)?;
        Ok(build_effective_hamiltonian(&self.bx, &ch, &self.config.params, Tamper::default()))
    }

    pub fn low_rank(&self, z: c64) -> Result<LowRank> {
        let ch = self.channels_at(z)?;
        let couplings = build_couplings(&self.bx, &ch, &self.config.params);
        let mut lr = LowRank { factors: vec![], u: vec![], ud: vec![], channels: ch };
        for c in &couplings {
            lr.factors.push(c.factor);
            lr.u.push(self.boundary.iter().map(|&i| c.u[i]).collect());
            lr.ud.push(self.boundary.iter().map(|&i| c.u_dual[i]).collect());
        }
        Ok(lr)
    }

    /// Q^T x for a vector supported on the boundary rows.
    fn project_boundary(&self, x: &[c64]) -> Vec<c64> {
        let d = self.dim();
        let mut out = vec![c64::new(0.0, 0.0); d];
        for (bi, &i) in self.boundary.iter().enumerate() {
            let xi = x[bi];
            for (k, o) in out.iter_mut().enumerate() {
                *o += xi * self.evecs[(i, k)];
            }
        }
        out
    }

    /// Pieces of the Woodbury identity at z: eigenbasis images of the
    /// boundary columns and resolvent weights 1/(lambda_k - z).
    fn spectral(&self, z: c64, lr: &LowRank) -> (Vec<Vec<c64>>, Vec<Vec<c64>>, Vec<c64>) {
        let bu: Vec<Vec<c64>> = lr.u.iter().map(|u| self.project_boundary(u)).collect();
        let bd: Vec<Vec<c64>> = lr.ud.iter().map(|u| self.project_boundary(u)).collect();
        let dinv: Vec<c64> = self.evals.iter().map(|&l| (c64::new(l, 0.0) - z).inv()).collect();
        (bu, bd, dinv)
    }

    /// Capacitance matrix M(z) = F^{-1} - Ud^T (H0 - z)^{-1} U. Poles of the
    /// trap are the zeros of det M.
    pub fn capacitance(&self, z: c64) -> Result<CMat> {
        let lr = self.low_rank(z)?;
        let (bu, bd, dinv) = self.spectral(z, &lr);
        Ok(capacitance_from(&lr.factors, &bu, &bd, &dinv))
    }

    /// <e0|(H_eff(E) - E)^{-1}|e0> for the site (n0, n0).
    pub fn response_at(&self, e: f64, n0: i64) -> Result<c64> {
        let z = c64::new(e, 0.0);
        let i0 = self
            .bx
            .index(n0, n0)
            .ok_or_else(|| Error::InvalidParams(format!("driving site {n0} outside box")))?;
        let lr = self.low_rank(z)?;
        let (bu, bd, dinv) = self.spectral(z, &lr);
        let m = capacitance_from(&lr.factors, &bu, &bd, &dinv);
        let a: Vec<f64> = (0..self.dim()).map(|k| self.evecs[(i0, k)]).collect();
        let mut g0 = c64::new(0.0, 0.0);
        for k in 0..self.dim() {
            g0 += dinv[k] * a[k] * a[k];
        }
        let r = bu.len();
        let left: Vec<c64> = (0..r).map(|j| (0..self.dim()).map(|k| a[k] * dinv[k] * bu[j][k]).sum()).collect();
        let right: Vec<c64> = (0..r).map(|j| (0..self.dim()).map(|k| bd[j][k] * dinv[k] * a[k]).sum()).collect();
        let y = small_solve(&m, &right).ok_or(Error::SingularSystem { cond: f64::INFINITY })?;
        let corr: c64 = left.iter().zip(&y).map(|(l, y)| l * y).sum();
        Ok(g0 + corr)
    }

    /// Right and left null vectors of H_eff(z) - z built from null vectors of
    /// the capacitance matrix, plus the smallest and second-smallest singular
    /// values of M(z), normalised by its largest one.
    pub fn null_vectors(&self, z: c64) -> Result<(Vec<c64>, Vec<c64>, f64, f64)> {
        let lr = self.low_rank(z)?;
        let (bu, bd, dinv) = self.spectral(z, &lr);
        let m = capacitance_from(&lr.factors, &bu, &bd, &dinv);
        let svd = m.svd().map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let r = m.nrows();
        let s = svd.S();
        let smax = s[0].re.max(1e-300);
        let s_min = s[r - 1].re / smax;
        let s_next = if r > 1 { s[r - 2].re / smax } else { f64::INFINITY };
        // M t = 0 with t the last right singular vector; t_L^T M = 0 with
        // t_L the conjugate of the last left singular vector.
        let t: Vec<c64> = (0..r).map(|i| svd.V()[(i, r - 1)]).collect();
        let tl: Vec<c64> = (0..r).map(|i| svd.U()[(i, r - 1)].conj()).collect();
        let d = self.dim();
        let mut cr = vec![c64::new(0.0, 0.0); d];
        let mut cl = vec![c64::new(0.0, 0.0); d];
        for k in 0..d {
            let mut a = c64::new(0.0, 0.0);
            let mut b = c64::new(0.0, 0.0);
            for j in 0..r {
                a += bu[j][k] * t[j];
                b += bd[j][k] * tl[j];
            }
            cr[k] = a * dinv[k];
            cl[k] = b * dinv[k];
        }
        let back = |cf: &[c64]| -> Vec<c64> {
            let mut v = vec![c64::new(0.0, 0.0); d];
            for (i, vi) in v.iter_mut().enumerate() {
                let mut acc = c64::new(0.0, 0.0);
                for k in 0..d {
                    acc += cf[k] * self.evecs[(i, k)];
                }
                *vi = acc;
            }
            v
        };
        Ok((back(&cr), back(&cl), s_min, s_next))
    }
}

fn capacitance_from(factors: &[c64], bu: &[Vec<c64>], bd: &[Vec<c64>], dinv: &[c64]) -> CMat {
    let r = factors.len();
    Mat::from_fn(r, r, |i, j| {
        let mut acc = c64::new(0.0, 0.0);
        for k in 0..dinv.len() {
            acc += bd[i][k] * dinv[k] * bu[j][k];
        }
        let f = if i == j { factors[i].inv() } else { c64::new(0.0, 0.0) };
        f - acc
    })
}

/// Gaussian elimination with partial pivoting for tiny systems.
pub(crate) fn small_solve(m: &CMat, b: &[c64]) -> Option<Vec<c64>> {
    let n = m.nrows();
    let mut a: Vec<Vec<c64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap())?;
        if a[piv][col].norm() == 0.0 {
            return None;
        }
        a.swap(col, piv);
        x.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for cc in col..n {
                let t = a[col][cc];
                a[r][cc] -= f * t;
            }
            let t = x[col];
            x[r] -= f * t;
        }
    }
    for r in (0..n).rev() {
        let mut acc = x[r];
        for cc in r + 1..n {
            acc -= a[r][cc] * x[cc];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}
