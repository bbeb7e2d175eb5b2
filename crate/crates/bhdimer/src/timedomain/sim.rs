use serde::{Deserialize, Serialize};

use super::{
    channel_resolved_flux, crank_nicolson_propagate, dimer_wavepacket, initial_wavepacket, norm_sqr, Absorber,
    ChannelFlux, CnOptions, FluxConfig, Grid2D, Region, Trajectory,
};
use crate::error::{Error, Result};
use crate::lattice::{dimer_group_velocity, dimer_lambda, LatticeParams, OnSitePotential, Side};
use crate::resonances::{Trap, TrapConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapCnOptions {
    /// Physical open region beyond the box edge, before the absorber.
    pub open_length: i64,
    pub absorber: Absorber,
    pub dt: f64,
    pub sample_interval: f64,
    /// Cut distance beyond the barrier support.
    pub cut_offset: i64,
    pub dimer_window: i64,
}

impl Default for TrapCnOptions {
    fn default() -> Self {
        Self {
            open_length: 60,
            absorber: Absorber::default(),
            dt: 0.02,
            sample_interval: 0.5,
            cut_offset: 10,
            dimer_window: 8,
        }
    }
}

pub struct TrapRun {
    pub grid: Grid2D,
    pub trajectory: Trajectory,
    pub flux: ChannelFlux,
    pub flux_config: FluxConfig,
}

/// Grid for the trap: wall kept, open side extended by the open region plus
/// the absorber skirt.
pub fn trap_grid(cfg: &TrapConfig, opts: &TrapCnOptions) -> Grid2D {
    let g = &cfg.geometry;
    let w = opts.absorber.width as i64;
    let (slo, shi) = cfg.barrier.support();
    let mut ab = opts.absorber;
    ab.at_lo = g.open_side == Side::L;
    ab.at_hi = g.open_side == Side::R;
    let (lo, hi) = match g.open_side {
        Side::L => (slo.min(-g.n) - opts.open_length - w, g.wall_site),
        Side::R => (g.wall_site, shi.max(g.n) + opts.open_length + w),
    };
    Grid2D::new(lo, hi, &cfg.barrier, cfg.params).with_wall(g.wall_site, g.open_side).with_absorber(&ab)
}

pub fn trap_region(cfg: &TrapConfig) -> Region {
    let (a, b) = cfg.geometry.interior;
    Region::square(a, b)
}

pub fn flux_config(trap: &Trap, opts: &TrapCnOptions) -> FluxConfig {
    let cfg = &trap.config;
    let (slo, shi) = cfg.barrier.support();
    let side = cfg.geometry.open_side;
    let cut = match side {
        Side::L => slo - opts.cut_offset,
        Side::R => shi + opts.cut_offset,
    };
    FluxConfig { cut, open_side: side, bound_states: trap.bound.clone(), dimer_window: opts.dimer_window }
}

/// Crank-Nicolson decay of the trap packet with carrier K centred at M.
pub fn run_trap_cn(trap: &Trap, k: f64, m0: f64, t_max: f64, opts: &TrapCnOptions) -> Result<TrapRun> {
    let cfg = &trap.config;
    let grid = trap_grid(cfg, opts);
    let lam = dimer_lambda(k, &cfg.params)?;
    let psi0 = initial_wavepacket(k, m0, lam, &grid)?;
    let fc = flux_config(trap, opts);
    let cn = CnOptions { dt: opts.dt, t_max, sample_interval: opts.sample_interval, ..Default::default() };
    let trajectory = crank_nicolson_propagate(&grid, &psi0, cn, Some(trap_region(cfg)), Some(&fc))?;
    let flux = channel_resolved_flux(&trajectory, &grid, &fc)?;
    Ok(TrapRun { grid, trajectory, flux, flux_config: fc })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleOptions {
    /// Grid is [-L, L]^2 with reflecting edges.
    pub half_width: i64,
    pub dt: f64,
    /// Extra sites added to the barrier support for the capture region.
    pub region_margin: i64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { half_width: 170, dt: 0.05, region_margin: 3 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleResult {
    pub p_t: f64,
    pub p_r: f64,
    pub p_d: f64,
    /// Both particles still near the barrier.
    pub p_box: f64,
    /// Particles on opposite sides, far from the barrier.
    pub p_other: f64,
    pub norm: f64,
}

/// Dimer packet launched from the left at the barrier; probabilities are
/// read off the final state after the collision.
pub fn wavepacket_scattering_oracle(
    k: f64,
    v: &OnSitePotential,
    width: f64,
    p: &LatticeParams,
    opts: OracleOptions,
) -> Result<OracleResult> {
    use std::f64::consts::PI;
    if !(0.1..=PI - 0.1).contains(&k) {
        return Err(Error::InvalidParams(format!("K = {k} within 0.1 of a band edge")));
    }
    let l = opts.half_width;
    let s = v.support_radius().max(v.center().abs() + v.support_radius()) + opts.region_margin;
    let x0 = -(4.0 * width + s as f64 + 2.0);
    let travel = x0.abs() + 4.0 * width + s as f64 + 2.0;
    if x0.abs() + 4.0 * width >= l as f64 || travel + 4.0 * width >= l as f64 {
        return Err(Error::InsufficientSeparation(format!(
            "packet width {width} and launch point {x0} do not fit in half-width {l}"
        )));
    }
    let lam = dimer_lambda(k, p)?;
    let vg = dimer_group_velocity(k, p).abs();
    let grid = Grid2D::new(-l, l, v, *p);
    let psi0 = dimer_wavepacket(k, x0, width, lam, &grid)?;
    let t = travel / vg;
    let cn = CnOptions { dt: opts.dt, t_max: t, sample_interval: t, ..Default::default() };
    let traj = crank_nicolson_propagate(&grid, &psi0, cn, None, None)?;
    let psi = &traj.final_state;
    let mut r = OracleResult { p_t: 0.0, p_r: 0.0, p_d: 0.0, p_box: 0.0, p_other: 0.0, norm: norm_sqr(psi) };
    for (i, x) in psi.iter().enumerate() {
        let (m, n) = grid.site(i);
        let w = x.norm_sqr();
        let (im, inn) = (m.abs() <= s, n.abs() <= s);
        if im && inn {
            r.p_box += w;
        } else if im || inn {
            r.p_d += w;
        } else if m > s && n > s {
            r.p_t += w;
        } else if m < -s && n < -s {
            r.p_r += w;
        } else {
            r.p_other += w;
        }
    }
    Ok(r)
}
