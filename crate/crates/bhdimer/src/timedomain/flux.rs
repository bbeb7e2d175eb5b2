use serde::Serialize;

use super::{FluxConfig, Grid2D, Trajectory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ChannelFlux {
    pub dimer: f64,
    pub dissociation: f64,
    /// Escaped current not captured by either transverse profile.
    pub other: f64,
    pub total: f64,
    pub dissociation_fraction: f64,
    pub dimer_fraction: f64,
    /// |total flux - drop of the inner-quadrant probability|
    pub bookkeeping_defect: f64,
    /// Largest weight of a bound-state profile inside the dimer window,
    /// present only above 10%.
    pub projection_leak: Option<f64>,
}

/// Per-channel escape fractions accumulated at the cut up to the last sample.
pub fn channel_resolved_flux(traj: &Trajectory, grid: &Grid2D, flux: &FluxConfig) -> Result<ChannelFlux> {
    let last = traj.flux_total.len().checked_sub(1).ok_or_else(|| {
        Error::InvalidParams("trajectory has no flux record".into())
    })?;
    let total = traj.flux_total[last];
    let dimer = traj.flux_dimer[last];
    let dissociation = traj.flux_dissociation[last];
    let drop = traj.inner_probability[0] - traj.inner_probability[last];
    let mut leak: f64 = 0.0;
    for b in &flux.bound_states {
        let mut w = 0.0;
        for n in grid.lo..=grid.hi {
            let d = (n - flux.cut) * (-flux.open_side.sign());
            if d > 0 && d <= flux.dimer_window {
                w += b.at(n).powi(2);
            }
        }
        leak = leak.max(w / b.norm_sqr());
    }
    let frac = |x: f64| if total > 0.0 { x / total } else { 0.0 };
    Ok(ChannelFlux {
        dimer,
        dissociation,
        other: total - dimer - dissociation,
        total,
        dissociation_fraction: frac(dissociation),
        dimer_fraction: frac(dimer),
        bookkeeping_defect: (total - drop).abs(),
        projection_leak: (leak > 0.1).then_some(leak),
    })
}
