use faer::c64;

use super::{norm_sqr, Grid2D};
use crate::error::{Error, Result};

/// cos(K[R - M]) exp(-(R - M)^2/2 - lambda|m - n|) with R = (m + n)/2.
pub fn trap_packet_value(k: f64, m0: f64, lambda: f64, m: i64, n: i64) -> f64 {
    let r = (m + n) as f64 / 2.0 - m0;
    (k * r).cos() * (-r * r / 2.0 - lambda * ((m - n) as f64).abs()).exp()
}

/// Trap initial state, zeroed on wall sites and normalised.
pub fn initial_wavepacket(k: f64, m0: f64, lambda: f64, grid: &Grid2D) -> Result<Vec<c64>> {
    let mut psi = grid.sample(|m, n| c64::new(trap_packet_value(k, m0, lambda, m, n), 0.0));
    let kept = norm_sqr(&psi);
    // reference norm without wall or grid truncation
    let c = m0.round() as i64;
    let mut full = 0.0;
    for m in c - 60..=c + 60 {
        for n in c - 60..=c + 60 {
            full += trap_packet_value(k, m0, lambda, m, n).powi(2);
        }
    }
    let frac = kept / full;
    if !(frac >= 0.01) {
        return Err(Error::EmptyState(frac));
    }
    let s = kept.sqrt();
    psi.iter_mut().for_each(|x| *x /= s);
    Ok(psi)
}

/// exp(iKR - (R - x0)^2/(2 w^2) - lambda|m - n|), normalised.
pub fn dimer_wavepacket(k: f64, x0: f64, width: f64, lambda: f64, grid: &Grid2D) -> Result<Vec<c64>> {
    let mut psi = grid.sample(|m, n| {
        let r = (m + n) as f64 / 2.0;
        let amp = (-(r - x0).powi(2) / (2.0 * width * width) - lambda * ((m - n) as f64).abs()).exp();
        c64::from_polar(amp, k * r)
    });
    let nrm = norm_sqr(&psi).sqrt();
    if nrm == 0.0 {
        return Err(Error::EmptyState(0.0));
    }
    psi.iter_mut().for_each(|x| *x /= nrm);
    Ok(psi)
}

/// Probability-weighted mean of R = (m + n)/2.
pub fn centroid(grid: &Grid2D, psi: &[c64]) -> f64 {
    let mut w = 0.0;
    let mut acc = 0.0;
    for (i, x) in psi.iter().enumerate() {
        let (m, n) = grid.site(i);
        let p = x.norm_sqr();
        acc += p * (m + n) as f64 / 2.0;
        w += p;
    }
    acc / w
}
