use std::f64::consts::PI;

use super::{c, LatticeParams, C64};
use crate::error::{Error, Result};

/// Dimer band E(K) = -sqrt(4J^2 cos^2(K/2) + U^2).
pub fn dimer_dispersion(k: f64, p: &LatticeParams) -> f64 {
    let ch = (k / 2.0).cos();
    -(4.0 * p.j * p.j * ch * ch + p.u * p.u).sqrt()
}

/// Same formula with complex quasimomentum (principal square root).
pub fn dimer_dispersion_c(k: C64, p: &LatticeParams) -> C64 {
    let ch = (k / 2.0).cos();
    -(ch * ch * (4.0 * p.j * p.j) + p.u * p.u).sqrt()
}

pub fn dimer_group_velocity(k: f64, p: &LatticeParams) -> f64 {
    let ch = (k / 2.0).cos();
    p.j * p.j * k.sin() / (4.0 * p.j * p.j * ch * ch + p.u * p.u).sqrt()
}

pub fn dimer_lambda(k: f64, p: &LatticeParams) -> Result<f64> {
    let ch = (k / 2.0).cos();
    if ch.abs() < 1e-12 {
        return Err(Error::DegenerateMomentum(format!("cos(K/2)=0 at K={k}")));
    }
    Ok((-p.u / (2.0 * p.j * ch)).asinh())
}

pub fn dimer_lambda_c(k: C64, p: &LatticeParams) -> Result<C64> {
    let ch = (k / 2.0).cos();
    if ch.norm() < 1e-12 {
        return Err(Error::DegenerateMomentum(format!("cos(K/2)=0 at K={k}")));
    }
    Ok((c(-p.u, 0.0) / (ch * (2.0 * p.j))).asinh())
}

/// K in [0, pi] with E(K) = e, for real in-band energies.
pub fn invert_dimer_dispersion(e: f64, p: &LatticeParams) -> Result<f64> {
    let (lo, hi) = p.dimer_band();
    let tol = 1e-12 * lo.abs();
    if !(e >= lo - tol && e <= hi + tol) {
        return Err(Error::OutOfBand(e));
    }
    let ch = ((e * e - p.u * p.u).max(0.0).sqrt() / (2.0 * p.j)).min(1.0);
    // acos loses accuracy near K = 0; use the sine form there.
    let sh = (1.0 - ch * ch).max(0.0).sqrt();
    Ok((2.0 * sh.atan2(ch)).clamp(0.0, PI))
}

/// Analytic continuation of the inverse dispersion to complex energy:
/// cos(K/2) = sqrt(z^2 - U^2)/(2J), principal branches throughout.
pub fn invert_dimer_dispersion_c(z: C64, p: &LatticeParams) -> C64 {
    let s = (z * z - p.u * p.u).sqrt();
    let ch = s / (2.0 * p.j);
    ch.acos() * 2.0
}
