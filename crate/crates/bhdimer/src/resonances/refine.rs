use faer::c64;
use serde::Serialize;

use super::Trap;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, norm2};

#[derive(Debug, Clone, Serialize)]
pub struct Resonance {
    /// z = E - i gamma/2
    #[serde(serialize_with = "crate::cplx::ser")]
    pub z: c64,
    pub gamma: f64,
    /// Residue of the harmonic-inversion seed.
    #[serde(serialize_with = "crate::cplx::ser")]
    pub residue: c64,
    /// ||(H_eff(z) - z) psi|| for the unit Gamov vector; bounds the smallest
    /// singular value from above.
    pub residual: f64,
    /// |z(N) - z(N+2)|, filled in by the stability check.
    pub stability: Option<f64>,
    /// Distance from the nearest eigenvalue of the frozen H_eff(z), if checked.
    pub fixed_point_defect: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct RefineOptions {
    pub pole_tol: f64,
    pub max_iter: usize,
    /// Largest allowed distance from the seed.
    pub max_step: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self { pole_tol: 1e-8, max_iter: 60, max_step: 0.05 }
    }
}

/// det M(z) times the closed-box factors (lambda_k - z) near the seed, which
/// cancel the poles of M; narrow resonances sit right next to them.
fn det_m(trap: &Trap, z: c64, near: &[f64]) -> Result<c64> {
    let mut d = trap.capacitance(z)?.determinant();
    for &l in near {
        d *= c64::new(l, 0.0) - z;
    }
    Ok(d)
}

/// Newton iteration on det M(z) = 0, where M is the boundary capacitance
/// matrix; its zeros are exactly the points where H_eff(z) - z is singular.
pub fn refine_pole(trap: &Trap, seed: c64, residue: c64, opts: RefineOptions) -> Result<Resonance> {
    let fail = || Error::NoConvergence { re: seed.re, im: seed.im };
    let near: Vec<f64> = trap
        .box_spectrum()
        .iter()
        .copied()
        .filter(|l| (l - seed.re).abs() < 2.0 * opts.max_step)
        .collect();
    let mut z = seed;
    let mut converged = false;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        let h = 1e-7 * z.norm().max(1.0);
        let f0 = det_m(trap, z, &near).map_err(|_| fail())?;
        if f0 == c64::new(0.0, 0.0) {
            converged = true;
            break;
        }
        let fp = det_m(trap, z + h, &near).map_err(|_| fail())?;
        let fm = det_m(trap, z - h, &near).map_err(|_| fail())?;
        let d = (fp - fm) / (2.0 * h);
        if d.norm() == 0.0 || !d.re.is_finite() {
            return Err(fail());
        }
        let step = f0 / d;
        z -= step;
        if !z.re.is_finite() || (z - seed).norm() > opts.max_step {
            return Err(fail());
        }
        if step.norm() < 1e-14 * z.norm().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(fail());
    }
    let residual = gamov_residual(trap, z).map_err(|_| fail())?;
    if residual >= opts.pole_tol {
        return Err(fail());
    }
    Ok(Resonance {
        z,
        gamma: -2.0 * z.im,
        residue,
        residual,
        stability: None,
        fixed_point_defect: None,
        iterations: it,
    })
}

fn gamov_residual(trap: &Trap, z: c64) -> Result<f64> {
    let (psi, _, _, _) = trap.null_vectors(z)?;
    let h = trap.heff(z)?;
    let mut r = h.apply(&psi);
    for (ri, pi) in r.iter_mut().zip(&psi) {
        *ri -= z * pi;
    }
    Ok(norm2(&r) / norm2(&psi))
}

/// Distance from z to the closest eigenvalue of the frozen matrix H_eff(z).
pub fn fixed_point_defect(trap: &Trap, z: c64) -> Result<f64> {
    let h = trap.heff(z)?;
    let ev = eigenvalues(&h.mat)?;
    Ok(ev.iter().map(|e| (e - z).norm()).fold(f64::INFINITY, f64::min))
}

/// |z(N) - z(N+2)| with z(N+2) refined on the larger box.
pub fn stability_score(bigger: &Trap, res: &Resonance, opts: RefineOptions) -> Result<f64> {
    let r2 = refine_pole(bigger, res.z, res.residue, opts)?;
    Ok((r2.z - res.z).norm())
}
