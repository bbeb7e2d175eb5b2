//! Gamov resonances of the trap: response function, harmonic inversion,
//! pole refinement, Gamov states and the decay expansion.

mod gamov;
mod inversion;
mod refine;
mod trap;

pub use gamov::{
    expand_initial_state, gamov_state, nonescape_probability_gamov, normalize_phase, DecayExpansion,
    ExpansionTerm, GamovState,
};
pub use inversion::{harmonic_inversion_fit, synthetic_samples, FitOptions, InversionFit, PoleCandidate, ResponseSamples};
pub use refine::{fixed_point_defect, refine_pole, stability_score, RefineOptions, Resonance};
pub use trap::{LowRank, Trap, TrapConfig, TrapGeometry};

use faer::c64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scattering::{linspace, EffectiveHamiltonian};

/// H_eff(z) of the trap: hard wall on one side, open channels on the other.
pub fn build_trap_heff(z: c64, trap: &Trap) -> Result<EffectiveHamiltonian> {
    trap.heff(z)
}

/// Default response grid: the dimer band shrunk by `margin` at both ends.
pub fn default_energy_grid(trap: &Trap, points: usize, margin: f64) -> Vec<f64> {
    let (lo, hi) = trap.params().dimer_band();
    linspace(lo + margin, hi - margin, points)
}

pub fn response_function(trap: &Trap, grid: &[f64], n0: i64) -> Result<ResponseSamples> {
    let (a, b) = trap.config.geometry.interior;
    if n0 < a || n0 > b {
        return Err(Error::InvalidParams(format!("driving site {n0} outside trap interior [{a}, {b}]")));
    }
    let vals: Vec<Result<c64>> = grid.par_iter().map(|&e| trap.response_at(e, n0)).collect();
    let mut out = ResponseSamples { energies: vec![], values: vec![], n0, skipped: vec![] };
    for (&e, v) in grid.iter().zip(vals) {
        match v {
            Ok(g) => {
                out.energies.push(e);
                out.values.push(g);
            }
            Err(Error::SingularSystem { .. }) => out.skipped.push(e),
            Err(err) => return Err(err),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct ResonanceOptions {
    pub grid_points: usize,
    pub edge_margin: f64,
    pub n0: i64,
    pub max_poles: usize,
    pub fit: FitOptions,
    pub refine: RefineOptions,
    /// Seeds with |A| below this are not refined.
    pub min_residue: f64,
    pub stability_tol: f64,
    pub check_fixed_point: bool,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        Self {
            grid_points: 2001,
            edge_margin: 0.01,
            n0: 10,
            max_poles: 100,
            fit: FitOptions::default(),
            refine: RefineOptions::default(),
            min_residue: 1e-6,
            stability_tol: 1e-4,
            check_fixed_point: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RejectedCandidate {
    #[serde(serialize_with = "crate::cplx::ser")]
    pub z: c64,
    #[serde(serialize_with = "crate::cplx::ser")]
    pub residue: c64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceReport {
    pub accepted: Vec<Resonance>,
    pub rejected: Vec<RejectedCandidate>,
    pub fit_residual: f64,
    pub fit_order: usize,
    pub skipped_samples: Vec<f64>,
}

/// Seeds from harmonic inversion of the response, refined on the box and
/// filtered by the no-gain, N -> N+2 stability and (optionally) fixed-point
/// checks. Accepted poles are sorted by Re z.
pub fn find_resonances(trap: &Trap, opts: ResonanceOptions) -> Result<ResonanceReport> {
    let grid = default_energy_grid(trap, opts.grid_points, opts.edge_margin);
    let samples = response_function(trap, &grid, opts.n0)?;
    let fit = harmonic_inversion_fit(&samples, opts.max_poles, opts.fit)?;
    let bigger = Trap::new(trap.config.with_radius(trap.config.geometry.n + 2))?;
    let (band_lo, band_hi) = trap.params().dimer_band();
    let trust = 0.5 * trap.params().j;
    let amax = fit.candidates.iter().map(|c| c.residue.norm()).fold(0.0, f64::max);

    enum Outcome {
        Accept(Resonance),
        Reject(String),
    }
    let outcomes: Vec<(PoleCandidate, Outcome)> = fit
        .candidates
        .par_iter()
        .map(|c| {
            let z = c.z;
            let o = if z.re <= band_lo || z.re >= band_hi {
                Outcome::Reject("outside dimer band".into())
            } else if z.im.abs() >= trust {
                Outcome::Reject("outside continuation trust region".into())
            } else if z.im > 0.05 {
                Outcome::Reject("seed in upper half plane".into())
            } else if c.residue.norm() < opts.min_residue * amax.max(1.0) {
                Outcome::Reject("negligible residue".into())
            } else {
                match refine_pole(trap, z, c.residue, opts.refine) {
                    Err(e) => Outcome::Reject(e.to_string()),
                    Ok(r) if r.gamma < -1e-10 => Outcome::Reject(format!("gain: gamma = {:e}", r.gamma)),
                    Ok(mut r) => match stability_score(&bigger, &r, opts.refine) {
                        Err(e) => Outcome::Reject(format!("unstable under N+2: {e}")),
                        Ok(s) if s >= opts.stability_tol => Outcome::Reject(format!("unstable under N+2: moved {s:e}")),
                        Ok(s) => {
                            r.stability = Some(s);
                            Outcome::Accept(r)
                        }
                    },
                }
            };
            (*c, o)
        })
        .collect();

    let mut accepted: Vec<Resonance> = Vec::new();
    let mut rejected = Vec::new();
    for (c, o) in outcomes {
        match o {
            Outcome::Accept(r) => {
                if accepted.iter().any(|a| (a.z - r.z).norm() < 1e-8) {
                    rejected.push(RejectedCandidate { z: c.z, residue: c.residue, reason: "duplicate".into() });
                } else {
                    accepted.push(r);
                }
            }
            Outcome::Reject(reason) => rejected.push(RejectedCandidate { z: c.z, residue: c.residue, reason }),
        }
    }
    if opts.check_fixed_point {
        let checks: Vec<Result<f64>> = accepted.par_iter().map(|r| fixed_point_defect(trap, r.z)).collect();
        let mut keep = Vec::new();
        for (mut r, d) in accepted.into_iter().zip(checks) {
            match d {
                Ok(d) if d < 1e-6 => {
                    r.fixed_point_defect = Some(d);
                    keep.push(r);
                }
                Ok(d) => rejected.push(RejectedCandidate {
                    z: r.z,
                    residue: r.residue,
                    reason: format!("fixed-point defect {d:e}"),
                }),
                Err(e) => rejected.push(RejectedCandidate { z: r.z, residue: r.residue, reason: e.to_string() }),
            }
        }
        accepted = keep;
    }
    accepted.sort_by(|a, b| a.z.re.partial_cmp(&b.z.re).unwrap());
    Ok(ResonanceReport {
        accepted,
        rejected,
        fit_residual: fit.residual,
        fit_order: fit.order,
        skipped_samples: samples.skipped,
    })
}

/// Gamov states for the accepted poles; degenerate ones are dropped and
/// returned separately.
pub fn gamov_states(trap: &Trap, accepted: &[Resonance]) -> Result<(Vec<GamovState>, Vec<c64>)> {
    let states: Vec<Result<GamovState>> = accepted.par_iter().map(|r| gamov_state(r, trap)).collect();
    let mut good = Vec::new();
    let mut degenerate = Vec::new();
    for s in states {
        let s = s?;
        if s.degenerate {
            degenerate.push(s.z);
        } else {
            good.push(s);
        }
    }
    Ok((good, degenerate))
}

/// Trap packet of the time-domain module sampled on the resonance box.
pub fn box_packet(trap: &Trap, k: f64, m0: f64) -> Result<Vec<c64>> {
    let lam = crate::lattice::dimer_lambda(k, trap.params())?;
    let mut psi: Vec<c64> = (0..trap.dim())
        .map(|i| {
            let (m, n) = trap.bx.site(i);
            c64::new(crate::timedomain::trap_packet_value(k, m0, lam, m, n), 0.0)
        })
        .collect();
    let nrm = crate::linalg::norm2(&psi);
    if nrm == 0.0 {
        return Err(Error::EmptyState(0.0));
    }
    psi.iter_mut().for_each(|x| *x /= nrm);
    Ok(psi)
}

pub struct GamovDecay {
    pub expansion: DecayExpansion,
    /// Poles left out because their capacitance matrix has a double zero.
    pub degenerate: Vec<c64>,
    /// Incoherent sum over poles of |B_l|^2 e^{-gamma_l t}.
    pub rho_incoherent: Vec<f64>,
    /// Trap projection of the coherent resonance sum.
    pub rho_coherent: Vec<f64>,
}

/// Gamov expansion of the trap packet over the accepted resonances and both
/// non-escape estimates on `times`.
pub fn gamov_decay(trap: &Trap, report: &ResonanceReport, k: f64, m0: f64, times: &[f64]) -> Result<GamovDecay> {
    let (states, degenerate) = gamov_states(trap, &report.accepted)?;
    let psi0 = box_packet(trap, k, m0)?;
    let expansion = expand_initial_state(&psi0, &states, trap)?;
    let rho_incoherent = nonescape_probability_gamov(&expansion, times)?;
    let rho_coherent = expansion.nonescape_probability_coherent(times);
    Ok(GamovDecay { expansion, degenerate, rho_incoherent, rho_coherent })
}
