use faer::c64;
use serde::Serialize;

use super::{Resonance, Trap};
use crate::error::{Error, Result};
use crate::linalg::{dotu, norm2};

#[derive(Debug, Clone)]
pub struct GamovState {
    pub z: c64,
    /// Unit norm on the box, largest component real positive.
    pub right: Vec<c64>,
    /// Left null vector: left^T (H_eff(z) - z) = 0.
    pub left: Vec<c64>,
    pub residual: f64,
    pub symmetry_defect: f64,
    /// Share of the norm inside the trap interior.
    pub trap_fraction: f64,
    /// Second singular value of the capacitance matrix also vanishes.
    pub degenerate: bool,
}

pub fn gamov_state(res: &Resonance, trap: &Trap) -> Result<GamovState> {
    let z = res.z;
    let (mut right, mut left, _, s_next) = trap.null_vectors(z)?;
    normalize_phase(&mut right);
    let ln = norm2(&left);
    for x in left.iter_mut() {
        *x /= ln;
    }
    let h = trap.heff(z)?;
    let mut r = h.apply(&right);
    for (ri, pi) in r.iter_mut().zip(&right) {
        *ri -= z * pi;
    }
    let bx = &trap.bx;
    let symmetry_defect = (0..right.len())
        .map(|i| (right[i] - right[bx.swapped(i)]).norm())
        .fold(0.0, f64::max);
    let mask = trap.interior_mask();
    let trap_fraction = right.iter().zip(&mask).filter(|(_, &m)| m).map(|(x, _)| x.norm_sqr()).sum();
    Ok(GamovState {
        z,
        right,
        left,
        residual: norm2(&r),
        symmetry_defect,
        trap_fraction,
        degenerate: s_next < 1e-8,
    })
}

/// Unit norm, largest-magnitude component real positive.
pub fn normalize_phase(v: &mut [c64]) {
    let n = norm2(v);
    let imax = (0..v.len()).max_by(|&a, &b| v[a].norm().partial_cmp(&v[b].norm()).unwrap()).unwrap_or(0);
    let ph = if v.is_empty() || v[imax].norm() == 0.0 { c64::new(1.0, 0.0) } else { v[imax] / v[imax].norm() };
    let s = ph.conj() / n;
    for x in v.iter_mut() {
        *x *= s;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionTerm {
    #[serde(serialize_with = "crate::cplx::ser")]
    pub z: c64,
    pub gamma: f64,
    #[serde(serialize_with = "crate::cplx::ser")]
    pub b: c64,
    pub trap_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct DecayExpansion {
    pub terms: Vec<ExpansionTerm>,
    /// |1 - sum |B_l|^2|
    pub completeness_defect: f64,
    /// Singular-value ratio of the normalised overlap matrix L_l^T Psi_k / L_l^T Psi_l.
    pub overlap_condition: f64,
    /// Trap-interior components of the right vectors, kept for the coherent estimate.
    trap_vectors: Vec<Vec<c64>>,
}

pub fn expand_initial_state(psi0: &[c64], states: &[GamovState], trap: &Trap) -> Result<DecayExpansion> {
    let n0 = norm2(psi0);
    if (n0 - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParams(format!("initial state norm {n0}, expected 1")));
    }
    for (i, a) in states.iter().enumerate() {
        if states[..i].iter().any(|b| (a.z - b.z).norm() < 1e-10) {
            return Err(Error::InvalidParams(format!("duplicate Gamov state at {}", a.z)));
        }
    }
    let k = states.len();
    let overlap = faer::Mat::from_fn(k, k, |l, m| {
        dotu(&states[l].left, &states[m].right) / dotu(&states[l].left, &states[l].right)
    });
    let overlap_condition = if k == 0 {
        1.0
    } else {
        let sv = overlap.singular_values().map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let mx = sv.iter().cloned().fold(0.0, f64::max);
        let mn = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        mx / mn
    };
    if !(overlap_condition <= 1e10) {
        return Err(Error::IllConditionedExpansion(overlap_condition));
    }
    let mask = trap.interior_mask();
    let mut terms = Vec::new();
    let mut trap_vectors = Vec::new();
    for s in states {
        let b = dotu(&s.left, psi0) / dotu(&s.left, &s.right);
        terms.push(ExpansionTerm { z: s.z, gamma: -2.0 * s.z.im, b, trap_fraction: s.trap_fraction });
        trap_vectors.push(s.right.iter().zip(&mask).filter(|(_, &m)| m).map(|(x, _)| *x).collect());
    }
    let total: f64 = terms.iter().map(|t| t.b.norm_sqr()).sum();
    Ok(DecayExpansion { terms, completeness_defect: (1.0 - total).abs(), overlap_condition, trap_vectors })
}

impl DecayExpansion {
    pub fn from_terms(terms: Vec<ExpansionTerm>) -> Self {
        let total: f64 = terms.iter().map(|t| t.b.norm_sqr()).sum();
        Self { terms, completeness_defect: (1.0 - total).abs(), overlap_condition: 1.0, trap_vectors: vec![] }
    }

    /// rho(t) = sum_l |B_l|^2 e^{-gamma_l t}
    pub fn nonescape_probability(&self, times: &[f64]) -> Result<Vec<f64>> {
        if let Some(t) = self.terms.iter().find(|t| t.gamma < 0.0) {
            return Err(Error::InvalidParams(format!("negative decay rate {}", t.gamma)));
        }
        Ok(times
            .iter()
            .map(|&t| self.terms.iter().map(|x| x.b.norm_sqr() * (-x.gamma * t).exp()).sum())
            .collect())
    }

    /// ||P_trap sum_l B_l e^{-i z_l t} Psi_l||^2, keeping the interference
    /// between resonances that the incoherent sum drops.
    pub fn nonescape_probability_coherent(&self, times: &[f64]) -> Vec<f64> {
        let d = self.trap_vectors.first().map_or(0, |v| v.len());
        times
            .iter()
            .map(|&t| {
                let mut acc = vec![c64::new(0.0, 0.0); d];
                for (term, v) in self.terms.iter().zip(&self.trap_vectors) {
                    let c = term.b * (c64::new(0.0, -t) * term.z).exp();
                    for (a, x) in acc.iter_mut().zip(v) {
                        *a += c * x;
                    }
                }
                acc.iter().map(|a| a.norm_sqr()).sum()
            })
            .collect()
    }
}

/// The incoherent sum is only valid when no rate is negative.
pub fn nonescape_probability_gamov(exp: &DecayExpansion, times: &[f64]) -> Result<Vec<f64>> {
    exp.nonescape_probability(times)
}
