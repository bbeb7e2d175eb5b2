use faer::c64;
use serde::Serialize;

use super::InteriorBox;
use crate::lattice::{ChannelSet, LatticeParams, Side};
use crate::linalg::{matvec, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ChannelKind {
    Dimer,
    /// Index into the channel set's dissociation list.
    Dissociation(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ChannelLabel {
    pub kind: ChannelKind,
    pub side: Side,
}

impl std::fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ChannelKind::Dimer => write!(f, "dimer-{:?}", self.side),
            ChannelKind::Dissociation(b) => write!(f, "diss{}-{:?}", b, self.side),
        }
    }
}

/// One boundary term -factor * u ud^T of the effective Hamiltonian.
#[derive(Debug, Clone)]
pub struct Coupling {
    pub label: ChannelLabel,
    pub u: Vec<c64>,
    pub u_dual: Vec<c64>,
    pub factor: c64,
    /// Channel wave number (K for the dimer, k_b otherwise).
    pub q: c64,
    pub is_open: bool,
    /// Flux normalization sqrt(2 sinh(lambda) sin(K/2)) or sqrt(2 sin k_b).
    pub g: c64,
}

/// Deliberate defects for mutation testing of the validation suite.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tamper {
    pub flip_dimer_phase_in_heff: bool,
}

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub mat: CMat,
    pub couplings: Vec<Coupling>,
    pub e: c64,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// H_eff - z
    pub fn shifted(&self, z: c64) -> CMat {
        let mut a = self.mat.clone();
        for i in 0..a.nrows() {
            a[(i, i)] -= z;
        }
        a
    }

    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        matvec(&self.mat, x)
    }

    /// Largest deviation of the anti-Hermitian part from being negative
    /// semidefinite, computed from its spectrum.
    pub fn anti_hermitian_max_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let a = faer::Mat::from_fn(n, n, |i, j| {
            (self.mat[(i, j)] - self.mat[(j, i)].conj()) / c64::new(0.0, 2.0)
        });
        let ev = a
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("hermitian eigensolve");
        ev.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Boundary couplings for the sides listed in the channel set, ordered
/// dimer L,R then per bound state L,R.
pub fn build_couplings(bx: &InteriorBox, ch: &ChannelSet, p: &LatticeParams) -> Vec<Coupling> {
    let mut couplings = Vec::new();
    let d = &ch.dimer;
    let kc = d.k;
    let lam = d.lambda;
    let sides = ch.sides.list();
    let dimer_factor = lam.sinh() * (c64::new(0.0, 1.0) * kc / 2.0).exp();
    let dimer_g = (lam.sinh() * (kc / 2.0).sin() * 2.0).sqrt();
    for &s in &sides {
        let (u, ud) = bx.dimer_vectors(s, kc, lam, p.j, false);
        couplings.push(Coupling {
            label: ChannelLabel { kind: ChannelKind::Dimer, side: s },
            u,
            u_dual: ud,
            factor: dimer_factor,
            q: kc,
            is_open: true,
            g: dimer_g,
        });
    }
    for (b, dc) in ch.dissociation.iter().enumerate() {
        let factor = (c64::new(0.0, 1.0) * dc.k).exp();
        let g = (dc.k.sin() * 2.0).sqrt();
        for &s in &sides {
            let v = bx.dissociation_vector(s, &dc.bound_state, p.j);
            couplings.push(Coupling {
                label: ChannelLabel { kind: ChannelKind::Dissociation(b), side: s },
                u: v.clone(),
                u_dual: v,
                factor,
                q: dc.k,
                is_open: dc.is_open,
                g,
            });
        }
    }
    couplings.sort_by_key(|c| {
        let k = match c.label.kind {
            ChannelKind::Dimer => 0,
            ChannelKind::Dissociation(b) => b + 1,
        };
        (k, c.label.side == Side::R)
    });
    couplings
}

/// H_eff = H0 - sinh(lambda) e^{iK/2} sum_C W W^+ - sum_{b,C} e^{ik_b} V V^T
/// on the sides listed in the channel set.
pub fn build_effective_hamiltonian(
    bx: &InteriorBox,
    ch: &ChannelSet,
    p: &LatticeParams,
    tamper: Tamper,
) -> EffectiveHamiltonian {
    let mut mat = bx.h0_complex();
    let couplings = build_couplings(bx, ch, p);
    for c in &couplings {
        if tamper.flip_dimer_phase_in_heff && c.label.kind == ChannelKind::Dimer {
            let uh = bx.dimer_vectors(c.label.side, ch.dimer.k, ch.dimer.lambda, p.j, true).0;
            add_rank_one(&mut mat, &uh, &c.u_dual, c.factor);
        } else {
            add_rank_one(&mut mat, &c.u, &c.u_dual, c.factor);
        }
    }
    EffectiveHamiltonian { mat, couplings, e: ch.e }
}

fn add_rank_one(mat: &mut CMat, u: &[c64], ud: &[c64], factor: c64) {
    let nz: Vec<usize> = (0..u.len()).filter(|&i| u[i] != c64::new(0.0, 0.0)).collect();
    let nzd: Vec<usize> = (0..ud.len()).filter(|&i| ud[i] != c64::new(0.0, 0.0)).collect();
    for &i in &nz {
        let fi = factor * u[i];
        for &j in &nzd {
            mat[(i, j)] -= fi * ud[j];
        }
    }
}
