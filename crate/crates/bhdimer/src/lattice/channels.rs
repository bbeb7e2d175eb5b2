use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dimer::{dimer_dispersion, dimer_lambda, dimer_lambda_c, invert_dimer_dispersion_c};
use super::{c, single_particle_bound_states, BoundState, LatticeParams, OnSitePotential, Window, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

impl Side {
    /// -1 for the left end, +1 for the right end.
    pub fn sign(self) -> i64 {
        match self {
            Side::L => -1,
            Side::R => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sides {
    Both,
    Only(Side),
}

impl Sides {
    pub fn list(self) -> Vec<Side> {
        match self {
            Sides::Both => vec![Side::L, Side::R],
            Sides::Only(s) => vec![s],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimerChannel {
    pub k: C64,
    pub e: C64,
    pub lambda: C64,
}

impl DimerChannel {
    pub fn from_k(k: f64, p: &LatticeParams) -> Result<Self> {
        let lambda = dimer_lambda(k, p)?;
        Ok(Self { k: c(k, 0.0), e: c(dimer_dispersion(k, p), 0.0), lambda: c(lambda, 0.0) })
    }

    pub fn from_energy(z: C64, p: &LatticeParams) -> Result<Self> {
        let k = invert_dimer_dispersion_c(z, p);
        let lambda = dimer_lambda_c(k, p)?;
        Ok(Self { k, e: z, lambda })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissociationChannel {
    pub bound_state: Arc<BoundState>,
    pub k: C64,
    pub is_open: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub e: C64,
    pub dimer: DimerChannel,
    pub dissociation: Vec<DissociationChannel>,
    pub sides: Sides,
}

impl ChannelSet {
    pub fn open_dissociation(&self) -> impl Iterator<Item = (usize, &DissociationChannel)> {
        self.dissociation.iter().enumerate().filter(|(_, d)| d.is_open)
    }
}

/// Wave number of the free particle in a dissociation channel at real
/// energy; returns (k_b, open).
pub fn dissociation_momentum(e: f64, e_b: f64, p: &LatticeParams) -> (C64, bool) {
    let cb = (e_b - e) / p.j;
    if cb.abs() <= 1.0 {
        (c(cb.acos(), 0.0), true)
    } else if cb > 1.0 {
        (c(0.0, cb.acosh()), false)
    } else {
        (c(PI, (-cb).acosh()), false)
    }
}

/// Continuation to complex energy. Channels open at Re z follow the
/// principal arccos; closed ones take the decaying branch Im k > 0.
pub fn dissociation_momentum_continued(z: C64, e_b: f64, p: &LatticeParams) -> (C64, bool) {
    if z.im == 0.0 {
        return dissociation_momentum(z.re, e_b, p);
    }
    let cb = (c(e_b, 0.0) - z) / p.j;
    let open = ((e_b - z.re) / p.j).abs() <= 1.0;
    let mut k = cb.acos();
    if !open && k.im < 0.0 {
        k = if k.re < PI / 2.0 { -k } else { c(2.0 * PI, 0.0) - k };
    }
    (k, open)
}

fn dissociation_channels(
    e: C64,
    bound: &[Arc<BoundState>],
    p: &LatticeParams,
) -> Vec<DissociationChannel> {
    bound
        .iter()
        .map(|b| {
            let (k, is_open) = dissociation_momentum_continued(e, b.energy, p);
            DissociationChannel { bound_state: b.clone(), k, is_open }
        })
        .collect()
}

/// Channel set for a scattering dimer of real quasimomentum `k`.
pub fn build_channel_set(
    k: f64,
    v: &OnSitePotential,
    p: &LatticeParams,
    sides: Sides,
    window: Window,
) -> Result<ChannelSet> {
    let bound: Vec<Arc<BoundState>> = single_particle_bound_states(v, p, window)?
        .into_iter()
        .map(Arc::new)
        .collect();
    let dimer = DimerChannel::from_k(k, p)?;
    let dissociation = dissociation_channels(dimer.e, &bound, p);
    Ok(ChannelSet { e: dimer.e, dimer, dissociation, sides })
}

/// Channel set at a (possibly complex) energy with precomputed bound states.
pub fn build_channel_set_at(
    z: C64,
    bound: &[Arc<BoundState>],
    p: &LatticeParams,
    sides: Sides,
) -> Result<ChannelSet> {
    let dimer = DimerChannel::from_energy(z, p)?;
    if z.im == 0.0 {
        let (lo, hi) = p.dimer_band();
        if z.re < lo - 1e-12 || z.re > hi + 1e-12 {
            return Err(Error::OutOfBand(z.re));
        }
    }
    let dissociation = dissociation_channels(z, bound, p);
    Ok(ChannelSet { e: z, dimer, dissociation, sides })
}

/// Dimer traveling wave normalized to unit probability current.
pub fn dimer_channel_wavefunction(
    ch: &DimerChannel,
    n: i64,
    dir: Direction,
    p: &LatticeParams,
) -> Result<impl Fn(i64, i64) -> C64> {
    let s2 = (ch.k / 2.0).sin();
    if s2.norm() < 1e-12 {
        return Err(Error::DegenerateMomentum(format!("sin(K/2)=0 at K={}", ch.k)));
    }
    let amp = (ch.lambda.sinh() / (s2 * p.j)).sqrt();
    let sg = match dir {
        Direction::Plus => 1.0,
        Direction::Minus => -1.0,
    };
    let (k, lam) = (ch.k, ch.lambda);
    Ok(move |a: i64, b: i64| {
        let ph = c(0.0, sg) * k * ((a + b - n) as f64 / 2.0) - lam * ((a - b).abs() as f64);
        amp * ph.exp()
    })
}

/// Dissociation channel function including the Heaviside cutoffs.
pub fn dissociation_channel_wavefunction(
    ch: &DissociationChannel,
    n: i64,
    side: Side,
    p: &LatticeParams,
) -> Result<impl Fn(i64, i64) -> C64> {
    let s = ch.k.sin();
    if s.norm() < 1e-12 {
        return Err(Error::ZeroVelocity(format!("sin(k_b)=0 at k_b={}", ch.k)));
    }
    let sg = side.sign() as f64;
    let pref = (c(0.0, -sg) * ch.k * n as f64).exp() / (2.0 * p.j * s.norm()).sqrt();
    let k = ch.k;
    let b = ch.bound_state.clone();
    let outside = move |x: i64| match side {
        Side::L => x < -n,
        Side::R => x > n,
    };
    Ok(move |a: i64, bb: i64| {
        let mut acc = c(0.0, 0.0);
        if outside(a) {
            acc += (c(0.0, sg) * k * a as f64).exp() * b.at(bb);
        }
        if outside(bb) {
            acc += (c(0.0, sg) * k * bb as f64).exp() * b.at(a);
        }
        pref * acc
    })
}
