use faer::{c64, Mat};
use serde::Serialize;

use super::heff::{ChannelKind, ChannelLabel};
use super::problem::ScatteringProblem;
use crate::error::{Error, Result};
use crate::lattice::{LatticeParams, OnSitePotential};
use crate::linalg::CMat;

/// Outgoing-amplitude matrix over open channels. Column tau is the response
/// to unit incoming flux in channel tau. Amplitudes are referenced to the
/// first site outside the box.
#[derive(Debug, Clone)]
pub struct SMatrix {
    pub e: f64,
    pub k: f64,
    pub n: i64,
    pub labels: Vec<ChannelLabel>,
    /// Channel wave numbers: K for dimer channels, k_b otherwise.
    pub q: Vec<f64>,
    pub closed: Vec<ChannelLabel>,
    pub s: CMat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringProbabilities {
    #[serde(rename = "P_t")]
    pub p_t: f64,
    #[serde(rename = "P_r")]
    pub p_r: f64,
    #[serde(rename = "P_d")]
    pub p_d: f64,
}

impl SMatrix {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.s[(row, col)]
    }

    pub fn index_of(&self, label: ChannelLabel) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }

    /// max |S^+ S - 1| over entries.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = c64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.s[(k, i)].conj() * self.s[(k, j)];
                }
                if i == j {
                    acc -= c64::new(1.0, 0.0);
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Amplitudes re-referenced to the origin, removing the trivial
    /// e^{i(q + q')(N+1)} dependence on the box radius.
    pub fn origin_referenced(&self) -> CMat {
        let r = (self.n + 1) as f64;
        Mat::from_fn(self.dim(), self.dim(), |i, j| {
            self.s[(i, j)] * (c64::new(0.0, -(self.q[i] + self.q[j]) * r)).exp()
        })
    }

    /// Dimer reflection amplitude for incidence from the left, referenced to
    /// the origin.
    pub fn reflection_left(&self) -> c64 {
        let l = self
            .index_of(ChannelLabel { kind: ChannelKind::Dimer, side: crate::lattice::Side::L })
            .expect("dimer channel always present");
        self.origin_referenced()[(l, l)]
    }

    pub fn probabilities(&self, incoming: usize) -> Result<ScatteringProbabilities> {
        channel_probabilities(self, incoming)
    }
}

/// Groups |S_{tau' tau}|^2 into co-tunneling (dimer on the far side),
/// dimer reflection and total dissociation.
pub fn channel_probabilities(s: &SMatrix, incoming: usize) -> Result<ScatteringProbabilities> {
    if incoming >= s.dim() {
        return Err(Error::ClosedChannel(incoming));
    }
    let side_in = s.labels[incoming].side;
    let mut p = ScatteringProbabilities { p_t: 0.0, p_r: 0.0, p_d: 0.0 };
    for (i, l) in s.labels.iter().enumerate() {
        let w = s.s[(i, incoming)].norm_sqr();
        match l.kind {
            ChannelKind::Dimer if l.side == side_in => p.p_r += w,
            ChannelKind::Dimer => p.p_t += w,
            ChannelKind::Dissociation(_) => p.p_d += w,
        }
    }
    Ok(p)
}

pub fn compute_smatrix(k: f64, v: &OnSitePotential, p: &LatticeParams, n: i64) -> Result<SMatrix> {
    Ok(ScatteringProblem::new(k, v, p, n)?.smatrix())
}

/// Probabilities for a dimer incident from the left.
pub fn dimer_probabilities(
    k: f64,
    v: &OnSitePotential,
    p: &LatticeParams,
    n: i64,
) -> Result<ScatteringProbabilities> {
    let s = compute_smatrix(k, v, p, n)?;
    channel_probabilities(&s, 0)
}
