use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{channel_probabilities, ScatteringProbabilities, ScatteringProblem};
use crate::error::{Error, Result};
use crate::lattice::{LatticeParams, OnSitePotential};

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub probabilities: Option<ScatteringProbabilities>,
    pub unitarity_defect: Option<f64>,
    pub error: Option<String>,
}

/// Evenly spaced K grid kept 0.01 away from the band edges.
pub fn k_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let lo = lo.max(0.01);
    let hi = hi.min(PI - 0.01);
    linspace(lo, hi, n)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn cell(k: f64, v: f64, sigma: f64, p: &LatticeParams, n: i64) -> SweepCell {
    let r = (|| -> Result<(ScatteringProbabilities, f64)> {
        let pot = OnSitePotential::gaussian(v, sigma)?;
        let s = ScatteringProblem::new(k, &pot, p, n)?.smatrix();
        Ok((channel_probabilities(&s, 0)?, s.unitarity_defect()))
    })();
    match r {
        Ok((pr, d)) => SweepCell { k, v, probabilities: Some(pr), unitarity_defect: Some(d), error: None },
        Err(e) => SweepCell { k, v, probabilities: None, unitarity_defect: None, error: Some(e.to_string()) },
    }
}

/// Full (K, V) map of left-incidence probabilities for Gaussian barriers.
/// Rows are V-major; cell failures are recorded, not propagated.
pub fn sweep_kv(
    ks: &[f64],
    vs: &[f64],
    sigma: f64,
    p: &LatticeParams,
    n: i64,
    jobs: usize,
) -> Result<Vec<SweepCell>> {
    if ks.is_empty() || vs.is_empty() {
        return Err(Error::InvalidParams("empty sweep grid".into()));
    }
    if ks.iter().any(|&k| !(0.01 - 1e-12..=PI - 0.01 + 1e-12).contains(&k)) {
        return Err(Error::InvalidParams("K grid must stay 0.01 inside (0, pi)".into()));
    }
    let cells: Vec<(f64, f64)> = vs.iter().flat_map(|&v| ks.iter().map(move |&k| (k, v))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| cells.par_iter().map(|&(k, v)| cell(k, v, sigma, p, n)).collect()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceScan {
    pub n_ref: i64,
    pub points: Vec<(i64, f64)>,
    /// Least-squares slope of ln(error) against N.
    pub slope: f64,
}

/// |R(N) - R(N_ref)| for the origin-referenced dimer reflection amplitude.
pub fn convergence_scan(
    k: f64,
    v: &OnSitePotential,
    p: &LatticeParams,
    ns: &[i64],
    n_ref: i64,
) -> Result<ConvergenceScan> {
    if ns.iter().any(|&n| n > n_ref) {
        return Err(Error::InvalidParams("N values must not exceed N_ref".into()));
    }
    let r_ref = ScatteringProblem::new(k, v, p, n_ref)?.smatrix().reflection_left();
    let mut points = Vec::new();
    for &n in ns {
        let r = ScatteringProblem::new(k, v, p, n)?.smatrix().reflection_left();
        points.push((n, (r - r_ref).norm()));
    }
    let fit: Vec<(f64, f64)> =
        points.iter().filter(|(_, e)| *e > 0.0).map(|&(n, e)| (n as f64, e.ln())).collect();
    Ok(ConvergenceScan { n_ref, points, slope: lsq_slope(&fit) })
}

pub fn lsq_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    if xy.len() < 2 {
        return f64::NAN;
    }
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
