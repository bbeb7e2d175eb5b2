use std::f64::consts::PI;
use std::time::Instant;

use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::cplx::Cplx;

use super::output::fmt_f64 as f;
use super::{Command, DecayMethod, Report, RunConfig};
use crate::error::{Error, Result};
use crate::lattice::{dimer_lambda, LatticeParams, OnSitePotential};
use crate::resonances::{
    find_resonances, gamov_decay, harmonic_inversion_fit, synthetic_samples, FitOptions, Trap,
};
use crate::scattering::{
    channel_probabilities, convergence_scan, linspace, sweep_kv, ProblemOptions, ScatteringProblem, Tamper,
};
use crate::timedomain::{crank_nicolson_propagate, dimer_wavepacket, run_trap_cn, Absorber, CnOptions, Grid2D};

pub fn run_command(cmd: &Command, cfg: &RunConfig) -> Result<Report> {
    match cmd {
        Command::Scatter { .. } => scatter(cfg),
        Command::Sweep { .. } => sweep(cfg),
        Command::Converge { .. } => converge(cfg),
        Command::Resonances { selftest, .. } => {
            if *selftest {
                selftest_inversion()
            } else {
                resonances(cfg)
            }
        }
        Command::Decay { .. } => decay(cfg),
        Command::Validate { tamper, .. } => validate(cfg, *tamper),
    }
}

fn v_of(cfg: &RunConfig) -> f64 {
    match cfg.potential {
        crate::lattice::PotentialKind::Gaussian { v, .. } | crate::lattice::PotentialKind::Point { v, .. } => v,
        crate::lattice::PotentialKind::Table { .. } => f64::NAN,
    }
}

fn scatter(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.params()?;
    let v = cfg.potential()?;
    let prob = ScatteringProblem::new(cfg.scatter.k, &v, &p, cfg.scatter.n)?;
    let s = prob.smatrix();
    let pr = channel_probabilities(&s, 0)?;
    let defect = s.unitarity_defect();
    let channels: Vec<_> = s
        .labels
        .iter()
        .zip(&s.q)
        .map(|(l, q)| json!({ "label": l.to_string(), "q": q }))
        .collect();
    let rows: Vec<Vec<Cplx>> = (0..s.dim()).map(|i| (0..s.dim()).map(|j| Cplx(s.get(i, j))).collect()).collect();
    let result = json!({
        "K": s.k,
        "E": s.e,
        "N": s.n,
        "lambda": prob.lambda(),
        "channels": channels,
        "closed_channels": s.closed.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "smatrix": rows,
        "probabilities": pr,
        "probability_sum": pr.p_t + pr.p_r + pr.p_d,
        "unitarity_defect": defect,
    });
    Ok(Report::new(result)?.with_table(
        &["K", "V", "P_t", "P_r", "P_d", "unitarity_defect"],
        vec![vec![f(s.k), f(v_of(cfg)), f(pr.p_t), f(pr.p_r), f(pr.p_d), f(defect)]],
    ))
}

fn sweep(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.params()?;
    let sigma = cfg.sigma().ok_or_else(|| Error::Config("sweep needs a gaussian potential".into()))?;
    let sw = &cfg.sweep;
    let ks = linspace(sw.k_min, sw.k_max, sw.k_points);
    let vs = linspace(sw.v_min, sw.v_max, sw.v_points);
    let cells = sweep_kv(&ks, &vs, sigma, &p, cfg.scatter.n, cfg.jobs)?;
    let mut rows = Vec::new();
    for c in &cells {
        let (pt, pr, pd, d) = match (&c.probabilities, c.unitarity_defect) {
            (Some(x), Some(d)) => (f(x.p_t), f(x.p_r), f(x.p_d), f(d)),
            _ => ("".into(), "".into(), "".into(), "".into()),
        };
        rows.push(vec![f(c.k), f(c.v), pt, pr, pd, d, c.error.clone().unwrap_or_default().replace(',', ";")]);
    }
    let summary = sweep_summary(&cells);
    Ok(Report::new(&cells)?
        .with_table(&["K", "V", "P_t", "P_r", "P_d", "unitarity_defect", "error"], rows)
        .with_summary(summary))
}

/// Dissociation window and basic checks of a (K, V) sweep.
pub fn sweep_summary(cells: &[crate::scattering::SweepCell]) -> serde_json::Value {
    let mut window: Option<(f64, f64)> = None;
    let mut pd_nonneg: f64 = 0.0;
    let mut worst: f64 = 0.0;
    let mut failed = 0;
    for c in cells {
        match (&c.probabilities, c.unitarity_defect) {
            (Some(x), Some(d)) => {
                worst = worst.max(d);
                if c.v >= 0.0 {
                    pd_nonneg = pd_nonneg.max(x.p_d);
                }
                if x.p_d > 0.01 {
                    window = Some(window.map_or((c.v, c.v), |(a, b)| (a.min(c.v), b.max(c.v))));
                }
            }
            _ => failed += 1,
        }
    }
    json!({
        "dissociation_window_V": window.map(|(a, b)| vec![a, b]),
        "max_P_d_for_V_nonnegative": pd_nonneg,
        "max_unitarity_defect": worst,
        "failed_cells": failed,
    })
}

fn converge(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.params()?;
    let cc = &cfg.converge;
    let mut ns = cc.n.clone();
    if !ns.contains(&cc.n_ref) {
        ns.push(cc.n_ref);
    }
    let scans: Vec<Result<(f64, crate::scattering::ConvergenceScan)>> = cc
        .v
        .par_iter()
        .map(|&v| {
            let pot = cfg.potential_with_v(v)?;
            Ok((v, convergence_scan(cfg.scatter.k, &pot, &p, &ns, cc.n_ref)?))
        })
        .collect();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let mut out = Vec::new();
    for s in scans {
        let (v, scan) = s?;
        let err_at = |n: i64| scan.points.iter().find(|x| x.0 == n).map(|x| x.1);
        let ratio = match (err_at(20), err_at(10)) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        };
        for &(n, e) in &scan.points {
            rows.push(vec![f(v), n.to_string(), f(e)]);
        }
        fits.push(json!({ "V": v, "slope": scan.slope, "error_ratio_20_10": ratio }));
        out.push(json!({ "V": v, "scan": scan }));
    }
    let summary = json!({ "K": cfg.scatter.k, "N_ref": cc.n_ref, "fits": fits });
    Ok(Report::new(out)?.with_table(&["V", "N", "error"], rows).with_summary(summary))
}

fn selftest_inversion() -> Result<Report> {
    let z = c64::new(-2.5, -0.05);
    let a = c64::new(1.0, 0.0);
    let s = synthetic_samples(&[(z, a)], linspace(-2.8, -2.0, 200));
    let fit = harmonic_inversion_fit(&s, 4, FitOptions::default())?;
    let best = fit
        .candidates
        .iter()
        .min_by(|x, y| (x.z - z).norm().partial_cmp(&(y.z - z).norm()).unwrap())
        .ok_or(Error::FitDiverged(f64::INFINITY))?;
    let ez = (best.z - z).norm();
    let ea = (best.residue - a).norm();
    let pass = ez < 1e-8 && ea < 1e-8;
    let mut r = Report::new(json!({
        "selftest": "single synthetic pole",
        "true_pole": Cplx(z),
        "recovered_pole": Cplx(best.z),
        "recovered_residue": Cplx(best.residue),
        "pole_error": ez,
        "residue_error": ea,
        "pass": pass,
    }))?;
    if !pass {
        r.exit_code = 3;
    }
    Ok(r)
}

fn resonances(cfg: &RunConfig) -> Result<Report> {
    let trap = Trap::new(cfg.trap_config()?)?;
    let rep = find_resonances(&trap, cfg.resonances.options())?;
    let rows = rep
        .accepted
        .iter()
        .map(|r| {
            vec![f(r.z.re), f(r.z.im), f(r.gamma), f(r.residual), r.stability.map(f).unwrap_or_default()]
        })
        .collect();
    let result = json!({
        "bound_states": trap.bound.iter().map(|b| b.energy).collect::<Vec<_>>(),
        "accepted": rep.accepted,
        "rejected": rep.rejected,
        "fit_residual": rep.fit_residual,
        "fit_order": rep.fit_order,
        "skipped_samples": rep.skipped_samples,
    });
    Ok(Report::new(result)?.with_table(&["re_z", "im_z", "gamma", "residual", "stability"], rows))
}

#[derive(Debug, Clone, Serialize)]
struct DecaySeries {
    #[serde(rename = "M")]
    m: f64,
    t: Vec<f64>,
    rho_gamov: Option<Vec<f64>>,
    rho_gamov_incoherent: Option<Vec<f64>>,
    rho_cn: Option<Vec<f64>>,
    flux_dimer_fraction: Option<Vec<f64>>,
    flux_dissociation_fraction: Option<Vec<f64>>,
}

fn decay(cfg: &RunConfig) -> Result<Report> {
    let dc = &cfg.decay;
    if dc.m.is_empty() {
        return Err(Error::Config("decay needs at least one packet centre M".into()));
    }
    let trap = Trap::new(cfg.trap_config()?)?;
    let t_max = dc.t_max_over_t * dc.time_unit;
    let nt = (t_max / dc.cn.sample_interval).round() as usize;
    let times: Vec<f64> = (0..=nt).map(|i| i as f64 * dc.cn.sample_interval).collect();
    let want_g = dc.method != DecayMethod::Cn;
    let want_c = dc.method != DecayMethod::Gamov;
    let report = if want_g { Some(find_resonances(&trap, cfg.resonances.options())?) } else { None };
    let runs: Vec<Result<(DecaySeries, serde_json::Value)>> = dc
        .m
        .par_iter()
        .map(|&m0| {
            let mut s = DecaySeries {
                m: m0,
                t: times.clone(),
                rho_gamov: None,
                rho_gamov_incoherent: None,
                rho_cn: None,
                flux_dimer_fraction: None,
                flux_dissociation_fraction: None,
            };
            let mut info = json!({ "M": m0 });
            if let Some(rep) = &report {
                let g = gamov_decay(&trap, rep, dc.k, m0, &times)?;
                info["resonances"] = json!(g.expansion.terms.len());
                info["completeness_defect"] = json!(g.expansion.completeness_defect);
                info["overlap_condition"] = json!(g.expansion.overlap_condition);
                info["expansion"] = json!(g.expansion.terms);
                s.rho_gamov = Some(g.rho_coherent);
                s.rho_gamov_incoherent = Some(g.rho_incoherent);
            }
            if want_c {
                let run = run_trap_cn(&trap, dc.k, m0, t_max, &dc.cn)?;
                let tr = &run.trajectory;
                let frac = |x: &[f64]| -> Vec<f64> {
                    x.iter().zip(&tr.flux_total).map(|(a, t)| if *t > 0.0 { a / t } else { 0.0 }).collect()
                };
                s.flux_dimer_fraction = Some(frac(&tr.flux_dimer));
                s.flux_dissociation_fraction = Some(frac(&tr.flux_dissociation));
                s.rho_cn = Some(tr.trap_norm.clone());
                s.t = tr.times.clone();
                info["flux"] = json!(run.flux);
                info["final_norm"] = json!(tr.norm.last());
            }
            if let (Some(g), Some(c)) = (&s.rho_gamov, &s.rho_cn) {
                let d = g.iter().zip(c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let di = s.rho_gamov_incoherent.as_ref().unwrap().iter().zip(c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                info["max_abs_diff_gamov_cn"] = json!(d);
                info["max_abs_diff_incoherent_cn"] = json!(di);
            }
            Ok((s, info))
        })
        .collect();
    let mut series = Vec::new();
    let mut infos = Vec::new();
    for r in runs {
        let (s, i) = r?;
        series.push(s);
        infos.push(i);
    }
    let mut rows = Vec::new();
    for s in &series {
        for (i, &t) in s.t.iter().enumerate() {
            let col = |v: &Option<Vec<f64>>| v.as_ref().and_then(|x| x.get(i)).map(|&x| f(x)).unwrap_or_default();
            rows.push(vec![
                f(s.m),
                f(t),
                f(t / dc.time_unit),
                col(&s.rho_gamov),
                col(&s.rho_gamov_incoherent),
                col(&s.rho_cn),
                col(&s.flux_dimer_fraction),
                col(&s.flux_dissociation_fraction),
            ]);
        }
    }
    let mut summary = json!({ "time_unit": dc.time_unit, "runs": infos });
    if series.len() >= 2 {
        let pick = |s: &DecaySeries| s.rho_cn.clone().or_else(|| s.rho_gamov.clone()).unwrap_or_default();
        let (a, b) = (pick(&series[0]), pick(&series[1]));
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        summary["max_abs_diff_between_first_two_M"] = json!(d);
    }
    if let Some(rep) = &report {
        summary["accepted_resonances"] = json!(rep.accepted);
    }
    Ok(Report::new(&series)?
        .with_table(
            &["M", "t", "t_over_T", "rho_gamov", "rho_gamov_incoherent", "rho_cn", "flux_dimer_fraction", "flux_dissociation_fraction"],
            rows,
        )
        .with_summary(summary))
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    pub runtime_s: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    pub params: LatticeParams,
    pub sigma: f64,
    pub n: i64,
    pub unitarity_points: usize,
    pub elimination_cases: usize,
    pub seed: u64,
    pub tamper: Tamper,
}

fn timed(name: &str, tol: f64, f: impl FnOnce() -> Result<(f64, String)>) -> CheckResult {
    let t0 = Instant::now();
    let r = f();
    let runtime_s = t0.elapsed().as_secs_f64();
    match r {
        Ok((value, detail)) => CheckResult { name: name.into(), pass: value < tol, value, tolerance: tol, runtime_s, detail },
        Err(e) => CheckResult { name: name.into(), pass: false, value: f64::NAN, tolerance: tol, runtime_s, detail: e.to_string() },
    }
}

/// Unitarity, elimination equivalence, CN norm conservation and synthetic
/// inversion, each timed.
pub fn validate_suite(o: ValidateOptions) -> Vec<CheckResult> {
    let popts = ProblemOptions { tamper: o.tamper, ..Default::default() };
    let mut out = Vec::new();
    out.push(timed("flux unitarity", 1e-8, || {
        let ks = linspace(0.1, PI - 0.1, o.unitarity_points);
        let vs = linspace(-3.0, 2.0, o.unitarity_points);
        let mut worst: f64 = 0.0;
        for &v in &vs {
            let pot = OnSitePotential::gaussian(v, o.sigma)?;
            for &k in &ks {
                let s = ScatteringProblem::with_options(k, &pot, &o.params, o.n, popts)?.smatrix();
                worst = worst.max(s.unitarity_defect());
            }
        }
        Ok((worst, format!("{}x{} grid, N={}", ks.len(), vs.len(), o.n)))
    }));
    out.push(timed("elimination equivalence", 1e-10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
        let mut worst: f64 = 0.0;
        let (mut done, mut redrawn) = (0, 0);
        while done < o.elimination_cases {
            let k = rng.random_range(0.2..PI - 0.2);
            let v = rng.random_range(-3.0..2.0);
            let pot = OnSitePotential::gaussian(v, o.sigma)?;
            // draws at a bound-state or channel threshold are not scattering cases
            let prob = match ScatteringProblem::with_options(k, &pot, &o.params, o.n, popts) {
                Err(Error::PoorLocalization { .. } | Error::ZeroVelocity(_)) if redrawn < 10 * o.elimination_cases => {
                    redrawn += 1;
                    continue;
                }
                r => r?,
            };
            done += 1;
            let a: Vec<c64> = prob
                .couplings()
                .iter()
                .map(|c| if c.is_open { c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) } else { c64::new(0.0, 0.0) })
                .collect();
            let (x1, _) = prob.solve_scattering(&a)?;
            let (x2, _) = prob.solve_bordered(&a)?;
            let d = x1.iter().zip(&x2).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            worst = worst.max(d);
        }
        Ok((worst, format!("{done} random (K, V), seed {}, {redrawn} threshold draws redrawn", o.seed)))
    }));
    out.push(timed("CN norm conservation", 1e-10, || {
        let pot = OnSitePotential::gaussian(-1.0, o.sigma)?;
        let grid = Grid2D::new(-20, 20, &pot, o.params).with_absorber(&Absorber::none());
        let k = PI / 2.0;
        let psi = dimer_wavepacket(k, -8.0, 3.0, dimer_lambda(k, &o.params)?, &grid)?;
        let cn = CnOptions { t_max: 10.0, sample_interval: 10.0, ..Default::default() };
        let tr = crank_nicolson_propagate(&grid, &psi, cn, None, None)?;
        Ok((tr.max_step_norm_drift, format!("{} steps on a 41x41 box", (10.0 / cn.dt) as usize)))
    }));
    out.push(timed("synthetic inversion", 1e-8, || {
        let poles = [
            (c64::new(-2.7, -0.01), c64::new(1.0, 0.0)),
            (c64::new(-2.55, -0.03), c64::new(0.3, 0.1)),
            (c64::new(-2.4, -0.002), c64::new(0.5, -0.2)),
            (c64::new(-2.25, -0.05), c64::new(0.8, 0.0)),
            (c64::new(-2.1, -0.02), c64::new(0.2, 0.3)),
        ];
        let s = synthetic_samples(&poles, linspace(-2.8, -2.0, 40 * poles.len()));
        let fit = harmonic_inversion_fit(&s, poles.len(), FitOptions::default())?;
        let worst = poles
            .iter()
            .map(|(z, _)| fit.candidates.iter().map(|c| (c.z - z).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        Ok((worst, format!("{} poles, {} samples", poles.len(), s.energies.len())))
    }));
    out
}

fn validate(cfg: &RunConfig, tamper: bool) -> Result<Report> {
    let o = ValidateOptions {
        params: cfg.params()?,
        sigma: cfg.sigma().unwrap_or(0.65),
        n: cfg.scatter.n,
        unitarity_points: cfg.validate.unitarity_points,
        elimination_cases: cfg.validate.elimination_cases,
        seed: cfg.seed,
        tamper: Tamper { flip_dimer_phase_in_heff: tamper },
    };
    let checks = validate_suite(o);
    let all = checks.iter().all(|c| c.pass);
    let rows = checks
        .iter()
        .map(|c| vec![c.name.clone(), c.pass.to_string(), f(c.value), f(c.tolerance), f(c.runtime_s)])
        .collect();
    let mut r = Report::new(json!({ "checks": checks, "all_pass": all }))?
        .with_table(&["check", "pass", "value", "tolerance", "runtime_s"], rows);
    if !all {
        r.exit_code = 3;
    }
    Ok(r)
}
