use std::sync::Arc;

use faer::c64;
use serde::Serialize;

use super::{norm_sqr, Grid2D, Region};
use crate::error::{Error, Result};
use crate::lattice::{BoundState, Side};

#[derive(Debug, Clone, Copy)]
pub struct CnOptions {
    pub dt: f64,
    pub t_max: f64,
    pub sample_interval: f64,
    /// Relative change per Gauss-Seidel sweep at which a step is converged.
    pub solve_tol: f64,
    pub max_sweeps: usize,
}

impl Default for CnOptions {
    fn default() -> Self {
        Self { dt: 0.02, t_max: 100.0, sample_interval: 0.5, solve_tol: 1e-14, max_sweeps: 200 }
    }
}

/// Current bookkeeping at a cut on the open side of a trap.
#[derive(Debug, Clone)]
pub struct FluxConfig {
    pub cut: i64,
    pub open_side: Side,
    pub bound_states: Vec<Arc<BoundState>>,
    /// Width of the dimer window behind the cut.
    pub dimer_window: i64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norm: Vec<f64>,
    pub trap_region: Option<Region>,
    pub trap_norm: Vec<f64>,
    pub energy: Vec<f64>,
    pub symmetry_defect: Vec<f64>,
    /// Largest relative norm change over a single step, absorber off only.
    pub max_step_norm_drift: f64,
    pub flux_dimer: Vec<f64>,
    pub flux_dissociation: Vec<f64>,
    pub flux_total: Vec<f64>,
    /// Probability on the inner side of the cut in both coordinates.
    pub inner_probability: Vec<f64>,
    #[serde(skip)]
    pub final_state: Vec<c64>,
}

/// Crank-Nicolson stepper; the implicit half is solved by Gauss-Seidel.
/// For dt J << 1 each sweep reduces the error by about (dt J)^2.
struct Stepper<'a> {
    grid: &'a Grid2D,
    p: usize,
    /// Inverse diagonal of 1 + i dt/2 H.
    diag_a: Vec<c64>,
    diag_b: Vec<c64>,
    off: c64,
    active: Vec<bool>,
    opts: CnOptions,
}

impl<'a> Stepper<'a> {
    fn new(grid: &'a Grid2D, opts: CnOptions) -> Self {
        let s = grid.side();
        let p = s + 2;
        let half = c64::new(0.0, opts.dt / 2.0);
        let mut diag_a = vec![c64::new(0.0, 0.0); p * p];
        let mut diag_b = vec![c64::new(0.0, 0.0); p * p];
        let mut active = vec![false; p * p];
        for a in 0..s {
            for b in 0..s {
                let i = a * s + b;
                if !grid.is_active(i) {
                    continue;
                }
                let h = c64::new(grid.onsite(i), 0.0) + grid.absorber[a] + grid.absorber[b];
                let ip = (a + 1) * p + b + 1;
                diag_a[ip] = (c64::new(1.0, 0.0) + half * h).inv();
                diag_b[ip] = c64::new(1.0, 0.0) - half * h;
                active[ip] = true;
            }
        }
        Self { grid, p, diag_a, diag_b, off: half * (-grid.params.j / 2.0), active, opts }
    }

    fn pad(&self, psi: &[c64]) -> Vec<c64> {
        let s = self.grid.side();
        let mut x = vec![c64::new(0.0, 0.0); self.p * self.p];
        for a in 0..s {
            x[(a + 1) * self.p + 1..(a + 1) * self.p + 1 + s].copy_from_slice(&psi[a * s..(a + 1) * s]);
        }
        x
    }

    fn unpad(&self, x: &[c64]) -> Vec<c64> {
        let s = self.grid.side();
        let mut psi = Vec::with_capacity(s * s);
        for a in 0..s {
            psi.extend_from_slice(&x[(a + 1) * self.p + 1..(a + 1) * self.p + 1 + s]);
        }
        psi
    }

    #[inline]
    fn nb(x: &[c64], i: usize, p: usize) -> c64 {
        x[i - 1] + x[i + 1] + x[i - p] + x[i + p]
    }

    /// Advances x in place; `rhs` is scratch. `hist` holds the two previous
    /// states and seeds Gauss-Seidel with a quadratic extrapolation.
    fn step(&self, x: &mut [c64], rhs: &mut [c64], hist: &mut History) -> Result<()> {
        let p = self.p;
        let s = self.grid.side();
        for a in 1..=s {
            for i in a * p + 1..a * p + 1 + s {
                rhs[i] = if self.active[i] { self.diag_b[i] * x[i] - self.off * Self::nb(x, i, p) } else { c64::new(0.0, 0.0) };
            }
        }
        hist.extrapolate(x);
        let scale = x.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max).sqrt().max(1e-300);
        for _ in 0..self.opts.max_sweeps {
            let mut delta: f64 = 0.0;
            for a in 1..=s {
                for i in a * p + 1..a * p + 1 + s {
                    if !self.active[i] {
                        continue;
                    }
                    let new = (rhs[i] - self.off * Self::nb(x, i, p)) * self.diag_a[i];
                    delta = delta.max((new - x[i]).norm_sqr());
                    x[i] = new;
                }
            }
            if !delta.is_finite() {
                return Err(Error::SolveFailure("non-finite amplitude".into()));
            }
            if delta.sqrt() <= self.opts.solve_tol * scale {
                return Ok(());
            }
        }
        Err(Error::SolveFailure(format!("Gauss-Seidel not converged in {} sweeps", self.opts.max_sweeps)))
    }
}

struct History {
    prev: Vec<c64>,
    prev2: Vec<c64>,
    have: usize,
}

impl History {
    fn new(n: usize) -> Self {
        Self { prev: vec![c64::new(0.0, 0.0); n], prev2: vec![c64::new(0.0, 0.0); n], have: 0 }
    }

    /// Replace x_n by a guess for x_{n+1} and shift the history.
    fn extrapolate(&mut self, x: &mut [c64]) {
        for i in 0..x.len() {
            let cur = x[i];
            let guess = match self.have {
                0 => cur,
                1 => cur * 2.0 - self.prev[i],
                _ => cur * 3.0 - self.prev[i] * 3.0 + self.prev2[i],
            };
            self.prev2[i] = self.prev[i];
            self.prev[i] = cur;
            x[i] = guess;
        }
        self.have = (self.have + 1).min(2);
    }
}

struct FluxAccumulator {
    outer: usize,
    inner: usize,
    /// Coordinates n on the inner side of the cut.
    inside: Vec<usize>,
    window: Vec<usize>,
    /// Bound-state amplitudes on `inside`.
    profiles: Vec<Vec<f64>>,
    dimer: f64,
    diss: f64,
    total: f64,
}

impl FluxAccumulator {
    fn new(grid: &Grid2D, f: &FluxConfig) -> Result<Self> {
        let s = f.open_side.sign();
        let inner_site = f.cut - s;
        let (outer, inner) = match (grid.index(f.cut, f.cut), grid.index(inner_site, inner_site)) {
            (Some(_), Some(_)) => ((f.cut - grid.lo) as usize, (inner_site - grid.lo) as usize),
            _ => return Err(Error::InvalidParams(format!("flux cut {} outside grid", f.cut))),
        };
        let inside: Vec<usize> = (0..grid.side())
            .filter(|&b| {
                let n = grid.lo + b as i64;
                (n - f.cut) * (-s) > 0
            })
            .collect();
        let window = inside
            .iter()
            .copied()
            .filter(|&b| ((grid.lo + b as i64) - f.cut).abs() <= f.dimer_window)
            .collect();
        let profiles = f
            .bound_states
            .iter()
            .map(|bs| inside.iter().map(|&b| bs.at(grid.lo + b as i64)).collect())
            .collect();
        Ok(Self { outer, inner, inside, window, profiles, dimer: 0.0, diss: 0.0, total: 0.0 })
    }

    /// Current from the inner to the outer row for particle 1, doubled for
    /// exchange, evaluated on the CN midpoint state.
    fn accumulate(&mut self, old: &[c64], new: &[c64], p: usize, j: f64, dt: f64) {
        let mid = |row: usize, b: usize| {
            let i = (row + 1) * p + b + 1;
            (old[i] + new[i]) * 0.5
        };
        let cur = |a: c64, b: c64| -j * (a.conj() * b).im;
        let mut total = 0.0;
        for &b in &self.inside {
            total += cur(mid(self.outer, b), mid(self.inner, b));
        }
        let mut dimer = 0.0;
        for &b in &self.window {
            dimer += cur(mid(self.outer, b), mid(self.inner, b));
        }
        let mut diss = 0.0;
        for prof in &self.profiles {
            let mut ao = c64::new(0.0, 0.0);
            let mut ai = c64::new(0.0, 0.0);
            for (k, &b) in self.inside.iter().enumerate() {
                ao += mid(self.outer, b) * prof[k];
                ai += mid(self.inner, b) * prof[k];
            }
            diss += cur(ao, ai);
        }
        self.total += 2.0 * dt * total;
        self.dimer += 2.0 * dt * dimer;
        self.diss += 2.0 * dt * diss;
    }
}

pub fn crank_nicolson_propagate(
    grid: &Grid2D,
    psi0: &[c64],
    opts: CnOptions,
    trap: Option<Region>,
    flux: Option<&FluxConfig>,
) -> Result<Trajectory> {
    if !(opts.dt > 0.0) || opts.t_max < 0.0 {
        return Err(Error::InvalidParams("dt must be positive".into()));
    }
    if psi0.len() != grid.len() {
        return Err(Error::InvalidParams("state does not match grid".into()));
    }
    let st = Stepper::new(grid, opts);
    let mut x = st.pad(psi0);
    let mut rhs = vec![c64::new(0.0, 0.0); x.len()];
    let mut hist = History::new(x.len());
    let steps = (opts.t_max / opts.dt).round() as usize;
    let every = ((opts.sample_interval / opts.dt).round() as usize).max(1);
    let mut acc = match flux {
        Some(f) => Some(FluxAccumulator::new(grid, f)?),
        None => None,
    };
    let inner_region = flux.map(|f| {
        let (lo, hi) = match f.open_side {
            Side::L => (f.cut + 1, grid.hi),
            Side::R => (grid.lo, f.cut - 1),
        };
        Region::square(lo, hi)
    });
    let absorbing = grid.absorber.iter().any(|a| a.im != 0.0);
    let mut traj = Trajectory { trap_region: trap, ..Default::default() };
    let mut old = x.clone();
    let mut last_norm = norm_sqr(psi0);
    for s in 0..=steps {
        if s % every == 0 || s == steps {
            let psi = st.unpad(&x);
            let nrm = norm_sqr(&psi);
            traj.times.push(s as f64 * opts.dt);
            traj.norm.push(nrm);
            traj.trap_norm.push(trap.map_or(nrm, |r| r.probability(grid, &psi)));
            traj.energy.push(grid.energy(&psi));
            traj.symmetry_defect.push(grid.symmetry_defect(&psi));
            if let Some(a) = &acc {
                traj.flux_dimer.push(a.dimer);
                traj.flux_dissociation.push(a.diss);
                traj.flux_total.push(a.total);
                traj.inner_probability.push(inner_region.unwrap().probability(grid, &psi));
            }
            if s == steps {
                traj.final_state = psi;
                break;
            }
        }
        if acc.is_some() {
            old.copy_from_slice(&x);
        }
        st.step(&mut x, &mut rhs, &mut hist)?;
        if let Some(a) = acc.as_mut() {
            a.accumulate(&old, &x, st.p, grid.params.j, opts.dt);
        }
        if !absorbing {
            let n = x.iter().map(|v| v.norm_sqr()).sum::<f64>();
            traj.max_step_norm_drift = traj.max_step_norm_drift.max((n - last_norm).abs() / last_norm);
            last_norm = n;
        }
    }
    Ok(traj)
}

/// rho(t) on the trap region recorded during propagation.
pub fn nonescape_probability_direct(grid: &Grid2D, traj: &Trajectory, trap: Region) -> Result<Vec<f64>> {
    if trap.m.0 < grid.lo || trap.m.1 > grid.hi || trap.n.0 < grid.lo || trap.n.1 > grid.hi {
        return Err(Error::InvalidParams("trap region outside grid".into()));
    }
    if traj.trap_region != Some(trap) {
        return Err(Error::InvalidParams("trajectory was recorded for a different region".into()));
    }
    Ok(traj.trap_norm.clone())
}
