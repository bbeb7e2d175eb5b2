use std::f64::consts::PI;

use faer::{c64, Mat};

use super::heff::{build_effective_hamiltonian, ChannelKind, Coupling, EffectiveHamiltonian, Tamper};
use super::InteriorBox;
use crate::error::{Error, Result};
use crate::lattice::{build_channel_set, ChannelSet, LatticeParams, OnSitePotential, Sides, Window};
use crate::linalg::{dotu, CMat, Lu};

const I: c64 = c64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemOptions {
    pub include_evanescent: bool,
    pub tamper: Tamper,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        Self { include_evanescent: true, tamper: Tamper::default() }
    }
}

/// Everything needed to solve the stationary problem at one (K, v, N).
pub struct ScatteringProblem {
    pub k: f64,
    pub n: i64,
    pub params: LatticeParams,
    pub bx: InteriorBox,
    pub channels: ChannelSet,
    pub heff: EffectiveHamiltonian,
    lu: Lu,
}

impl ScatteringProblem {
    pub fn new(k: f64, v: &OnSitePotential, p: &LatticeParams, n: i64) -> Result<Self> {
        Self::with_options(k, v, p, n, ProblemOptions::default())
    }

    pub fn with_options(
        k: f64,
        v: &OnSitePotential,
        p: &LatticeParams,
        n: i64,
        opts: ProblemOptions,
    ) -> Result<Self> {
        p.validate()?;
        if !(k > 0.0 && k < PI) || (k / 2.0).sin() < 1e-12 || (k / 2.0).cos() < 1e-12 {
            return Err(Error::DegenerateMomentum(format!("K={k} at or beyond a band edge")));
        }
        let (slo, shi) = v.support();
        let reach = slo.abs().max(shi.abs());
        if n < reach + 1 || n < 1 {
            return Err(Error::InvalidParams(format!(
                "box radius N={n} does not enclose the potential support (needs N >= {})",
                reach + 1
            )));
        }
        let mut channels = build_channel_set(k, v, p, Sides::Both, Window::for_box(n))?;
        if !opts.include_evanescent {
            channels.dissociation.retain(|d| d.is_open);
        }
        for d in channels.open_dissociation() {
            if d.1.k.re.sin() < 1e-6 {
                return Err(Error::ZeroVelocity(format!(
                    "dissociation channel {} at threshold (k_b={})",
                    d.0, d.1.k.re
                )));
            }
        }
        let bx = InteriorBox::symmetric(n, v, p);
        let heff = build_effective_hamiltonian(&bx, &channels, p, opts.tamper);
        let lu = Lu::factor(&heff.shifted(channels.e))?;
        Ok(Self { k, n, params: *p, bx, channels, heff, lu })
    }

    pub fn energy(&self) -> f64 {
        self.channels.e.re
    }

    pub fn lambda(&self) -> f64 {
        self.channels.dimer.lambda.re
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.heff.couplings
    }

    pub fn lu(&self) -> &Lu {
        &self.lu
    }

    /// P = e^{-iK/2} / (2 sin(K/2))
    pub fn p_scalar(&self) -> c64 {
        (-I * self.k / 2.0).exp() / (2.0 * (self.k / 2.0).sin())
    }

    /// G = sinh(l) e^{-iK/2} / sin(K/2) * e^{-iKN} / (e^l - e^{iK-l})
    pub fn g_scalar(&self) -> c64 {
        let l = self.lambda();
        let k = self.k;
        let den = c64::new(l.exp(), 0.0) - (I * k - l).exp();
        (-I * k / 2.0).exp() * (l.sinh() / (k / 2.0).sin()) * (-I * k * self.n as f64).exp() / den
    }

    /// f = G/P
    pub fn f_scalar(&self) -> c64 {
        let l = self.lambda();
        let den = c64::new(l.exp(), 0.0) - (I * self.k - l).exp();
        (-I * self.k * self.n as f64).exp() * (2.0 * l.sinh()) / den
    }

    pub fn q_scalar(kb: c64) -> c64 {
        (-I * kb).exp() / (kb.sin() * 2.0)
    }

    /// Amplitude relating W to the normalized boundary vector.
    fn c_w(&self) -> c64 {
        let l = self.lambda();
        (I * self.k / 2.0).exp() * 0.5 * (2.0 * l.sinh() / (self.k / 2.0).sin()).sqrt()
    }

    fn check_incoming(&self, a: &[c64]) -> Result<()> {
        assert_eq!(a.len(), self.couplings().len(), "one amplitude per channel");
        for (i, (c, x)) in self.couplings().iter().zip(a).enumerate() {
            if !c.is_open && x.norm() > 0.0 {
                return Err(Error::ClosedChannel(i));
            }
        }
        Ok(())
    }

    /// Source of the interior equation for incoming amplitudes `a`:
    /// (f W - W*) a_C for the dimer and i sqrt(2 sin k_b) V~ a_b otherwise.
    pub fn literal_source(&self, a: &[c64]) -> Result<Vec<c64>> {
        self.check_incoming(a)?;
        let f = self.f_scalar();
        let cw = self.c_w();
        let mut rhs = vec![c64::new(0.0, 0.0); self.bx.dim()];
        for (c, &x) in self.couplings().iter().zip(a) {
            if x.norm() == 0.0 {
                continue;
            }
            match c.label.kind {
                ChannelKind::Dimer => {
                    for (r, u) in rhs.iter_mut().zip(&c.u) {
                        let w = cw * u;
                        *r += (f * w - w.conj()) * x;
                    }
                }
                ChannelKind::Dissociation(_) => {
                    for (r, u) in rhs.iter_mut().zip(&c.u) {
                        *r += I * c.g * u * x;
                    }
                }
            }
        }
        Ok(rhs)
    }

    /// Interior solution and outgoing amplitudes (one per coupling) for the
    /// elimination-route equation.
    pub fn solve_scattering(&self, a: &[c64]) -> Result<(Vec<c64>, Vec<c64>)> {
        let rhs = self.literal_source(a)?;
        let chi = self.lu.solve_vec(&rhs);
        let f = self.f_scalar();
        let out = self
            .couplings()
            .iter()
            .zip(a)
            .map(|(c, &x)| {
                let d = match c.label.kind {
                    ChannelKind::Dimer => -f,
                    ChannelKind::Dissociation(_) => c64::new(-1.0, 0.0),
                };
                d * x - c.g * dotu(&c.u_dual, &chi)
            })
            .collect();
        Ok((chi, out))
    }

    /// Full bordered system with the channel amplitudes kept as unknowns.
    /// Returns (interior chi, channel amplitudes).
    pub fn solve_bordered(&self, a: &[c64]) -> Result<(Vec<c64>, Vec<c64>)> {
        self.check_incoming(a)?;
        let d = self.bx.dim();
        let cs = self.couplings();
        let m = cs.len();
        let e = self.channels.e;
        let mut big = Mat::<c64>::zeros(d + m, d + m);
        let h0 = self.bx.h0();
        for j in 0..d {
            for i in 0..d {
                big[(i, j)] = c64::new(h0[(i, j)], 0.0);
            }
            big[(j, j)] -= e;
        }
        let mut rhs = vec![c64::new(0.0, 0.0); d + m];
        let (p, g, cw) = (self.p_scalar(), self.g_scalar(), self.c_w());
        for (t, c) in cs.iter().enumerate() {
            let (colc, rowc, diag, bottom) = match c.label.kind {
                ChannelKind::Dimer => (cw, cw.conj(), p, g),
                ChannelKind::Dissociation(_) => {
                    let ph = (I * c.q).exp();
                    let q = Self::q_scalar(c.q);
                    (ph / c.g, ph.inv() / c.g, q, q)
                }
            };
            for i in 0..d {
                big[(i, d + t)] = colc * c.u[i];
                big[(d + t, i)] = rowc * c.u_dual[i];
            }
            big[(d + t, d + t)] = diag;
            let x = a[t];
            if x.norm() > 0.0 {
                // Theta = sum conj(column) * a
                for i in 0..d {
                    rhs[i] -= (colc * c.u[i]).conj() * x;
                }
                rhs[d + t] = -bottom * x;
            }
        }
        let lu = Lu::factor(&big)?;
        let sol = lu.solve_vec(&rhs);
        Ok((sol[..d].to_vec(), sol[d..].to_vec()))
    }

    /// Flux-normalized S-matrix over open channels.
    pub fn smatrix(&self) -> super::SMatrix {
        let cs = self.couplings();
        let open: Vec<usize> = (0..cs.len()).filter(|&i| cs[i].is_open).collect();
        let no = open.len();
        let d = self.bx.dim();
        let rhs = Mat::<c64>::from_fn(d, no, |i, t| I * cs[open[t]].g * cs[open[t]].u[i]);
        let chi = self.lu.solve(&rhs);
        let mut s = Mat::<c64>::zeros(no, no);
        for t in 0..no {
            for (tp, &cp) in open.iter().enumerate() {
                let c = &cs[cp];
                let mut acc = c64::new(0.0, 0.0);
                for i in 0..d {
                    acc += c.u_dual[i] * chi[(i, t)];
                }
                s[(tp, t)] = -c.g * acc - if tp == t { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
            }
        }
        self.make_smatrix(s, &open)
    }

    /// S-matrix assembled literally from the elimination route, with
    /// Delta = diag(-f, -f, -1, ...). Not unitary at finite N.
    pub fn smatrix_literal(&self) -> Result<super::SMatrix> {
        let cs = self.couplings();
        let open: Vec<usize> = (0..cs.len()).filter(|&i| cs[i].is_open).collect();
        let no = open.len();
        let mut s = Mat::<c64>::zeros(no, no);
        for (t, &ct) in open.iter().enumerate() {
            let mut a = vec![c64::new(0.0, 0.0); cs.len()];
            a[ct] = c64::new(1.0, 0.0);
            let (_, out) = self.solve_scattering(&a)?;
            for (tp, &cp) in open.iter().enumerate() {
                s[(tp, t)] = out[cp];
            }
        }
        Ok(self.make_smatrix(s, &open))
    }

    fn make_smatrix(&self, s: CMat, open: &[usize]) -> super::SMatrix {
        let cs = self.couplings();
        super::SMatrix {
            e: self.energy(),
            k: self.k,
            n: self.n,
            labels: open.iter().map(|&i| cs[i].label).collect(),
            q: open.iter().map(|&i| cs[i].q.re).collect(),
            closed: cs.iter().filter(|c| !c.is_open).map(|c| c.label).collect(),
            s,
        }
    }
}
