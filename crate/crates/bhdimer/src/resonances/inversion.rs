use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ResponseSamples {
    pub energies: Vec<f64>,
    #[serde(serialize_with = "crate::cplx::ser_vec")]
    pub values: Vec<c64>,
    pub n0: i64,
    /// Energies skipped because the solve was singular.
    pub skipped: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoleCandidate {
    #[serde(serialize_with = "crate::cplx::ser")]
    pub z: c64,
    #[serde(serialize_with = "crate::cplx::ser")]
    pub residue: c64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InversionFit {
    /// Sorted by |Im z| ascending.
    pub candidates: Vec<PoleCandidate>,
    /// Max abs deviation on the samples relative to max |g|.
    pub residual: f64,
    pub order: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub tol: f64,
    pub max_order: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_order: 120 }
    }
}

/// Barycentric rational approximant built greedily (AAA).
struct Barycentric {
    z: Vec<f64>,
    f: Vec<c64>,
    w: Vec<c64>,
}

impl Barycentric {
    fn eval(&self, x: c64) -> c64 {
        let mut n = c64::new(0.0, 0.0);
        let mut d = c64::new(0.0, 0.0);
        for j in 0..self.z.len() {
            let dx = x - self.z[j];
            if dx == c64::new(0.0, 0.0) {
                return self.f[j];
            }
            let c = self.w[j] / dx;
            n += c * self.f[j];
            d += c;
        }
        n / d
    }

    fn poles(&self) -> Result<Vec<c64>> {
        let m = self.z.len();
        let e = Mat::from_fn(m + 1, m + 1, |i, j| match (i, j) {
            (0, 0) => c64::new(0.0, 0.0),
            (0, j) => self.w[j - 1],
            (_, 0) => c64::new(1.0, 0.0),
            (i, j) if i == j => c64::new(self.z[i - 1], 0.0),
            _ => c64::new(0.0, 0.0),
        });
        let b = Mat::from_fn(m + 1, m + 1, |i, j| {
            if i == j && i > 0 {
                c64::new(1.0, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let ge = e.generalized_eigen(&b).map_err(|err| Error::Eigen(format!("{err:?}")))?;
        let (sa, sb) = (ge.S_a(), ge.S_b());
        let mut out = Vec::new();
        for i in 0..m + 1 {
            if sb[i].norm() > 1e-13 * sa[i].norm().max(1.0) {
                let p = sa[i] / sb[i];
                if p.re.is_finite() && p.im.is_finite() {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }

    /// Residue n(p)/d'(p).
    fn residue(&self, p: c64) -> c64 {
        let mut n = c64::new(0.0, 0.0);
        let mut dd = c64::new(0.0, 0.0);
        for j in 0..self.z.len() {
            let inv = (p - self.z[j]).inv();
            n += self.w[j] * self.f[j] * inv;
            dd -= self.w[j] * inv * inv;
        }
        n / dd
    }
}

fn aaa(x: &[f64], f: &[c64], opts: FitOptions) -> Result<(Barycentric, f64)> {
    let m_all = x.len();
    let scale = f.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let mean = f.iter().sum::<c64>() / m_all as f64;
    let mut r = vec![mean; m_all];
    let mut free = vec![true; m_all];
    let mut zs: Vec<f64> = Vec::new();
    let mut fs: Vec<c64> = Vec::new();
    let mut best: Option<(Barycentric, f64)> = None;
    let max_order = opts.max_order.min(m_all / 2);
    for _ in 0..max_order {
        let j = (0..m_all)
            .filter(|&i| free[i])
            .max_by(|&a, &b| (f[a] - r[a]).norm().partial_cmp(&(f[b] - r[b]).norm()).unwrap())
            .unwrap();
        free[j] = false;
        zs.push(x[j]);
        fs.push(f[j]);
        let rows: Vec<usize> = (0..m_all).filter(|&i| free[i]).collect();
        let m = zs.len();
        let loewner = Mat::from_fn(rows.len(), m, |a, b| (f[rows[a]] - fs[b]) / (x[rows[a]] - zs[b]));
        let svd = loewner.svd().map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let mut kmin = 0;
        if m > 1 {
            // smallest singular value: faer orders them nonincreasing but
            // thin SVDs of tall matrices keep only m of them
            kmin = (0..m).min_by(|&a, &b| svd.S()[a].re.partial_cmp(&svd.S()[b].re).unwrap()).unwrap();
        }
        let w: Vec<c64> = (0..m).map(|i| svd.V()[(i, kmin)]).collect();
        let bary = Barycentric { z: zs.clone(), f: fs.clone(), w };
        let mut err = 0.0f64;
        for i in 0..m_all {
            r[i] = if free[i] { bary.eval(c64::new(x[i], 0.0)) } else { f[i] };
            err = err.max((f[i] - r[i]).norm());
        }
        let rel = err / scale;
        let improved = best.as_ref().map_or(true, |b| rel < b.1);
        if improved {
            best = Some((bary, rel));
        }
        if rel <= opts.tol {
            break;
        }
    }
    let (b, rel) = best.expect("at least one AAA step");
    if rel > opts.tol {
        return Err(Error::FitDiverged(rel));
    }
    Ok((b, rel))
}

/// Fits g(E) = sum_l A_l / (E - z_l) plus a smooth background by rational
/// approximation and returns the pole-residue pairs.
pub fn harmonic_inversion_fit(samples: &ResponseSamples, max_poles: usize, opts: FitOptions) -> Result<InversionFit> {
    let n = samples.energies.len();
    if n < 4 * max_poles {
        return Err(Error::InvalidParams(format!("{n} samples for {max_poles} poles")));
    }
    if samples.energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("energy grid not strictly increasing".into()));
    }
    let opts = FitOptions { max_order: opts.max_order.min(max_poles + 1), ..opts };
    let (bary, residual) = aaa(&samples.energies, &samples.values, opts)?;
    let mut candidates: Vec<PoleCandidate> = bary
        .poles()?
        .into_iter()
        .map(|z| PoleCandidate { z, residue: bary.residue(z) })
        .collect();
    candidates.sort_by(|a, b| a.z.im.abs().partial_cmp(&b.z.im.abs()).unwrap());
    Ok(InversionFit { candidates, residual, order: bary.z.len() })
}

/// Pole sum sampled on a grid, used by the self-test and synthetic checks.
pub fn synthetic_samples(poles: &[(c64, c64)], energies: Vec<f64>) -> ResponseSamples {
    let values = energies
        .iter()
        .map(|&e| poles.iter().map(|&(z, a)| a / (c64::new(e, 0.0) - z)).sum())
        .collect();
    ResponseSamples { energies, values, n0: 0, skipped: vec![] }
}
