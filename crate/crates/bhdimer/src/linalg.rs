//! Thin helpers over faer for dense complex work.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

/// Reciprocal pivot-ratio threshold beyond which a factorization is
/// considered rank deficient.
const SINGULAR_COND: f64 = 1e15;

pub struct Lu {
    lu: PartialPivLu<c64>,
    n: usize,
    cond: f64,
}

impl Lu {
    pub fn factor(a: &CMat) -> Result<Self> {
        let n = a.nrows();
        let lu = a.partial_piv_lu();
        let u = lu.U();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = u[(i, i)].norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !cond.is_finite() || cond > SINGULAR_COND {
            return Err(Error::SingularSystem { cond });
        }
        Ok(Self { lu, n, cond })
    }

    /// Pivot-ratio condition estimate.
    pub fn cond(&self) -> f64 {
        self.cond
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &CMat) -> CMat {
        self.lu.solve(b)
    }

    pub fn solve_vec(&self, b: &[c64]) -> Vec<c64> {
        let mut m = col(b);
        self.lu.solve_in_place(&mut m);
        to_vec(&m)
    }

    /// Solves A^T x = b.
    pub fn solve_transpose_vec(&self, b: &[c64]) -> Vec<c64> {
        let mut m = col(b);
        self.lu.solve_transpose_in_place(&mut m);
        to_vec(&m)
    }
}

pub fn col(v: &[c64]) -> CMat {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn to_vec(m: &CMat) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

/// Bilinear product sum a_i b_i.
pub fn dotu(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sesquilinear product sum conj(a_i) b_i.
pub fn dotc(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(a: &[c64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn matvec(a: &CMat, x: &[c64]) -> Vec<c64> {
    let mut y = vec![c64::new(0.0, 0.0); a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == c64::new(0.0, 0.0) {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

pub fn eigenvalues(a: &CMat) -> Result<Vec<c64>> {
    a.eigenvalues().map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Smallest singular value by inverse iteration on (A^H A)^{-1} using an
/// existing factorization of A.
pub fn min_singular_value(lu: &Lu, iters: usize) -> f64 {
    let n = lu.dim();
    let mut x: Vec<c64> = (0..n).map(|i| c64::new(1.0 + (i % 7) as f64 * 0.1, 0.0)).collect();
    let mut est = 0.0;
    for _ in 0..iters {
        let nx = norm2(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        // A^{-H} x = conj(A^{-T} conj(x))
        let xc: Vec<c64> = x.iter().map(|v| v.conj()).collect();
        let y: Vec<c64> = lu.solve_transpose_vec(&xc).into_iter().map(|v| v.conj()).collect();
        let z = lu.solve_vec(&y);
        let nz = norm2(&z);
        est = 1.0 / nz.sqrt();
        x = z;
    }
    est
}
