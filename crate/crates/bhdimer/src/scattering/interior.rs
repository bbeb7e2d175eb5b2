use faer::{c64, Mat};

use crate::lattice::{BoundState, LatticeParams, OnSitePotential, Side};
use crate::linalg::CMat;

/// Square box `[lo, hi]^2` of two-particle sites with the lattice
/// Hamiltonian restricted to it (zero amplitude outside).
#[derive(Debug, Clone)]
pub struct InteriorBox {
    lo: i64,
    hi: i64,
    side: usize,
    h0: Mat<f64>,
}

impl InteriorBox {
    pub fn symmetric(n: i64, v: &OnSitePotential, p: &LatticeParams) -> Self {
        Self::new(-n, n, v, p)
    }

    pub fn new(lo: i64, hi: i64, v: &OnSitePotential, p: &LatticeParams) -> Self {
        assert!(hi >= lo, "empty box");
        let side = (hi - lo + 1) as usize;
        let dim = side * side;
        let vs: Vec<f64> = (lo..=hi).map(|m| v.value(m)).collect();
        let mut h0 = Mat::<f64>::zeros(dim, dim);
        let t = -p.j / 2.0;
        for a in 0..side {
            for b in 0..side {
                let i = a * side + b;
                h0[(i, i)] = vs[a] + vs[b] + if a == b { p.u } else { 0.0 };
                if a + 1 < side {
                    h0[(i, i + side)] = t;
                    h0[(i + side, i)] = t;
                }
                if b + 1 < side {
                    h0[(i, i + 1)] = t;
                    h0[(i + 1, i)] = t;
                }
            }
        }
        Self { lo, hi, side, h0 }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn side_len(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.side * self.side
    }

    pub fn index(&self, m: i64, n: i64) -> Option<usize> {
        if m < self.lo || m > self.hi || n < self.lo || n > self.hi {
            return None;
        }
        Some((m - self.lo) as usize * self.side + (n - self.lo) as usize)
    }

    pub fn site(&self, i: usize) -> (i64, i64) {
        (self.lo + (i / self.side) as i64, self.lo + (i % self.side) as i64)
    }

    /// Index of the exchanged site (n, m).
    pub fn swapped(&self, i: usize) -> usize {
        (i % self.side) * self.side + i / self.side
    }

    pub fn h0(&self) -> &Mat<f64> {
        &self.h0
    }

    pub fn h0_complex(&self) -> CMat {
        Mat::from_fn(self.dim(), self.dim(), |i, j| c64::new(self.h0[(i, j)], 0.0))
    }

    pub fn edge(&self, side: Side) -> i64 {
        match side {
            Side::L => self.lo,
            Side::R => self.hi,
        }
    }

    /// Sum f(other coordinate) over the boundary rows m = edge and n = edge.
    fn boundary_vector(&self, side: Side, f: impl Fn(i64) -> c64) -> Vec<c64> {
        let e = self.edge(side);
        let mut w = vec![c64::new(0.0, 0.0); self.dim()];
        for x in self.lo..=self.hi {
            let i = self.index(e, x).unwrap();
            w[i] += f(x);
            let j = self.index(x, e).unwrap();
            w[j] += f(x);
        }
        w
    }

    /// Dimer boundary vector and its analytic dual (the complex conjugate
    /// for real K and lambda).
    pub fn dimer_vectors(&self, side: Side, k: c64, lambda: c64, j: f64, flip_phase: bool) -> (Vec<c64>, Vec<c64>) {
        let s = side.sign() as f64;
        let outside = (self.edge(side) + side.sign()) as f64;
        let pre = -(j / 2.0).sqrt();
        let ph = if flip_phase { -s } else { s };
        let w = self.boundary_vector(side, |x| {
            let x = x as f64;
            (c64::new(0.0, ph) * k * (x / 2.0) - lambda * (x - outside).abs()).exp() * pre
        });
        let wd = self.boundary_vector(side, |x| {
            let x = x as f64;
            (c64::new(0.0, -s) * k * (x / 2.0) - lambda * (x - outside).abs()).exp() * pre
        });
        (w, wd)
    }

    /// Dissociation boundary vector built from a bound state.
    pub fn dissociation_vector(&self, side: Side, b: &BoundState, j: f64) -> Vec<c64> {
        let pre = -j.sqrt() / 2.0;
        self.boundary_vector(side, |x| c64::new(pre * b.at(x), 0.0))
    }
}
