//! Stationary scattering of a dimer off a Gaussian barrier or well.
//!
//!     cargo run --release --example scatter -- [V] [K]

use std::f64::consts::PI;

use bhdimer::lattice::{LatticeParams, OnSitePotential};
use bhdimer::scattering::ScatteringProblem;

fn main() -> bhdimer::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("numeric argument"));
    let v = args.next().unwrap_or(-2.0);
    let k = args.next().unwrap_or(PI / 2.0);
    let p = LatticeParams::default();
    let pot = OnSitePotential::gaussian(v, 0.65)?;

    let prob = ScatteringProblem::new(k, &pot, &p, 10)?;
    let s = prob.smatrix();
    println!("K = {k:.4}  E = {:.6}  lambda = {:.4}", prob.energy(), prob.lambda());
    for (b, d) in prob.channels.dissociation.iter().enumerate() {
        let state = if d.is_open { "open" } else { "closed" };
        println!("  bound level {b}: E_b = {:.6}, k_b = {:.4}, {state}", d.bound_state.energy, d.k);
    }
    let pr = s.probabilities(0)?;
    println!("P_t = {:.6}  P_r = {:.6}  P_d = {:.6}", pr.p_t, pr.p_r, pr.p_d);
    println!("max |S^dag S - 1| = {:.2e}", s.unitarity_defect());
    Ok(())
}
