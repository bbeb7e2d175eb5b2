//! Box-size convergence of the dimer reflection amplitude.

use bhdimer::lattice::{LatticeParams, OnSitePotential};
use bhdimer::scattering::convergence_scan;

fn main() -> bhdimer::Result<()> {
    let ns: Vec<i64> = (6..=20).collect();
    let k = std::f64::consts::FRAC_PI_2;
    for v in [-2.0, -1.0, 0.8] {
        let scan = convergence_scan(k, &OnSitePotential::gaussian(v, 0.65)?, &LatticeParams::default(), &ns, 25)?;
        println!("V = {v}: d ln|R(N) - R(25)| / dN = {:.3}", scan.slope);
        for (n, e) in scan.points.iter().step_by(2) {
            println!("  N = {n:>2}  {e:.3e}");
        }
    }
    Ok(())
}
