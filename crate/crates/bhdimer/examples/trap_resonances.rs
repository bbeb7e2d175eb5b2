//! Resonances of the dimer trapped between a hard wall and a barrier.
//!
//!     cargo run --release --example trap_resonances -- [V]

use bhdimer::resonances::{find_resonances, ResonanceOptions, Trap, TrapConfig};

fn main() -> bhdimer::Result<()> {
    let v: f64 = std::env::args().nth(1).map_or(0.8, |a| a.parse().expect("V"));
    let trap = Trap::new(TrapConfig::default_with_barrier(v, 0.65)?)?;
    println!("V = {v}: {} single-particle bound levels, box dimension {}", trap.bound.len(), trap.dim());

    let opts = ResonanceOptions { check_fixed_point: true, ..Default::default() };
    let rep = find_resonances(&trap, opts)?;
    println!("rational fit of order {} (residual {:.1e})", rep.fit_order, rep.fit_residual);
    println!("{:>14} {:>11} {:>9} {:>9}", "Re z", "gamma", "residual", "N+2 drift");
    for r in &rep.accepted {
        println!("{:>14.8} {:>11.3e} {:>9.1e} {:>9.1e}", r.z.re, r.gamma, r.residual, r.stability.unwrap_or(f64::NAN));
    }
    println!("{} candidates rejected", rep.rejected.len());
    Ok(())
}
