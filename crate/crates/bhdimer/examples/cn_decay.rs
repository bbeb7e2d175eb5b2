//! Direct Crank-Nicolson decay of the trap packet with channel-resolved flux.
//!
//!     cargo run --release --example cn_decay -- [V] [M] [t_max/T]

use std::f64::consts::PI;

use bhdimer::resonances::{Trap, TrapConfig};
use bhdimer::timedomain::{run_trap_cn, TrapCnOptions};

fn main() -> bhdimer::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("numeric argument"));
    let v = args.next().unwrap_or(-2.0);
    let m0 = args.next().unwrap_or(5.0);
    let periods = args.next().unwrap_or(10.0);
    let t_unit = 2.0 * PI / 0.30;

    let trap = Trap::new(TrapConfig::default_with_barrier(v, 0.65)?)?;
    let run = run_trap_cn(&trap, PI / 2.0, m0, periods * t_unit, &TrapCnOptions::default())?;
    let tr = &run.trajectory;
    println!("grid side {}, {} samples", run.grid.side(), tr.times.len());
    let every = (tr.times.len() / 10).max(1);
    for i in (0..tr.times.len()).step_by(every) {
        println!("  t/T = {:>5.1}  rho = {:.5}  norm = {:.5}", tr.times[i] / t_unit, tr.trap_norm[i], tr.norm[i]);
    }
    let f = &run.flux;
    println!(
        "escaped {:.4}: dimer {:.1}%, dissociation {:.1}% (bookkeeping defect {:.1e})",
        f.total,
        100.0 * f.dimer_fraction,
        100.0 * f.dissociation_fraction,
        f.bookkeeping_defect
    );
    Ok(())
}
