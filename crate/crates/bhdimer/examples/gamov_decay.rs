//! Non-escape probability from the resonance expansion of the trap packet.

use std::f64::consts::PI;

use bhdimer::resonances::{find_resonances, gamov_decay, ResonanceOptions, Trap, TrapConfig};

fn main() -> bhdimer::Result<()> {
    let t_unit = 2.0 * PI / 0.30;
    let times: Vec<f64> = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0].iter().map(|x| x * t_unit).collect();
    for v in [-2.0, 0.8] {
        let trap = Trap::new(TrapConfig::default_with_barrier(v, 0.65)?)?;
        let rep = find_resonances(&trap, ResonanceOptions::default())?;
        for m0 in [5.0, 6.0] {
            let d = gamov_decay(&trap, &rep, PI / 2.0, m0, &times)?;
            println!(
                "V = {v}, M = {m0}: {} states, completeness defect {:.3}",
                d.expansion.terms.len(),
                d.expansion.completeness_defect
            );
            for (t, (c, i)) in times.iter().zip(d.rho_coherent.iter().zip(&d.rho_incoherent)) {
                println!("  t/T = {:>4.0}  rho = {c:.4}  (incoherent {i:.4})", t / t_unit);
            }
        }
    }
    Ok(())
}
