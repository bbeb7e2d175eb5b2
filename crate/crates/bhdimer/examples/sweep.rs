//! Coarse (K, V) map of the dissociation probability.

use bhdimer::lattice::LatticeParams;
use bhdimer::scattering::{k_grid, linspace, sweep_kv};

fn main() -> bhdimer::Result<()> {
    let ks = k_grid(0.1, std::f64::consts::PI - 0.1, 24);
    let vs = linspace(-3.0, 2.0, 21);
    let cells = sweep_kv(&ks, &vs, 0.65, &LatticeParams::default(), 10, 4)?;

    // One row per V, one character per K: blank below 1%, then . : + # by P_d.
    println!("P_d, K from {:.2} (left) to {:.2} (right)", ks[0], ks[ks.len() - 1]);
    for row in cells.chunks(ks.len()) {
        let line: String = row
            .iter()
            .map(|c| match c.probabilities.map(|p| p.p_d) {
                None => '?',
                Some(d) if d < 0.01 => ' ',
                Some(d) if d < 0.2 => '.',
                Some(d) if d < 0.4 => ':',
                Some(d) if d < 0.6 => '+',
                Some(_) => '#',
            })
            .collect();
        println!("V = {:+.2} |{line}|", row[0].v);
    }
    Ok(())
}
