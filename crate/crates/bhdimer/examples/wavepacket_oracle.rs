//! Wave-packet collision compared with the stationary probabilities.
//! Takes about a minute per barrier in release mode.

use std::f64::consts::PI;

use bhdimer::lattice::{LatticeParams, OnSitePotential};
use bhdimer::scattering::dimer_probabilities;
use bhdimer::timedomain::{wavepacket_scattering_oracle, OracleOptions};

fn main() -> bhdimer::Result<()> {
    let v: f64 = std::env::args().nth(1).map_or(-2.0, |a| a.parse().expect("V"));
    let p = LatticeParams::default();
    let pot = OnSitePotential::gaussian(v, 0.65)?;
    let st = dimer_probabilities(PI / 2.0, &pot, &p, 10)?;
    let wp = wavepacket_scattering_oracle(PI / 2.0, &pot, 10.0, &p, OracleOptions::default())?;
    println!("            P_t      P_r      P_d");
    println!("stationary  {:.4}   {:.4}   {:.4}", st.p_t, st.p_r, st.p_d);
    println!("packet      {:.4}   {:.4}   {:.4}   (left near barrier {:.1e})", wp.p_t, wp.p_r, wp.p_d, wp.p_box);
    Ok(())
}
