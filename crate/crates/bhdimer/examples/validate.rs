//! The validation suite, then the same suite on a deliberately broken
//! effective Hamiltonian to show that it notices.

use bhdimer::cli::{validate_suite, ValidateOptions};
use bhdimer::lattice::LatticeParams;
use bhdimer::scattering::Tamper;

fn main() {
    for tamper in [false, true] {
        let opts = ValidateOptions {
            params: LatticeParams::default(),
            sigma: 0.65,
            n: 10,
            unitarity_points: 5,
            elimination_cases: 10,
            seed: 1,
            tamper: Tamper { flip_dimer_phase_in_heff: tamper },
        };
        println!("{}", if tamper { "tampered:" } else { "reference:" });
        for c in validate_suite(opts) {
            println!("  {:<24} {:<5} {:.2e} (tol {:.0e})", c.name, if c.pass { "ok" } else { "FAIL" }, c.value, c.tolerance);
        }
    }
}
