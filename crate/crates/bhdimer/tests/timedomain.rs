use std::f64::consts::PI;

use bhdimer::lattice::*;
use bhdimer::resonances::{Trap, TrapConfig};
use bhdimer::timedomain::*;
use bhdimer::Error;
use faer::c64;
use proptest::prelude::*;

fn p() -> LatticeParams {
    LatticeParams::default()
}

fn trap(v: f64) -> Trap {
    Trap::new(TrapConfig::default_with_barrier(v, 0.65).unwrap()).unwrap()
}

fn cn(t_max: f64) -> CnOptions {
    CnOptions { t_max, sample_interval: 1.0, ..Default::default() }
}

#[test]
fn closed_box_conserves_norm_energy_and_symmetry() {
    let v = OnSitePotential::gaussian(-2.0, 0.65).unwrap();
    let g = Grid2D::new(-15, 15, &v, p());
    let lam = dimer_lambda(1.0, &p()).unwrap();
    let psi = dimer_wavepacket(1.0, -6.0, 3.0, lam, &g).unwrap();
    let tr = crank_nicolson_propagate(&g, &psi, cn(20.0), None, None).unwrap();
    assert!(tr.max_step_norm_drift < 1e-10, "{:e}", tr.max_step_norm_drift);
    let e0 = tr.energy[0];
    assert!(tr.energy.iter().all(|e| (e - e0).abs() < 1e-9));
    assert!(tr.symmetry_defect.iter().all(|&d| d < 1e-12));
}

#[test]
fn absorber_only_removes_norm() {
    let g = Grid2D::new(-40, 40, &OnSitePotential::zero(), p()).with_absorber(&Absorber { width: 15, at_hi: true, ..Default::default() });
    let lam = dimer_lambda(PI / 2.0, &p()).unwrap();
    let psi = dimer_wavepacket(PI / 2.0, 0.0, 4.0, lam, &g).unwrap();
    let tr = crank_nicolson_propagate(&g, &psi, cn(120.0), None, None).unwrap();
    assert!(tr.norm.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    assert!(*tr.norm.last().unwrap() < 0.05);
}

#[test]
fn centroid_moves_at_group_velocity() {
    let k = PI / 2.0;
    let g = Grid2D::new(-60, 60, &OnSitePotential::zero(), p());
    let lam = dimer_lambda(k, &p()).unwrap();
    let psi = dimer_wavepacket(k, -20.0, 8.0, lam, &g).unwrap();
    let t = 40.0;
    let tr = crank_nicolson_propagate(&g, &psi, cn(t), None, None).unwrap();
    let moved = centroid(&g, &tr.final_state) - centroid(&g, &psi);
    let expect = dimer_group_velocity(k, &p()) * t;
    assert!((moved / expect - 1.0).abs() < 0.05, "{moved} vs {expect}");
}

// rho(t) on the trap interior from an independent SciPy sparse-LU
// Crank-Nicolson run (dt = 0.02, packet at M = 5, K = pi/2). The times are
// early enough that the truncation of the open side is not yet felt.
#[test]
fn frozen_trap_nonescape() {
    for (v, frozen) in [(-2.0, [(20.0, 0.811862766363766), (40.0, 0.8478978398862864)]), (0.8, [(10.0, 0.9875138601925012), (40.0, 0.9919518529556685)])] {
        let t = trap(v);
        let run = run_trap_cn(&t, PI / 2.0, 5.0, 40.0, &TrapCnOptions::default()).unwrap();
        let tr = &run.trajectory;
        for (time, rho) in frozen {
            let i = tr.times.iter().position(|&x| (x - time).abs() < 1e-9).unwrap();
            assert!((tr.trap_norm[i] - rho).abs() < 1e-8, "V={v} t={time}: {} vs {rho}", tr.trap_norm[i]);
        }
        let rho = nonescape_probability_direct(&run.grid, tr, trap_region(&t.config)).unwrap();
        assert_eq!(rho, tr.trap_norm);
        assert!(run.flux.bookkeeping_defect < 1e-8);
    }
}

#[test]
fn packets_at_neighbouring_positions_differ() {
    let t = trap(-2.0);
    let g = trap_grid(&t.config, &TrapCnOptions::default());
    let lam = dimer_lambda(PI / 2.0, &p()).unwrap();
    let a = initial_wavepacket(PI / 2.0, 5.0, lam, &g).unwrap();
    let b = initial_wavepacket(PI / 2.0, 6.0, lam, &g).unwrap();
    let ov: c64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
    assert!((norm_sqr(&a) - 1.0).abs() < 1e-12);
    assert!(ov.norm() < 0.9);
}

#[test]
fn packet_behind_wall_is_empty() {
    let t = trap(-2.0);
    let g = trap_grid(&t.config, &TrapCnOptions::default());
    let lam = dimer_lambda(PI / 2.0, &p()).unwrap();
    assert!(matches!(initial_wavepacket(PI / 2.0, 40.0, lam, &g), Err(Error::EmptyState(_))));
}

#[test]
fn oracle_rejects_band_edges() {
    let v = OnSitePotential::gaussian(-2.0, 0.65).unwrap();
    assert!(wavepacket_scattering_oracle(0.05, &v, 10.0, &p(), OracleOptions::default()).is_err());
    let small = OracleOptions { half_width: 30, ..Default::default() };
    assert!(matches!(
        wavepacket_scattering_oracle(1.0, &v, 10.0, &p(), small),
        Err(Error::InsufficientSeparation(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn cn_is_unitary_without_absorber(v0 in -3.0f64..2.0, k in 0.3f64..2.8, x0 in -4.0f64..4.0) {
        let v = OnSitePotential::gaussian(v0, 0.65).unwrap();
        let g = Grid2D::new(-10, 10, &v, p());
        let lam = dimer_lambda(k, &p()).unwrap();
        let psi = dimer_wavepacket(k, x0, 2.0, lam, &g).unwrap();
        let tr = crank_nicolson_propagate(&g, &psi, cn(5.0), None, None).unwrap();
        prop_assert!(tr.max_step_norm_drift < 1e-10);
        prop_assert!((tr.norm.last().unwrap() - 1.0).abs() < 1e-10);
    }
}
