use std::f64::consts::PI;

use bhdimer::lattice::*;
use bhdimer::scattering::*;
use faer::c64;
use proptest::prelude::*;

fn p() -> LatticeParams {
    LatticeParams::default()
}

fn gauss(v: f64) -> OnSitePotential {
    OnSitePotential::gaussian(v, 0.65).unwrap()
}

// Left-incidence (P_t, P_r, P_d) at N = 10 from an independent dense
// NumPy implementation of the flux-normalised stationary problem.
const FROZEN: [(f64, f64, f64, f64, f64); 5] = [
    (PI / 2.0, -2.0, 0.03360160992712143, 0.5103312170370605, 0.4560671730358169),
    (1.2, 0.8, 0.00023641366878099617, 0.9997635863312181, 0.0),
    (0.3, -1.0, 0.0014553975389019196, 0.9985446024610958, 0.0),
    (1.0, -0.105, 0.9638301869884874, 0.03616981301151121, 0.0),
    (2.0, -2.5, 0.0011419528210201049, 0.15756415167797783, 0.8412938955010023),
];

#[test]
fn frozen_probabilities() {
    for (k, v, pt, pr, pd) in FROZEN {
        let pr_ = dimer_probabilities(k, &gauss(v), &p(), 10).unwrap();
        assert!((pr_.p_t - pt).abs() < 1e-10, "K={k} V={v}: {pr_:?}");
        assert!((pr_.p_r - pr).abs() < 1e-10, "K={k} V={v}: {pr_:?}");
        assert!((pr_.p_d - pd).abs() < 1e-10, "K={k} V={v}: {pr_:?}");
    }
}

#[test]
fn free_lattice_transmits_fully() {
    for k in [0.2, 1.0, PI / 2.0, 2.9] {
        let pr = dimer_probabilities(k, &OnSitePotential::zero(), &p(), 5).unwrap();
        assert!((pr.p_t - 1.0).abs() < 1e-12, "{k}: {pr:?}");
        assert!(pr.p_r < 1e-12 && pr.p_d == 0.0);
    }
}

#[test]
fn dissociation_needs_attraction_at_half_pi() {
    let d = |v: f64| dimer_probabilities(PI / 2.0, &gauss(v), &p(), 10).unwrap().p_d;
    assert_eq!(d(0.8), 0.0);
    assert_eq!(d(2.0), 0.0);
    assert!(d(-2.0) > 0.3);
    let pr = dimer_probabilities(PI / 2.0, &gauss(-2.0), &p(), 10).unwrap();
    assert!(pr.p_d > pr.p_t);
}

#[test]
fn mirror_symmetric_incidence() {
    let s = compute_smatrix(1.3, &gauss(-2.2), &p(), 10).unwrap();
    let l = s.index_of(ChannelLabel { kind: ChannelKind::Dimer, side: Side::L }).unwrap();
    let r = s.index_of(ChannelLabel { kind: ChannelKind::Dimer, side: Side::R }).unwrap();
    let a = s.probabilities(l).unwrap();
    let b = s.probabilities(r).unwrap();
    assert!((a.p_t - b.p_t).abs() < 1e-10 && (a.p_d - b.p_d).abs() < 1e-10);
}

#[test]
fn box_too_small_is_rejected() {
    let r = ScatteringProblem::new(1.0, &gauss(-2.0), &p(), 1);
    assert!(matches!(r, Err(bhdimer::Error::InvalidParams(_))));
    assert!(matches!(
        ScatteringProblem::new(PI, &gauss(-2.0), &p(), 10),
        Err(bhdimer::Error::DegenerateMomentum(_))
    ));
}

#[test]
fn tampered_phase_breaks_unitarity() {
    let opts = ProblemOptions { tamper: Tamper { flip_dimer_phase_in_heff: true }, ..Default::default() };
    let pr = ScatteringProblem::with_options(1.0, &gauss(-1.0), &p(), 10, opts).unwrap();
    assert!(pr.smatrix().unitarity_defect() > 1e-3);
}

#[test]
fn reflection_converges_with_box_size() {
    let scan = convergence_scan(1.2, &gauss(-2.0), &p(), &(6..=20).collect::<Vec<_>>(), 25).unwrap();
    let e = |n: i64| scan.points.iter().find(|x| x.0 == n).unwrap().1;
    assert!(scan.slope < 0.0);
    assert!(e(20) / e(10) < 0.1, "{:?}", scan.points);
}

#[test]
fn sweep_records_cell_failures() {
    let cells = sweep_kv(&[0.5, 1.5], &[-2.0, 0.5], 0.65, &p(), 10, 1).unwrap();
    assert_eq!(cells.len(), 4);
    assert_eq!(cells[0].v, -2.0);
    assert!(cells.iter().all(|c| c.probabilities.is_some()));
    assert!(sweep_kv(&[0.0], &[0.5], 0.65, &p(), 10, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unitarity_and_probability_sum(k in 0.1f64..(PI - 0.1), v in -3.0f64..2.0) {
        match compute_smatrix(k, &gauss(v), &p(), 10) {
            Ok(s) => {
                prop_assert!(s.unitarity_defect() < 1e-8);
                for i in 0..s.dim() {
                    let pr = s.probabilities(i).unwrap();
                    prop_assert!((pr.p_t + pr.p_r + pr.p_d - 1.0).abs() < 1e-8);
                }
            }
            Err(bhdimer::Error::ZeroVelocity(_)) | Err(bhdimer::Error::PoorLocalization { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn elimination_matches_bordered_system(k in 0.1f64..(PI - 0.1), v in -3.0f64..2.0, which in 0usize..4) {
        let pr = match ScatteringProblem::new(k, &gauss(v), &p(), 8) {
            Ok(pr) => pr,
            Err(bhdimer::Error::ZeroVelocity(_)) | Err(bhdimer::Error::PoorLocalization { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let nc = pr.couplings().len();
        let mut a = vec![c64::new(0.0, 0.0); nc];
        a[which % nc] = c64::new(1.0, 0.0);
        if !pr.couplings()[which % nc].is_open {
            return Ok(());
        }
        let (x1, o1) = pr.solve_scattering(&a).unwrap();
        let (x2, o2) = pr.solve_bordered(&a).unwrap();
        for (a, b) in x1.iter().zip(&x2).chain(o1.iter().zip(&o2)) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }
}
