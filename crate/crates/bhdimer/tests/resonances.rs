use std::f64::consts::PI;
use std::sync::OnceLock;

use bhdimer::resonances::*;
use bhdimer::scattering::linspace;
use bhdimer::Error;
use faer::c64;
use proptest::prelude::*;

fn trap(v: f64) -> Trap {
    Trap::new(TrapConfig::default_with_barrier(v, 0.65).unwrap()).unwrap()
}

fn shared() -> &'static (Trap, ResonanceReport) {
    static CELL: OnceLock<(Trap, ResonanceReport)> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = trap(0.8);
        let r = find_resonances(&t, ResonanceOptions::default()).unwrap();
        (t, r)
    })
}

fn fit(poles: &[(c64, c64)], n: usize) -> InversionFit {
    let s = synthetic_samples(poles, linspace(-2.8, -2.0, n));
    harmonic_inversion_fit(&s, 10, FitOptions::default()).unwrap()
}

fn nearest(f: &InversionFit, z: c64) -> &PoleCandidate {
    f.candidates.iter().min_by(|a, b| (a.z - z).norm().partial_cmp(&(b.z - z).norm()).unwrap()).unwrap()
}

#[test]
fn synthetic_single_pole() {
    let z = c64::new(-2.5, -0.05);
    let f = fit(&[(z, c64::new(1.0, 0.0))], 200);
    let c = nearest(&f, z);
    assert!((c.z - z).norm() < 1e-10, "{}", c.z);
    assert!((c.residue - 1.0).norm() < 1e-8, "{}", c.residue);
}

#[test]
fn synthetic_two_poles() {
    let poles = [(c64::new(-2.6, -0.01), c64::new(0.5, 0.2)), (c64::new(-2.3, -0.002), c64::new(-0.3, 0.0))];
    let f = fit(&poles, 400);
    for (z, a) in poles {
        let c = nearest(&f, z);
        assert!((c.z - z).norm() < 1e-8);
        assert!((c.residue - a).norm() < 1e-6);
    }
}

#[test]
fn inversion_rejects_short_grids() {
    let s = synthetic_samples(&[(c64::new(-2.5, -0.05), c64::new(1.0, 0.0))], linspace(-2.8, -2.0, 12));
    assert!(matches!(harmonic_inversion_fit(&s, 10, FitOptions::default()), Err(Error::InvalidParams(_))));
}

// Narrowest poles of the V = 0.8 trap, refined by dense eigenvalue
// iteration of H_eff(z) in an independent NumPy implementation.
const FROZEN_POLES: [(f64, f64); 4] = [
    (-2.8185012825272153, -3.207911277395064e-09),
    (-2.789284858878172, -3.098622746198863e-08),
    (-2.742329145293394, -1.3915036882280729e-07),
    (-2.679896773935397, -4.6824693860166554e-07),
];

#[test]
fn frozen_trap_poles() {
    let (_, rep) = shared();
    for (re, im) in FROZEN_POLES {
        let z = c64::new(re, im);
        let r = rep.accepted.iter().find(|r| (r.z - z).norm() < 1e-8);
        assert!(r.is_some(), "missing pole {z}");
    }
}

#[test]
fn accepted_poles_are_valid() {
    let (t, rep) = shared();
    assert!(rep.accepted.len() >= 10);
    for r in &rep.accepted {
        assert!(r.gamma >= 0.0);
        assert!(r.residual < 1e-8);
        assert!(r.stability.unwrap() < 1e-4);
        assert!((r.gamma + 2.0 * r.z.im).abs() < 1e-15);
    }
    for r in rep.accepted.iter().take(3) {
        assert!(fixed_point_defect(t, r.z).unwrap() < 1e-6);
    }
    for w in rep.accepted.windows(2) {
        assert!(w[0].z.re < w[1].z.re);
    }
}

#[test]
fn refinement_is_idempotent() {
    let (t, rep) = shared();
    let r = &rep.accepted[4];
    let again = refine_pole(t, r.z, r.residue, RefineOptions::default()).unwrap();
    assert!((again.z - r.z).norm() < 1e-12);
}

#[test]
fn gamov_states_are_exchange_symmetric() {
    let (t, rep) = shared();
    let (states, degenerate) = gamov_states(t, &rep.accepted).unwrap();
    assert!(degenerate.is_empty());
    for s in &states {
        assert!(s.symmetry_defect < 1e-8);
        assert!(s.residual < 1e-8);
        assert!((bhdimer::linalg::norm2(&s.right) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn expansion_reproduces_initial_population() {
    let (t, rep) = shared();
    let times = [0.0, 100.0];
    let d = gamov_decay(t, rep, PI / 2.0, 5.0, &times).unwrap();
    assert!(d.expansion.completeness_defect < 0.05);
    assert!((d.rho_coherent[0] - 1.0).abs() < 0.05);
    assert!(d.rho_incoherent[1] <= d.rho_incoherent[0]);
}

#[test]
fn continuation_outside_trust_region_fails() {
    let t = trap(0.8);
    assert!(matches!(t.heff(c64::new(-2.5, -0.8)), Err(Error::ContinuationFailure(_))));
}

#[test]
fn negative_decay_rate_is_rejected() {
    let e = DecayExpansion::from_terms(vec![ExpansionTerm {
        z: c64::new(-2.5, 0.01),
        gamma: -0.02,
        b: c64::new(1.0, 0.0),
        trap_fraction: 1.0,
    }]);
    assert!(e.nonescape_probability(&[1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn synthetic_pole_recovery(re in -2.7f64..-2.1, im in -0.1f64..-0.001, ar in -1.0f64..1.0, ai in -1.0f64..1.0) {
        prop_assume!(ar.hypot(ai) > 0.1);
        let z = c64::new(re, im);
        let f = fit(&[(z, c64::new(ar, ai))], 200);
        prop_assert!((nearest(&f, z).z - z).norm() < 1e-8);
    }
}
