use std::f64::consts::PI;

use bhdimer::lattice::*;
use bhdimer::Error;
use proptest::prelude::*;

fn p() -> LatticeParams {
    LatticeParams::default()
}

#[test]
fn band_edges() {
    let (lo, hi) = p().dimer_band();
    assert!((lo + 8f64.sqrt()).abs() < 1e-15);
    assert!((hi + 2.0).abs() < 1e-15);
    assert!((dimer_dispersion(0.0, &p()) - lo).abs() < 1e-15);
    assert!((dimer_dispersion(PI, &p()) - hi).abs() < 1e-15);
}

#[test]
fn params_reject_weak_interaction() {
    assert!(matches!(LatticeParams::new(1.0, -1.5), Err(Error::InvalidParams(_))));
    assert!(matches!(LatticeParams::new(-1.0, -3.0), Err(Error::InvalidParams(_))));
    assert!(LatticeParams::new(1.0, 2.0).is_ok());
}

#[test]
fn lambda_at_half_pi() {
    // cos(pi/4) = 1/sqrt2, so lambda = asinh(sqrt2).
    let l = dimer_lambda(PI / 2.0, &p()).unwrap();
    assert!((l - 2f64.sqrt().asinh()).abs() < 1e-14);
    assert!(matches!(dimer_lambda(PI, &p()), Err(Error::DegenerateMomentum(_))));
}

#[test]
fn point_bound_state_energy() {
    // A single attractive site binds one level at -sqrt(V^2 + J^2).
    for v0 in [-0.3, -1.0, -2.5] {
        let v = OnSitePotential::point(v0).unwrap();
        let b = single_particle_bound_states(&v, &p(), Window::symmetric(200)).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0].energy + (v0 * v0 + 1.0f64).sqrt()).abs() < 1e-12, "{v0}: {}", b[0].energy);
        assert!((b[0].norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn repulsive_potential_has_no_bound_states() {
    let v = OnSitePotential::gaussian(2.0, 0.65).unwrap();
    assert!(single_particle_bound_states(&v, &p(), Window::symmetric(50)).unwrap().is_empty());
}

#[test]
fn gaussian_bound_state_count_grows_with_depth() {
    let count = |v0: f64| {
        let v = OnSitePotential::gaussian(v0, 0.65).unwrap();
        single_particle_bound_states(&v, &p(), Window::symmetric(200)).unwrap().len()
    };
    assert_eq!(count(-0.5), 1);
    assert!(count(-3.0) >= count(-1.0));
}

#[test]
fn dissociation_momentum_branches() {
    let (k, open) = dissociation_momentum(-2.5, -1.5, &p());
    assert!(open);
    assert!((k.re - 1.0f64.acos()).abs() < 1e-14 && k.im == 0.0);
    let (k, open) = dissociation_momentum(-2.5, -0.5, &p());
    assert!(!open);
    assert!(k.im > 0.0);
}

#[test]
fn near_threshold_level_matches_wide_dense_diagonalization() {
    // E_b = -1.0005: decay length about 30 sites, far beyond the support.
    let v = OnSitePotential::gaussian(-0.0202, 0.65).unwrap();
    let b = single_particle_bound_states(&v, &p(), Window::symmetric(10)).unwrap();
    assert_eq!(b.len(), 1);
    let n = 1201usize;
    let h = faer::Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            v.value(i as i64 - 600)
        } else if i.abs_diff(j) == 1 {
            -0.5
        } else {
            0.0
        }
    });
    let e0 = h.self_adjoint_eigen(faer::Side::Lower).unwrap().S()[0];
    assert!((b[0].energy - e0).abs() < 1e-12, "{} vs {e0}", b[0].energy);
}

#[test]
fn bound_state_next_to_a_wall() {
    let v = OnSitePotential::gaussian(-2.0, 0.65).unwrap();
    let w = Window { lo: -300, hi: 3, lo_open: true, hi_open: false };
    let b = single_particle_bound_states(&v, &p(), w).unwrap();
    assert!(!b.is_empty());
    assert_eq!(b[0].at(4), 0.0);
    assert!(b[0].at(-50).abs() > 0.0);
}

proptest! {
    #[test]
    fn inverse_dispersion_round_trip(k in 0.01f64..(PI - 0.01)) {
        let e = dimer_dispersion(k, &p());
        let k2 = invert_dimer_dispersion(e, &p()).unwrap();
        prop_assert!((k - k2).abs() < 1e-7 * (1.0 + 1.0 / (PI - k)));
    }

    #[test]
    fn complex_dispersion_round_trip(re in -2.8f64..-2.05, im in -0.3f64..0.0) {
        let z = faer::c64::new(re, im);
        let k = invert_dimer_dispersion_c(z, &p());
        let z2 = dimer_dispersion_c(k, &p());
        prop_assert!((z - z2).norm() < 1e-11);
    }

    #[test]
    fn group_velocity_matches_finite_difference(k in 0.05f64..(PI - 0.05)) {
        let h = 1e-5;
        let fd = (dimer_dispersion(k + h, &p()) - dimer_dispersion(k - h, &p())) / (2.0 * h);
        prop_assert!((fd - dimer_group_velocity(k, &p())).abs() < 1e-8);
    }

    #[test]
    fn bound_states_below_band_and_normalized(v0 in -3.0f64..-0.05, sigma in 0.3f64..1.5) {
        let v = OnSitePotential::gaussian(v0, sigma).unwrap();
        // A level sitting right at the band edge is legitimately rejected.
        let b = match single_particle_bound_states(&v, &p(), Window::symmetric(200)) {
            Err(Error::PoorLocalization { energy, .. }) => {
                prop_assert!(energy > -1.01);
                return Ok(());
            }
            r => r.unwrap(),
        };
        prop_assert!(!b.is_empty());
        for (i, s) in b.iter().enumerate() {
            prop_assert!(s.energy < -1.0);
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            if i > 0 { prop_assert!(s.energy > b[i - 1].energy); }
            // Eigenvalue equation on the full line, tails included.
            for m in s.lo - 40..=s.hi() + 40 {
                let r = -0.5 * (s.at(m - 1) + s.at(m + 1)) + v.value(m) * s.at(m) - s.energy * s.at(m);
                prop_assert!(r.abs() < 1e-10, "m={m} r={r}");
            }
        }
    }
}
