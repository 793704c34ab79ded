use approx::assert_relative_eq;
use proptest::prelude::*;
use tdot_core::model::{bound_states, dispersion, quartic_residual, quartic_roots, static_scattering, Params};
use tdot_core::{ModelParams, C64};

fn params(eps_d: f64, g: f64) -> ModelParams {
    Params::undriven(0.5, eps_d, g).unwrap()
}

#[test]
fn static_amplitudes_at_band_centre() {
    // at k = pi/2 with eps_d = 0 the dot sits on the incoming energy: full reflection
    let p = params(0.0, 0.5);
    let s = static_scattering(std::f64::consts::FRAC_PI_2, 0.5, &p).unwrap();
    assert!(s.transmission() < 1e-20);
    assert_relative_eq!(s.r.re, -1.0, epsilon = 1e-15);
}

#[test]
fn antiresonance_at_dot_level() {
    let p = params(-0.25, 0.5);
    let k = (0.25f64).acos();
    assert_relative_eq!(dispersion(k, &p), -0.25, epsilon = 1e-15);
    assert!(static_scattering(k, 0.5, &p).unwrap().transmission() < 1e-20);
}

#[test]
fn bound_energies_grow_with_coupling() {
    let p = params(-1.0, 0.5);
    let mut last = [0.0f64; 2];
    for i in 1..40 {
        let g = 0.05 * i as f64;
        let set = bound_states(g, &p).unwrap();
        let e = [set.states[0].energy.abs(), set.states[1].energy.abs()];
        assert!(e[0] > last[0] && e[1] > last[1], "g = {g}");
        last = e;
    }
}

#[test]
fn bound_states_straddle_the_band() {
    let p = params(-1.0, 0.75);
    let set = bound_states(0.75, &p).unwrap();
    assert!(set.states[0].energy < -1.0);
    assert!(set.states[1].energy > 1.0);
    for s in set.states {
        assert!(quartic_residual(s.z.into(), 0.75, &p) < 1e-12);
    }
}

proptest! {
    #[test]
    fn static_unitarity(k in 0.001f64..3.14, eps_d in -1.5f64..1.5, g in 0.01f64..2.0) {
        let s = static_scattering(k, g, &params(eps_d, g)).unwrap();
        prop_assert!((s.tau.norm_sqr() + s.r.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quartic_roots_obey_vieta(eps_d in -1.5f64..1.5, g in 0.05f64..2.0) {
        let p = params(eps_d, g);
        let roots = quartic_roots(g, &p);
        for z in roots {
            prop_assert!(quartic_residual(z, g, &p) < 1e-12);
        }
        let product = roots.iter().product::<C64>();
        prop_assert!((product + 1.0).norm() < 1e-10);
        let sum = roots.iter().sum::<C64>();
        prop_assert!((sum + eps_d / p.h).norm() < 1e-10);
        let mut pairs = C64::new(0.0, 0.0);
        for i in 0..4 {
            for j in i + 1..4 {
                pairs += roots[i] * roots[j];
            }
        }
        prop_assert!((pairs - g * g / (p.h * p.h)).norm() < 1e-10);
    }

    #[test]
    fn bound_states_are_outside_the_band(eps_d in -1.5f64..1.5, g in 0.05f64..2.0) {
        let set = bound_states(g, &params(eps_d, g)).unwrap();
        prop_assert!(set.states[0].energy < -1.0);
        prop_assert!(set.states[1].energy > 1.0);
        prop_assert!(set.states.iter().all(|s| s.z.abs() < 1.0 && s.q > 0.0));
    }

    #[test]
    fn dispersion_is_monotone(a in 0.001f64..3.14, b in 0.001f64..3.14) {
        let p = params(0.0, 0.5);
        prop_assume!((a - b).abs() > 1e-9);
        prop_assert_eq!(a < b, dispersion(a, &p) < dispersion(b, &p));
        prop_assert!(dispersion(a, &p).abs() <= 1.0);
    }
}
