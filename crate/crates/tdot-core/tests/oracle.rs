use tdot_core::floquet::{solve, DEFAULT_MODES};
use tdot_core::model::{static_scattering, Params, DEFAULT_ETA};
use tdot_core::oracle::{propagate_detailed, transmission_curve, LatticeWavefunction, MidpointStepper, OracleOptions};
use tdot_core::{Error, ModelParams};

fn small(p: &ModelParams) -> OracleOptions {
    OracleOptions {
        length: 1400,
        sigma: 20.0,
        ..OracleOptions::for_params(p)
    }
}

#[test]
fn static_packet_matches_closed_form() {
    let p = Params::undriven(0.5, -1.0, 0.5).unwrap();
    let r = propagate_detailed(1.8, &small(&p), &p).unwrap();
    let want = static_scattering(1.8, 0.5, &p).unwrap().transmission();
    assert!((r.transmitted - want).abs() < 1e-2);
    assert!(r.norm_drift < 1e-10);
}

#[test]
fn driven_packet_matches_floquet() {
    let p = Params::new(0.5, -1.0, 0.5, 0.25, 1.0, DEFAULT_ETA).unwrap();
    let curve = transmission_curve(&[1.0, 2.0], &small(&p), &p).unwrap();
    for (k, t) in curve {
        let f = solve(k, DEFAULT_MODES, &p).unwrap().t_total;
        assert!((t - f).abs() < 2e-2, "k = {k}: {t} vs {f}");
    }
}

#[test]
fn halving_the_step_changes_little() {
    let p = Params::new(0.5, -1.0, 0.5, 0.25, 1.0, DEFAULT_ETA).unwrap();
    let o = small(&p);
    let a = propagate_detailed(1.4, &o, &p).unwrap().transmitted;
    let b = propagate_detailed(1.4, &OracleOptions { dt: 0.5 * o.dt, ..o }, &p)
        .unwrap()
        .transmitted;
    assert!((a - b).abs() < 1e-4);
}

#[test]
fn short_chain_reflections_are_caught() {
    let p = Params::undriven(0.5, -1.0, 0.5).unwrap();
    let o = OracleOptions {
        length: 460,
        sigma: 20.0,
        ..OracleOptions::for_params(&p)
    };
    assert!(matches!(
        propagate_detailed(0.4, &o, &p),
        Err(Error::BoundaryReflection { .. })
    ));
}

#[test]
fn stepper_is_reusable() {
    let p = Params::new(0.5, -1.0, 0.5, 0.25, 1.0, DEFAULT_ETA).unwrap();
    let stepper = MidpointStepper::new(100, 0.04, &p).unwrap();
    let mut a = LatticeWavefunction::gaussian(100, -30.0, 8.0, 1.0);
    let mut b = a.clone();
    for _ in 0..50 {
        stepper.step(&mut a, &p);
        b.step(0.04, &p).unwrap();
    }
    assert_eq!(a, b);
    assert!((a.t - 2.0).abs() < 1e-12);
}
