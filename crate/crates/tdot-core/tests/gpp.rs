use proptest::prelude::*;
use tdot_core::floquet::{solve, DEFAULT_MODES};
use tdot_core::gpp::{AmplitudeForm, GppEngine, GppOptions};
use tdot_core::model::{static_scattering, Params, DEFAULT_ETA};
use tdot_core::ModelParams;

fn fig4_with(g1: f64) -> ModelParams {
    Params::new(0.5, -1.0, 0.5, g1, 1.0, DEFAULT_ETA).unwrap()
}

/// Momenta at least 0.05 away from the dips of the driven spectrum and
/// below the band-top region where the upper bound state is barely bound.
fn off_resonance() -> Vec<f64> {
    (0..=60)
        .map(|i| 0.3 + 2.4 * i as f64 / 60.0)
        .filter(|k| [1.26, 1.58, 2.34].iter().all(|r| (k - r).abs() > 0.05))
        .collect()
}

#[test]
fn agrees_with_floquet_off_resonance() {
    let p = fig4_with(0.25);
    let eng = GppEngine::new(&p).unwrap();
    for k in off_resonance() {
        let g = eng.transmission(k).unwrap();
        if !g.near_resonance.is_empty() {
            continue;
        }
        let f = solve(k, DEFAULT_MODES, &p).unwrap();
        assert!(
            (g.t_total - f.t_total).abs() < 0.05,
            "k = {k}: {} vs {}",
            g.t_total,
            f.t_total
        );
    }
}

#[test]
fn elastic_correction_scales_with_drive_squared() {
    let k = 0.8;
    let st = static_scattering(k, 0.5, &fig4_with(0.0)).unwrap().tau;
    let dev = |g1: f64| {
        let p = fig4_with(g1);
        let f = (solve(k, DEFAULT_MODES, &p).unwrap().channel(0).unwrap().tau - st).norm();
        let g = (GppEngine::new(&p).unwrap().transmission(k).unwrap().tau_elastic() - st).norm();
        (f, g)
    };
    let (f1, g1) = dev(0.02);
    let (f2, g2) = dev(0.04);
    assert!((f2 / f1 / 4.0 - 1.0).abs() < 0.15, "floquet ratio {}", f2 / f1);
    assert!((g2 / g1 / 4.0 - 1.0).abs() < 0.15, "perturbative ratio {}", g2 / g1);
}

#[test]
fn harmonic_cutoff_is_converged() {
    let p = fig4_with(0.25);
    let base = GppEngine::new(&p).unwrap();
    let wide = GppEngine::with_options(
        &p,
        GppOptions {
            nu_max: 16,
            ..GppOptions::default()
        },
    )
    .unwrap();
    for k in [0.5, 1.0, 1.8, 2.2] {
        let a = base.transmission(k).unwrap().t_total;
        let b = wide.transmission(k).unwrap().t_total;
        assert!((a - b).abs() < 1e-4, "k = {k}: {a} vs {b}");
    }
}

#[test]
fn contour_depth_does_not_matter() {
    let p = fig4_with(0.25);
    let a = GppEngine::new(&p).unwrap();
    let b = GppEngine::with_options(
        &p,
        GppOptions {
            contour_depth: 0.25,
            ..GppOptions::default()
        },
    )
    .unwrap();
    for k in [0.6, 1.4, 2.0] {
        let (ya, yb) = (a.amplitude_y(k, k, 0).unwrap(), b.amplitude_y(k, k, 0).unwrap());
        assert!((ya - yb).norm() < 1e-6 * ya.norm().max(1e-3), "k = {k}");
    }
}

#[test]
fn quadrature_is_converged() {
    let p = fig4_with(0.25);
    let a = GppEngine::new(&p).unwrap();
    let b = GppEngine::with_options(
        &p,
        GppOptions {
            panels: 24,
            nodes: 32,
            ..GppOptions::default()
        },
    )
    .unwrap();
    for e in [-0.7, 0.1, 0.9] {
        for bi in 0..2 {
            let (x, y) = (a.level_shift(bi, e).unwrap(), b.level_shift(bi, e).unwrap());
            assert!((x - y).norm() < 1e-8, "b = {bi}, E = {e}: {x} vs {y}");
        }
    }
}

#[test]
fn literal_form_reduces_to_static_when_undriven() {
    let p = fig4_with(0.0);
    let eng = GppEngine::with_options(
        &p,
        GppOptions {
            form: AmplitudeForm::Literal,
            ..GppOptions::default()
        },
    )
    .unwrap();
    let st = static_scattering(1.2, 0.5, &p).unwrap();
    assert!((eng.transmission(1.2).unwrap().t_total - st.transmission()).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn widths_are_non_negative(k in 0.05f64..3.09, nu in -4i32..=4, b in 0usize..2) {
        let eng = GppEngine::new(&fig4_with(0.25)).unwrap();
        let shift = eng.energy_correction(b, k, nu).unwrap().value;
        prop_assert!(shift.im >= 0.0);
    }
}
