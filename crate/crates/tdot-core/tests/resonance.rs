use tdot_core::gpp::GppEngine;
use tdot_core::model::{Params, DEFAULT_ETA};
use tdot_core::resonance::{
    classify, elastic_contribution, find_resonances, residual, strength_ratio, Classification, ScanOptions,
    ROOT_RESIDUAL,
};

fn engine(eps_d: f64, g1: f64) -> GppEngine {
    GppEngine::new(&Params::new(0.5, eps_d, 0.5, g1, 1.0, DEFAULT_ETA).unwrap()).unwrap()
}

#[test]
fn fig4_resonances() {
    let eng = engine(-1.0, 0.25);
    let recs = find_resonances(&eng, &ScanOptions::default()).unwrap();
    let find = |b: usize, nu: i32| recs.iter().find(|r| r.b == b && r.nu == nu).unwrap();
    let r1 = find(1, -1);
    assert!((r1.k_res - 1.26).abs() < 0.02);
    assert_eq!(r1.classification, Classification::Strong);
    let r2 = find(2, 1);
    assert!((r2.k_res - 1.57).abs() < 0.02);
    assert_eq!(r2.classification, Classification::Strong);
    let r3 = find(1, -2);
    assert!((r3.k_res - 2.34).abs() < 0.02);
    assert_eq!(r3.classification, Classification::Weak);
    for r in &recs {
        assert!(r.residual < ROOT_RESIDUAL);
        assert!(r.lifetime > 0.0 && (r.lifetime * r.linewidth - 1.0).abs() < 1e-12);
        assert!(r.k_res > 0.0 && r.k_res < std::f64::consts::PI);
    }
    // strong resonances cancel the static amplitude
    for r in [r1, r2] {
        let c = elastic_contribution(&eng, r).unwrap();
        assert!((c + 1.0).norm() < 0.1, "{c}");
    }
}

#[test]
fn fig5_resonances() {
    let eng = engine(-0.25, 0.1);
    let recs = find_resonances(&eng, &ScanOptions::default()).unwrap();
    assert!(recs
        .iter()
        .any(|r| r.b == 1 && r.nu == -1 && (r.k_res - 1.52).abs() < 0.02));
    assert!(recs
        .iter()
        .any(|r| r.b == 2 && r.nu == 1 && (r.k_res - 1.57).abs() < 0.03));
}

/// Momentum at which `eps_k = eps_b - nu w` with the period-mean level.
fn bare_crossing(e: &GppEngine, b: usize, nu: i32) -> f64 {
    let p = e.params();
    ((e.mean_energies()[b] - p.omega * nu as f64) / (-2.0 * p.h)).acos()
}

#[test]
fn dressing_shift_shrinks_with_the_drive() {
    let opts = ScanOptions::default();
    let offset = |g1: f64| {
        let e = engine(-1.0, g1);
        let r = find_resonances(&e, &opts)
            .unwrap()
            .into_iter()
            .find(|r| r.b == 1 && r.nu == -1)
            .unwrap();
        (r.k_res - bare_crossing(&e, 0, -1)).abs()
    };
    let (a, b) = (offset(0.05), offset(0.1));
    assert!(b > a && (b / a / 4.0 - 1.0).abs() < 0.3, "{a} {b}");
}

#[test]
fn residual_changes_sign_across_a_root() {
    let eng = engine(-1.0, 0.25);
    let r = find_resonances(&eng, &ScanOptions::default()).unwrap()[1];
    let (b, nu) = (r.b - 1, r.nu);
    let lo = residual(&eng, b, nu, r.k_res - 1e-3).unwrap();
    let hi = residual(&eng, b, nu, r.k_res + 1e-3).unwrap();
    assert!(lo * hi < 0.0);
}

#[test]
fn classification_depends_only_on_the_ratio() {
    let eng = engine(-1.0, 0.25);
    let recs = find_resonances(&eng, &ScanOptions::default()).unwrap();
    for r in &recs {
        let ratio = strength_ratio(&eng, r.b - 1, r.nu, r.k_res).unwrap();
        assert_eq!(ratio, r.strength_ratio);
        assert_eq!(classify(r, 0.9), r.classification);
        assert_eq!(classify(r, 0.0), Classification::Strong);
        if r.nu.abs() == 1 {
            assert!((ratio - 1.0).abs() < 1e-15);
        }
    }
}

#[test]
fn undriven_roots_are_bare_crossings() {
    let eng = engine(-1.0, 0.0);
    let recs = find_resonances(&eng, &ScanOptions::default()).unwrap();
    assert!(!recs.is_empty());
    for r in recs {
        assert!((r.k_res - bare_crossing(&eng, r.b - 1, r.nu)).abs() < 1e-8);
        assert_eq!(r.linewidth, 0.0);
    }
}
