//! Quantum resonances: incoming energies that line up with a dressed bound
//! level shifted by a whole number of driving quanta,
//!
//! ```text
//! eps_k = eps_b - nu w - Re de_b(eps_k + nu w),
//! ```
//!
//! together with their widths and a strong/weak classification by the
//! harmonic content of the flips.

use std::f64::consts::PI;

use crate::gpp::GppEngine;
use crate::model::dispersion;
use crate::{Result, C64};

/// Default strong/weak cut on the harmonic ratio.
pub const DEFAULT_STRONG_THRESHOLD: f64 = 0.9;

/// Largest residual (energy units) accepted at a refined root.
pub const ROOT_RESIDUAL: f64 = 1e-8;

/// Strength of a resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// The resonant harmonic is also the dominant decay harmonic; the elastic
    /// amplitude is driven to zero.
    Strong,
    /// Dominated by a different harmonic; only a shallow dip.
    Weak,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Strong => "strong",
            Classification::Weak => "weak",
        }
    }
}

/// Scan settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
    pub nu_min: i32,
    pub nu_max: i32,
    /// Bisection tolerance in `k`.
    pub k_tol: f64,
    pub strong_threshold: f64,
    /// Largest `|Re de_b| / omega` accepted at a root. Near a pole of the level shift
    /// (bound-bound crossing) the condition acquires extra roots that do not
    /// continue any bare crossing; they carry shifts of order one and are
    /// dropped by this cut.
    pub max_shift: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            k_min: 0.05,
            k_max: PI - 0.05,
            points: 2000,
            nu_min: -4,
            nu_max: 4,
            k_tol: 1e-10,
            strong_threshold: DEFAULT_STRONG_THRESHOLD,
            max_shift: 0.1,
        }
    }
}

/// One located resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceRecord {
    /// Bound state: 1 below the band, 2 above it.
    pub b: usize,
    pub nu: i32,
    pub k_res: f64,
    /// Residual of the resonance condition at `k_res`.
    pub residual: f64,
    /// `Im de_b` at the resonance.
    pub linewidth: f64,
    pub lifetime: f64,
    /// `|B_bk(nu)|^2 / |B_bk(sign(nu))|^2` at the resonance.
    pub strength_ratio: f64,
    pub classification: Classification,
}

/// Resonance condition `eps_k - eps_b + nu w + Re de_b(eps_k + nu w)`.
pub fn residual(engine: &GppEngine, b: usize, nu: i32, k: f64) -> Result<f64> {
    let p = engine.params();
    let ek = dispersion(k, p);
    let shift = engine.level_shift(b, ek + p.omega * nu as f64)?;
    Ok(ek - engine.mean_energies()[b] + p.omega * nu as f64 + shift.re)
}

/// Locates every root of the resonance condition on the scan window.
pub fn find_resonances(engine: &GppEngine, opts: &ScanOptions) -> Result<Vec<ResonanceRecord>> {
    let ks: Vec<f64> = (0..opts.points)
        .map(|i| opts.k_min + (opts.k_max - opts.k_min) * i as f64 / (opts.points - 1) as f64)
        .collect();
    let mut out = Vec::new();
    for b in 0..2 {
        for nu in opts.nu_min..=opts.nu_max {
            // the shift is bounded, so skip harmonics whose bare level is far off-band
            let bare = engine.mean_energies()[b] - engine.params().omega * nu as f64;
            if bare.abs() > 2.0 * engine.params().h + 0.5 {
                continue;
            }
            let values: Vec<f64> = ks.iter().map(|&k| residual(engine, b, nu, k)).collect::<Result<_>>()?;
            for i in 0..ks.len() - 1 {
                if values[i] == 0.0 || values[i].signum() != values[i + 1].signum() {
                    if let Some(k) = bisect(engine, b, nu, ks[i], ks[i + 1], values[i], opts.k_tol)? {
                        let p = engine.params();
                        let shift = engine.level_shift(b, dispersion(k, p) + p.omega * nu as f64)?;
                        if shift.re.abs() <= opts.max_shift * p.omega {
                            out.push(record(engine, b, nu, k, opts.strong_threshold)?);
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.k_res.total_cmp(&b.k_res));
    Ok(out)
}

fn bisect(
    engine: &GppEngine,
    b: usize,
    nu: i32,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    tol: f64,
) -> Result<Option<f64>> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = residual(engine, b, nu, mid)?;
        if f_mid == 0.0 {
            return Ok(Some(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    // a sign change across a jump is not a root
    Ok((residual(engine, b, nu, k)?.abs() < ROOT_RESIDUAL).then_some(k))
}

fn record(engine: &GppEngine, b: usize, nu: i32, k: f64, threshold: f64) -> Result<ResonanceRecord> {
    let p = engine.params();
    let shift = engine.level_shift(b, dispersion(k, p) + p.omega * nu as f64)?;
    let strength_ratio = strength_ratio(engine, b, nu, k)?;
    Ok(ResonanceRecord {
        b: b + 1,
        nu,
        k_res: k,
        residual: residual(engine, b, nu, k)?.abs(),
        linewidth: shift.im,
        lifetime: 1.0 / shift.im,
        strength_ratio,
        classification: classify_ratio(strength_ratio, threshold),
    })
}

/// `|B_bk(nu)|^2 / |B_bk(+-1)|^2` with the sign of `nu`; `b` is zero-based.
pub fn strength_ratio(engine: &GppEngine, b: usize, nu: i32, k: f64) -> Result<f64> {
    let h = engine.bound_from_continuum(b, k)?;
    let dominant = if nu < 0 { -1 } else { 1 };
    Ok(h.at(nu).norm_sqr() / h.at(dominant).norm_sqr())
}

/// Strong when the ratio reaches the threshold.
pub fn classify_ratio(ratio: f64, threshold: f64) -> Classification {
    if ratio >= threshold {
        Classification::Strong
    } else {
        Classification::Weak
    }
}

/// Classification of a record at the given threshold.
pub fn classify(rec: &ResonanceRecord, threshold: f64) -> Classification {
    classify_ratio(rec.strength_ratio, threshold)
}

/// Trapping amplitude `A = |B_bk(nu)|^2 / (eps_b - eps_k - nu w - de_b)` of a
/// record, evaluated with the full complex denominator.
pub fn resonant_amplitude(engine: &GppEngine, rec: &ResonanceRecord) -> Result<C64> {
    let p = engine.params();
    let b = rec.b - 1;
    let ek = dispersion(rec.k_res, p);
    let shift = engine.level_shift(b, ek + p.omega * rec.nu as f64)?;
    let den = engine.mean_energies()[b] - ek - p.omega * rec.nu as f64 - shift;
    let h = engine.bound_from_continuum(b, rec.k_res)?;
    Ok(h.at(rec.nu).norm_sqr() / den)
}

/// Contribution `i A / (2h sin k)` of the resonant term to the elastic amplitude.
pub fn elastic_contribution(engine: &GppEngine, rec: &ResonanceRecord) -> Result<C64> {
    let v = 2.0 * engine.params().h * rec.k_res.sin();
    Ok(C64::i() * resonant_amplitude(engine, rec)? / v)
}
