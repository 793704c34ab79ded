//! Second-order adiabatic perturbation theory in the instantaneous basis,
//! with the bound-state propagators dressed by their level shifts.
//!
//! For an incoming momentum `k` the composite amplitude into sideband `n` is
//!
//! ```text
//! Y(n) = sqrt(2 pi) B_fk(n)
//!      + sum_b sum_nu B_fb(n - nu) B_bk(nu) / (eps_b - eps_k - nu w - de_b(eps_k + nu w))
//!      + 2 int_0^pi dq sum_nu B_fq(n - nu) B_qk(nu) / (eps_q - eps_k - nu w - i0)
//! ```
//!
//! with the level shift
//!
//! ```text
//! de_b(E) = (1 / 2pi) [ sum_nu |B_b'b(nu)|^2 / (eps_b' - E - nu w - i0)
//!                     + 2 int_0^pi dq sum_nu |B_qb(nu)|^2 / (eps_q - E - nu w - i0) ].
//! ```
//!
//! The continuum integral of `Y` is taken along `q = s - i lambda sin s`,
//! which realises the `-i0` prescription without touching the poles; the
//! level-shift integral uses singularity subtraction plus the on-shell residue.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::basis::{Endpoint, Harmonics, PeriodTable, DEFAULT_GRID, DEFAULT_NU_MAX, SQRT_TAU};
use crate::model::{check_momentum, dispersion, reflection_kernel, Params};
use crate::quad::{breaks_with_cuts, GaussLegendre};
use crate::{Error, Result, C64};

type ModelParams = Params<f64>;

/// How the amplitudes are assembled from `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeForm {
    /// `tau_el = <tau_st(g(t))> + (1 + 2 b_k) i Y(0) / v_k` and
    /// `tau_n = (1 + 2 b_kf) i Y(n) / v_kf`; agrees with the exact Floquet
    /// amplitudes to second order in the drive.
    Corrected,
    /// `tau_el = tau_st(g0) + i Y(0) / v_k` and `tau_n = i Y(n) / v_kf`.
    Literal,
}

/// Numerical settings of the perturbative engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GppOptions {
    /// Harmonic cut-off.
    pub nu_max: i32,
    /// Time samples per period.
    pub grid: usize,
    /// Uniform panels on `(0, pi)` for the continuum integrals.
    pub panels: usize,
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Depth `lambda` of the deformed contour `q = s - i lambda sin s`.
    pub contour_depth: f64,
    pub form: AmplitudeForm,
}

impl Default for GppOptions {
    fn default() -> Self {
        Self {
            nu_max: DEFAULT_NU_MAX,
            grid: DEFAULT_GRID,
            panels: 12,
            nodes: 24,
            contour_depth: 0.4,
            form: AmplitudeForm::Corrected,
        }
    }
}

/// Level shift of a bound state seen from incoming momentum `k_in` through
/// harmonic `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCorrection {
    pub b: usize,
    pub k_in: f64,
    pub nu: i32,
    pub value: C64,
}

/// Amplitude of one outgoing sideband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GppChannel {
    pub n: i32,
    pub k_f: f64,
    /// Composite second-order amplitude.
    pub y: C64,
    pub tau: C64,
    /// Velocity factor `sin k_f / sin k_in`.
    pub weight: f64,
}

/// Perturbative transmission at one incoming momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct GppAmplitude {
    pub k_in: f64,
    /// Open channels ordered by `n`; the elastic one has `n = 0`.
    pub channels: Vec<GppChannel>,
    pub t_total: f64,
    pub t_elastic: f64,
    /// Bound propagators `(b, nu)` whose denominator is small against the
    /// flips feeding it (resonant regime).
    pub near_resonance: Vec<(usize, i32)>,
}

impl GppAmplitude {
    pub fn channel(&self, n: i32) -> Option<&GppChannel> {
        self.channels.iter().find(|c| c.n == n)
    }

    pub fn tau_elastic(&self) -> C64 {
        self.channel(0).map_or(C64::from(0.0), |c| c.tau)
    }

    pub fn t_inelastic(&self, n: i32) -> Option<f64> {
        self.channel(n)
            .filter(|c| c.n != 0)
            .map(|c| c.weight * c.tau.norm_sqr())
    }
}

/// Precomputed flip tables for one parameter set.
#[derive(Debug)]
pub struct GppEngine {
    table: PeriodTable,
    opts: GppOptions,
    rule: GaussLegendre,
    /// Real nodes on `(0, pi)` for the level-shift integral.
    shift_nodes: Vec<(f64, f64)>,
    /// `|B_qb(nu)|^2` at the shift nodes, `[b][node][nu + nu_max]`.
    shift_power: [Vec<Vec<f64>>; 2],
    /// `|B_b'b(nu)|^2`, `[b][nu + nu_max]`.
    bound_power: [Vec<f64>; 2],
    /// Complex contour nodes `(q, dq)`.
    contour: Vec<(C64, C64)>,
}

impl GppEngine {
    pub fn new(p: &ModelParams) -> Result<Self> {
        Self::with_options(p, GppOptions::default())
    }

    pub fn with_options(p: &ModelParams, opts: GppOptions) -> Result<Self> {
        if opts.nu_max < 4 {
            return Err(Error::InvalidParam {
                field: "nu_max",
                reason: format!("must be at least 4, got {}", opts.nu_max),
            });
        }
        if !(opts.contour_depth > 0.0 && opts.contour_depth < 1.0) {
            return Err(Error::InvalidParam {
                field: "contour_depth",
                reason: format!("must lie in (0, 1), got {}", opts.contour_depth),
            });
        }
        let table = PeriodTable::new(p, opts.grid)?;
        let rule = GaussLegendre::new(opts.nodes);
        let shift_nodes = rule.composite(&breaks_with_cuts(0.0, PI, opts.panels, &[]));
        let lam = opts.contour_depth;
        let contour = shift_nodes
            .iter()
            .map(|&(s, w)| (C64::new(s, -lam * s.sin()), C64::new(1.0, -lam * s.cos()) * w))
            .collect();
        let nu = opts.nu_max;
        let power = |h: &Harmonics| (-nu..=nu).map(|v| h.at(v).norm_sqr()).collect::<Vec<f64>>();
        let mut shift_power = [Vec::new(), Vec::new()];
        let mut bound_power = [Vec::new(), Vec::new()];
        for b in 0..2 {
            bound_power[b] = power(&table.flip_harmonics(Endpoint::Bound(1 - b), Endpoint::Bound(b))?);
            shift_power[b] = shift_nodes
                .iter()
                .map(|&(q, _)| {
                    Ok(power(&table.flip_harmonics(
                        Endpoint::Continuum(C64::from(q)),
                        Endpoint::Bound(b),
                    )?))
                })
                .collect::<Result<_>>()?;
        }
        Ok(Self {
            table,
            opts,
            rule,
            shift_nodes,
            shift_power,
            bound_power,
            contour,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.table.params
    }

    pub fn options(&self) -> &GppOptions {
        &self.opts
    }

    pub fn table(&self) -> &PeriodTable {
        &self.table
    }

    /// Period-mean bound energies.
    pub fn mean_energies(&self) -> [f64; 2] {
        self.table.mean_energy
    }

    /// Fourier flips `B_bk(nu)` from the incoming state into bound state `b`.
    pub fn bound_from_continuum(&self, b: usize, k: f64) -> Result<Harmonics> {
        self.table
            .flip_harmonics(Endpoint::Bound(b), Endpoint::Continuum(C64::from(k)))
    }

    /// Momentum of the on-shell continuum state at energy `e`, if inside the band.
    fn on_shell(&self, e: f64) -> Option<f64> {
        let h = self.params().h;
        (e.abs() < 2.0 * h).then(|| (-e / (2.0 * h)).acos())
    }

    fn shift_at(&self, b: usize, e: f64, onshell: &mut dyn FnMut(i32, f64) -> Result<Vec<f64>>) -> Result<C64> {
        let p = self.params();
        let nu_max = self.opts.nu_max;
        let w = p.omega;
        let other = 1 - b;
        let mut total = C64::from(0.0);
        for (i, nu) in (-nu_max..=nu_max).enumerate() {
            let den = C64::new(self.table.mean_energy[other] - e - w * nu as f64, -1e-14);
            total += self.bound_power[b][i] / den;
        }
        for (i, nu) in (-nu_max..=nu_max).enumerate() {
            let ec = e + w * nu as f64;
            let sub = match self.on_shell(ec) {
                Some(qs) => {
                    let fs = onshell(nu, qs)?[i];
                    let residue = C64::i() * 2.0 * PI * fs / (2.0 * p.h * qs.sin());
                    if !residue.is_finite() {
                        return Err(Error::Quadrature(format!("on-shell residue not finite at E = {ec}")));
                    }
                    total += residue;
                    fs
                }
                None => 0.0,
            };
            for (j, &(q, wq)) in self.shift_nodes.iter().enumerate() {
                let eq = dispersion(q, p);
                total += 2.0 * wq * (self.shift_power[b][j][i] - sub) / (eq - ec);
            }
        }
        Ok(total / (2.0 * PI))
    }

    fn onshell_power(&self, b: usize, q: f64) -> Result<Vec<f64>> {
        let h = self
            .table
            .flip_harmonics(Endpoint::Continuum(C64::from(q)), Endpoint::Bound(b))?;
        let nu = self.opts.nu_max;
        Ok((-nu..=nu).map(|v| h.at(v).norm_sqr()).collect())
    }

    /// Level shift `de_b(E)` of bound state `b` at energy `e`.
    pub fn level_shift(&self, b: usize, e: f64) -> Result<C64> {
        self.shift_at(b, e, &mut |_, q| self.onshell_power(b, q))
    }

    /// Level shift entering the propagator of bound state `b` reached from
    /// `k_in` through harmonic `nu`.
    pub fn energy_correction(&self, b: usize, k_in: f64, nu: i32) -> Result<EnergyCorrection> {
        check_momentum(k_in)?;
        let e = dispersion(k_in, self.params()) + self.params().omega * nu as f64;
        Ok(EnergyCorrection {
            b,
            k_in,
            nu,
            value: self.level_shift(b, e)?,
        })
    }

    /// Level shifts `de_b(eps_k + nu w)` for both bound states and every
    /// `|nu| <= nu_max`, sharing the on-shell evaluations.
    pub fn level_shifts(&self, k_in: f64) -> Result<[Vec<C64>; 2]> {
        let p = *self.params();
        let ek = dispersion(k_in, &p);
        let nu_max = self.opts.nu_max;
        let mut out = [Vec::new(), Vec::new()];
        for (b, slot) in out.iter_mut().enumerate() {
            // on-shell momenta depend only on the total shift nu + nu'
            let mut cache: HashMap<i32, Vec<f64>> = HashMap::new();
            for nu in -nu_max..=nu_max {
                let mut lookup = |inner: i32, q: f64| -> Result<Vec<f64>> {
                    let key = nu + inner;
                    if let Some(v) = cache.get(&key) {
                        return Ok(v.clone());
                    }
                    let v = self.onshell_power(b, q)?;
                    cache.insert(key, v.clone());
                    Ok(v)
                };
                slot.push(self.shift_at(b, ek + p.omega * nu as f64, &mut lookup)?);
            }
        }
        Ok(out)
    }

    /// Linewidth from the on-shell sum alone: `sum_nu |B_qb(nu)|^2 / (2h sin q)`
    /// over open harmonics, optionally restricted to `nu = +-1`.
    pub fn on_shell_width(&self, b: usize, e: f64, dominant_only: bool) -> Result<f64> {
        let p = self.params();
        let nu_max = self.opts.nu_max;
        let mut width = 0.0;
        for (i, nu) in (-nu_max..=nu_max).enumerate() {
            if dominant_only && nu.abs() != 1 {
                continue;
            }
            if let Some(q) = self.on_shell(e + p.omega * nu as f64) {
                width += self.onshell_power(b, q)?[i] / (2.0 * p.h * q.sin());
            }
        }
        Ok(width)
    }

    /// Continuum-mediated part of `Y(n)` along the deformed contour.
    fn continuum_term(&self, k: f64, k_f: f64, n: i32, from_k: &[Harmonics]) -> Result<C64> {
        let p = self.params();
        let ek = dispersion(k, p);
        let nu_max = self.opts.nu_max;
        let mut total = C64::from(0.0);
        for (j, &(q, dq)) in self.contour.iter().enumerate() {
            let into_f = self
                .table
                .flip_harmonics(Endpoint::Continuum(C64::from(k_f)), Endpoint::Continuum(q))?;
            let eq = -q.cos() * (2.0 * p.h);
            for nu in -nu_max..=nu_max {
                if (n - nu).abs() > nu_max {
                    continue;
                }
                total += 2.0 * dq * into_f.at(n - nu) * from_k[j].at(nu) / (eq - ek - p.omega * nu as f64);
            }
        }
        Ok(total)
    }

    /// Composite amplitude `Y(n)` for the transition `k_in -> k_f`.
    pub fn amplitude_y(&self, k_f: f64, k_in: f64, n: i32) -> Result<C64> {
        let shifts = self.level_shifts(k_in)?;
        let from_k = self.contour_flips(k_in)?;
        let bk = [self.bound_from_continuum(0, k_in)?, self.bound_from_continuum(1, k_in)?];
        self.assemble_y(k_f, k_in, n, &shifts, &bk, &from_k).map(|(y, _)| y)
    }

    fn contour_flips(&self, k: f64) -> Result<Vec<Harmonics>> {
        self.contour
            .iter()
            .map(|&(q, _)| {
                self.table
                    .flip_harmonics(Endpoint::Continuum(q), Endpoint::Continuum(C64::from(k)))
            })
            .collect()
    }

    fn assemble_y(
        &self,
        k_f: f64,
        k_in: f64,
        n: i32,
        shifts: &[Vec<C64>; 2],
        bk: &[Harmonics; 2],
        from_k: &[Harmonics],
    ) -> Result<(C64, Vec<(usize, i32)>)> {
        let p = self.params();
        let ek = dispersion(k_in, p);
        let nu_max = self.opts.nu_max;
        let mut y = C64::from(0.0);
        if n != 0 {
            let direct = self.table.flip_harmonics(
                Endpoint::Continuum(C64::from(k_f)),
                Endpoint::Continuum(C64::from(k_in)),
            )?;
            y += SQRT_TAU * direct.at(n);
        }
        let mut flagged = Vec::new();
        for b in 0..2 {
            // B_fb(m) = conj(B_bf(-m)) for real k_f
            let bf = self.bound_from_continuum(b, k_f)?;
            for nu in -nu_max..=nu_max {
                let m = n - nu;
                if m.abs() > nu_max {
                    continue;
                }
                let den = self.table.mean_energy[b] - ek - p.omega * nu as f64 - shifts[b][(nu + nu_max) as usize];
                let num = bf.at(-m).conj() * bk[b].at(nu);
                if den.norm() < 10.0 * bk[b].at(nu).norm_sqr() && !flagged.contains(&(b, nu)) {
                    flagged.push((b, nu));
                }
                y += num / den;
            }
        }
        y += self.continuum_term(k_in, k_f, n, from_k)?;
        Ok((y, flagged))
    }

    /// Elastic and inelastic perturbative transmission at `k_in`.
    pub fn transmission(&self, k_in: f64) -> Result<GppAmplitude> {
        check_momentum(k_in)?;
        let p = *self.params();
        let ek = dispersion(k_in, &p);
        let shifts = self.level_shifts(k_in)?;
        let from_k = self.contour_flips(k_in)?;
        let bk = [self.bound_from_continuum(0, k_in)?, self.bound_from_continuum(1, k_in)?];
        let v_in = 2.0 * p.h * k_in.sin();
        let mut channels = Vec::new();
        let mut near_resonance = Vec::new();
        for n in -self.opts.nu_max..=self.opts.nu_max {
            let Some(k_f) = self.on_shell(ek + p.omega * n as f64) else {
                continue;
            };
            check_momentum(k_f)?;
            let v_f = 2.0 * p.h * k_f.sin();
            let (y, flagged) = self.assemble_y(k_f, k_in, n, &shifts, &bk, &from_k)?;
            for f in flagged {
                if !near_resonance.contains(&f) {
                    near_resonance.push(f);
                }
            }
            let tau = match (self.opts.form, n) {
                (AmplitudeForm::Corrected, 0) => {
                    let mean = self
                        .table
                        .coupling
                        .iter()
                        .map(|&g| reflection_kernel(C64::from(k_in), g, &p) + 1.0)
                        .sum::<C64>()
                        / self.table.samples() as f64;
                    let b = reflection_kernel(C64::from(k_in), p.g0, &p);
                    mean + (b * 2.0 + 1.0) * C64::i() * y / v_in
                }
                (AmplitudeForm::Corrected, _) => {
                    let b = reflection_kernel(C64::from(k_f), p.g0, &p);
                    (b * 2.0 + 1.0) * C64::i() * y / v_f
                }
                (AmplitudeForm::Literal, 0) => reflection_kernel(C64::from(k_in), p.g0, &p) + 1.0 + C64::i() * y / v_in,
                (AmplitudeForm::Literal, _) => C64::i() * y / v_f,
            };
            channels.push(GppChannel {
                n,
                k_f,
                y,
                tau,
                weight: v_f / v_in,
            });
        }
        let t_total = channels.iter().map(|c| c.weight * c.tau.norm_sqr()).sum();
        let t_elastic = channels.iter().find(|c| c.n == 0).map_or(0.0, |c| c.tau.norm_sqr());
        Ok(GppAmplitude {
            k_in,
            channels,
            t_total,
            t_elastic,
            near_resonance,
        })
    }

    /// Gauss-Legendre rule used by the engine's panels.
    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{static_scattering, DEFAULT_ETA};

    fn fig4() -> ModelParams {
        Params::new(0.5, -1.0, 0.5, 0.25, 1.0, DEFAULT_ETA).unwrap()
    }

    #[test]
    fn undriven_reduces_to_static() {
        let p = Params::undriven(0.5, -1.0, 0.5).unwrap();
        let eng = GppEngine::new(&p).unwrap();
        for k in [0.5, 1.3, 2.2] {
            let a = eng.transmission(k).unwrap();
            let st = static_scattering(k, 0.5, &p).unwrap();
            assert!((a.tau_elastic() - st.tau).norm() < 1e-12);
            assert!((a.t_total - st.transmission()).abs() < 1e-12);
            assert!(eng.energy_correction(0, k, -1).unwrap().value.norm() < 1e-14);
        }
    }

    #[test]
    fn flags_propagators_near_their_pole() {
        let eng = GppEngine::new(&fig4()).unwrap();
        assert!(eng.transmission(1.26).unwrap().near_resonance.contains(&(0, -1)));
        assert!(eng.transmission(2.0).unwrap().near_resonance.is_empty());
    }

    #[test]
    fn widths_are_non_negative() {
        let eng = GppEngine::new(&fig4()).unwrap();
        for k in [0.4, 1.26, 2.0] {
            for nu in -3..=3 {
                for b in 0..2 {
                    assert!(eng.energy_correction(b, k, nu).unwrap().value.im >= 0.0);
                }
            }
        }
    }

    #[test]
    fn shared_shifts_match_single_calls() {
        let eng = GppEngine::new(&fig4()).unwrap();
        let all = eng.level_shifts(1.1).unwrap();
        for nu in [-2, 0, 3] {
            for b in 0..2 {
                let one = eng.energy_correction(b, 1.1, nu).unwrap().value;
                assert!((one - all[b][(nu + 8) as usize]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn rejects_bad_options() {
        let p = fig4();
        let mut o = GppOptions::default();
        o.nu_max = 2;
        assert!(GppEngine::with_options(&p, o).is_err());
        o.nu_max = 8;
        o.contour_depth = 1.5;
        assert!(GppEngine::with_options(&p, o).is_err());
    }
}
