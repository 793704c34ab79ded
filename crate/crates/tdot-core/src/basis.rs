//! Instantaneous eigenbasis of the frozen Hamiltonian `H(t)` and the flips
//! (non-adiabatic transition amplitudes) between its states.
//!
//! Continuum states are delta-normalised plane waves dressed by the dot,
//! bound states are unit-normalised and real. The driving enters only through
//! `dH/dt = -g'(t) (|0><d| + |d><0|)`, so every flip needs just the amplitudes
//! of the two states on site 0 and on the dot.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::model::{bound_states, check_momentum, coupling_at, dispersion, reflection_kernel, Params};
use crate::{Error, Result, C64};

/// `sqrt(2 pi)`, the continuum normalisation.
pub const SQRT_TAU: f64 = 2.506_628_274_631_000_7;

/// Default number of time samples per driving period.
pub const DEFAULT_GRID: usize = 512;

/// Default harmonic cut-off.
pub const DEFAULT_NU_MAX: i32 = 8;

type ModelParams = Params<f64>;

/// Scattering direction of a continuum state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Incoming from the left, `e^{ikx}`.
    Right,
    /// Incoming from the right, `e^{-ikx}`.
    Left,
}

/// Label of an instantaneous eigenstate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label {
    Continuum(f64, Direction),
    /// Bound state 0 (below the band) or 1 (above it).
    Bound(usize),
}

/// An instantaneous eigenstate evaluated at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantaneousState {
    pub label: Label,
    pub t: f64,
    pub energy: f64,
    /// Amplitude on chain site 0.
    pub site0: C64,
    /// Amplitude on the dot.
    pub dot: C64,
    /// Reflection kernel (continuum) or decay root `z` (bound).
    kernel: C64,
}

impl InstantaneousState {
    /// Amplitude on chain site `x`.
    pub fn amplitude(&self, x: i64) -> C64 {
        match self.label {
            Label::Continuum(k, dir) => {
                let s = if dir == Direction::Right { 1.0 } else { -1.0 };
                let free = C64::from_polar(1.0, s * k * x as f64);
                let out = C64::from_polar(1.0, k * x.unsigned_abs() as f64);
                (free + self.kernel * out) / SQRT_TAU
            }
            Label::Bound(_) => self.site0 * self.kernel.re.powi(x.unsigned_abs() as i32),
        }
    }

    /// Decay rate of a bound state, `None` for continuum states.
    pub fn decay_rate(&self) -> Option<f64> {
        matches!(self.label, Label::Bound(_)).then(|| -self.kernel.re.abs().ln())
    }
}

/// Site-0 and dot amplitudes of the continuum ket at (possibly complex) `q`.
pub fn analytic_ket(q: C64, g: f64, p: &ModelParams) -> (C64, C64) {
    let b = reflection_kernel(q, g, p);
    let dot = -C64::i() * 2.0 * p.h * b * q.sin() / (g * SQRT_TAU);
    ((b + 1.0) / SQRT_TAU, dot)
}

/// Site-0 and dot amplitudes of the continuum bra at `q`: the analytic
/// continuation of the complex conjugate of the ket from real `q`.
pub fn analytic_bra(q: C64, g: f64, p: &ModelParams) -> (C64, C64) {
    let two_h = 2.0 * p.h;
    let eps_q = -q.cos() * two_h;
    let g2 = C64::from(g * g);
    let b = -g2 / (g2 - C64::i() * two_h * (p.eps_d - eps_q) * q.sin());
    let dot = C64::i() * two_h * b * q.sin() / (g * SQRT_TAU);
    ((b + 1.0) / SQRT_TAU, dot)
}

/// Energy and real (site 0, dot) amplitudes of both bound states at `g`.
pub fn bound_amplitudes(g: f64, p: &ModelParams) -> Result<[(f64, f64, f64); 2]> {
    let set = bound_states(g, p)?;
    Ok(set.states.map(|s| {
        let t = s.q.tanh();
        let gap = p.eps_d - s.energy;
        let a = 1.0 / (g * g * t + gap * gap).sqrt();
        (s.energy, a * t.sqrt() * gap, a * t.sqrt() * g)
    }))
}

/// Continuum eigenstate of `H(t)` with momentum `0 < k < pi`.
pub fn continuum_state(k: f64, direction: Direction, t: f64, p: &ModelParams) -> Result<InstantaneousState> {
    check_momentum(k)?;
    let g = coupling_at(t, p).0;
    let (site0, dot) = if g == 0.0 {
        (C64::from(1.0 / SQRT_TAU), C64::from(0.0))
    } else {
        analytic_ket(C64::from(k), g, p)
    };
    Ok(InstantaneousState {
        label: Label::Continuum(k, direction),
        t,
        energy: dispersion(k, p),
        site0,
        dot,
        kernel: site0 * SQRT_TAU - 1.0,
    })
}

/// Bound eigenstate `index` (0 lower, 1 upper) of `H(t)`.
pub fn bound_state(index: usize, t: f64, p: &ModelParams) -> Result<InstantaneousState> {
    assert!(index < 2, "bound index must be 0 or 1");
    let g = coupling_at(t, p).0;
    let z = bound_states(g, p)?.states[index].z;
    let (energy, site0, dot) = bound_amplitudes(g, p)?[index];
    Ok(InstantaneousState {
        label: Label::Bound(index),
        t,
        energy,
        site0: C64::from(site0),
        dot: C64::from(dot),
        kernel: C64::from(z),
    })
}

/// Instantaneous state for any label.
pub fn state(label: Label, t: f64, p: &ModelParams) -> Result<InstantaneousState> {
    match label {
        Label::Continuum(k, d) => continuum_state(k, d, t, p),
        Label::Bound(i) => bound_state(i, t, p),
    }
}

/// Flip `<n_t| i dH/dt |m_t> / (E_m - E_n)` at time `t`.
pub fn flip(n: Label, m: Label, t: f64, p: &ModelParams) -> Result<C64> {
    let (sn, sm) = (state(n, t, p)?, state(m, t, p)?);
    let gap = sm.energy - sn.energy;
    if gap.abs() < 1e-12 {
        return Err(Error::DegenerateEnergies { gap });
    }
    let gdot = coupling_at(t, p).1;
    let elem = -(sn.site0.conj() * sm.dot + sn.dot.conj() * sm.site0);
    Ok(C64::i() * gdot * elem / gap)
}

/// One end of a flip on the period grid: a bound state, or a continuum
/// state at a possibly complex momentum (analytic continuation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Bound(usize),
    Continuum(C64),
}

/// An endpoint with its time-independent factors evaluated once.
enum Prepared {
    Bound(usize),
    Continuum {
        energy: C64,
        kernel_den: C64,
        dot_factor: C64,
    },
}

/// Harmonic coefficients of a periodic function, indexed modulo the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonics(Vec<C64>);

impl Harmonics {
    /// Coefficient of `e^{-i nu omega t}`.
    pub fn at(&self, nu: i32) -> C64 {
        let n = self.0.len() as i32;
        self.0[nu.rem_euclid(n) as usize]
    }
}

/// Per-period tables of the bound states and dynamical phases, shared by
/// every flip computation.
#[derive(Clone)]
pub struct PeriodTable {
    pub params: ModelParams,
    pub times: Vec<f64>,
    pub coupling: Vec<f64>,
    pub coupling_rate: Vec<f64>,
    /// Bound energies `[state][sample]`.
    pub energy: [Vec<f64>; 2],
    /// Bound amplitudes on site 0.
    pub site0: [Vec<f64>; 2],
    /// Bound amplitudes on the dot.
    pub dot: [Vec<f64>; 2],
    /// Period-mean bound energies.
    pub mean_energy: [f64; 2],
    /// `int_0^t (E_b - mean) dt'`, periodic by construction.
    pub phase: [Vec<f64>; 2],
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodTable")
            .field("samples", &self.times.len())
            .field("mean_energy", &self.mean_energy)
            .finish()
    }
}

impl PeriodTable {
    /// Samples one driving period on `samples` uniform points.
    pub fn new(p: &ModelParams, samples: usize) -> Result<Self> {
        p.validate()?;
        if p.g0 <= 0.0 {
            return Err(Error::InvalidParam {
                field: "g0",
                reason: "the instantaneous basis needs a coupled dot".into(),
            });
        }
        let fft = FftPlanner::new().plan_fft_inverse(samples);
        let times: Vec<f64> = (0..samples).map(|j| p.period() * j as f64 / samples as f64).collect();
        let (coupling, coupling_rate): (Vec<f64>, Vec<f64>) = times.iter().map(|&t| coupling_at(t, p)).unzip();
        let mut energy = [Vec::new(), Vec::new()];
        let mut site0 = [Vec::new(), Vec::new()];
        let mut dot = [Vec::new(), Vec::new()];
        for &g in &coupling {
            for (b, (e, s0, d)) in bound_amplitudes(g, p)?.into_iter().enumerate() {
                energy[b].push(e);
                site0[b].push(s0);
                dot[b].push(d);
            }
        }
        let mut table = Self {
            params: *p,
            times,
            coupling,
            coupling_rate,
            energy,
            site0,
            dot,
            mean_energy: [0.0; 2],
            phase: [Vec::new(), Vec::new()],
            fft,
        };
        for b in 0..2 {
            let mean = table.energy[b].iter().sum::<f64>() / samples as f64;
            table.mean_energy[b] = mean;
            table.phase[b] = table.integrate_periodic(&table.energy[b].iter().map(|e| e - mean).collect::<Vec<_>>());
        }
        Ok(table)
    }

    pub fn samples(&self) -> usize {
        self.times.len()
    }

    /// Harmonics `beta(nu)` of samples `f_j`, with `f(t) = sum beta(nu) e^{-i nu omega t}`.
    pub fn harmonics(&self, f: &[f64]) -> Harmonics {
        let mut buf: Vec<C64> = f.iter().map(|&x| C64::from(x)).collect();
        self.harmonics_in_place(&mut buf);
        Harmonics(buf)
    }

    fn harmonics_in_place(&self, buf: &mut [C64]) {
        self.fft.process(buf);
        let inv = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|c| *c *= inv);
    }

    /// Periodic antiderivative of a zero-mean sampled function.
    fn integrate_periodic(&self, f: &[f64]) -> Vec<f64> {
        let c = self.harmonics(f);
        let n = f.len() as i32;
        let w = self.params.omega;
        self.times
            .iter()
            .map(|&t| {
                (1..n as usize)
                    .filter(|&j| 2 * j != n as usize)
                    .map(|j| {
                        let nu = grid_frequency(j, n as usize) as f64;
                        let factor = (C64::from_polar(1.0, -w * nu * t) - 1.0) / (-C64::i() * w * nu);
                        c.0[j] * factor
                    })
                    .sum::<C64>()
                    .re
            })
            .collect()
    }

    fn prepare(&self, e: Endpoint, as_bra: bool) -> Prepared {
        match e {
            Endpoint::Bound(b) => Prepared::Bound(b),
            Endpoint::Continuum(q) => {
                let p = &self.params;
                let two_h = 2.0 * p.h;
                let energy = -q.cos() * two_h;
                let sign = if as_bra { -1.0 } else { 1.0 };
                let sin_q = q.sin();
                Prepared::Continuum {
                    energy,
                    kernel_den: C64::i() * sign * two_h * (p.eps_d - energy) * sin_q,
                    dot_factor: -C64::i() * sign * two_h * sin_q / SQRT_TAU,
                }
            }
        }
    }

    /// Energy, site-0 amplitude, dot amplitude and dynamical phase at sample `j`.
    fn sample(&self, e: &Prepared, j: usize) -> (C64, C64, C64, f64) {
        match *e {
            Prepared::Bound(b) => (
                C64::from(self.energy[b][j]),
                C64::from(self.site0[b][j]),
                C64::from(self.dot[b][j]),
                self.phase[b][j],
            ),
            Prepared::Continuum {
                energy,
                kernel_den,
                dot_factor,
            } => {
                let g = self.coupling[j];
                let g2 = C64::from(g * g);
                let b = -g2 / (g2 + kernel_den);
                (energy, (b + 1.0) / SQRT_TAU, dot_factor * b / g, 0.0)
            }
        }
    }

    /// Phase-dressed flip `e^{i phi_n} Phi_nm e^{-i phi_m}` on the grid.
    pub fn dressed_flip(&self, n: Endpoint, m: Endpoint) -> Result<Vec<C64>> {
        let (pn, pm) = (self.prepare(n, true), self.prepare(m, false));
        (0..self.samples())
            .map(|j| {
                let (en, n0, nd, phn) = self.sample(&pn, j);
                let (em, m0, md, phm) = self.sample(&pm, j);
                let gap = em - en;
                if gap.norm() < 1e-12 {
                    return Err(Error::DegenerateEnergies { gap: gap.norm() });
                }
                let elem = -(n0 * md + nd * m0);
                let phi = C64::i() * self.coupling_rate[j] * elem / gap;
                Ok(phi * C64::from_polar(1.0, phn - phm))
            })
            .collect()
    }

    /// Fourier flip coefficients `B_nm(nu) = sqrt(2 pi) beta(nu)` of the
    /// dressed flip.
    pub fn flip_harmonics(&self, n: Endpoint, m: Endpoint) -> Result<Harmonics> {
        let mut buf = self.dressed_flip(n, m)?;
        self.harmonics_in_place(&mut buf);
        buf.iter_mut().for_each(|c| *c *= SQRT_TAU);
        Ok(Harmonics(buf))
    }

    /// `B_nm(nu)` restricted to `|nu| <= nu_max`.
    pub fn fourier_flips(&self, n: Endpoint, m: Endpoint, nu_max: i32) -> Result<FlipSpectrum> {
        if nu_max < 4 {
            return Err(Error::InvalidParam {
                field: "nu_max",
                reason: format!("must be at least 4, got {nu_max}"),
            });
        }
        let h = self.flip_harmonics(n, m)?;
        Ok(FlipSpectrum {
            pair: (n, m),
            nu_max,
            coefficients: (-nu_max..=nu_max).map(|nu| h.at(nu)).collect(),
        })
    }

    /// Change of the dynamical-phase factor `e^{i phi_b}` across one period
    /// (trapezoidal integral of `E_b - mean`); zero up to rounding because the
    /// phase is taken relative to the period-mean energy.
    pub fn periodicity_mismatch(&self, b: usize) -> f64 {
        let dt = self.params.period() / self.samples() as f64;
        let drift: f64 = self.energy[b].iter().map(|e| e - self.mean_energy[b]).sum();
        (drift * dt).abs()
    }
}

/// Fourier flip coefficients of one pair of states.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipSpectrum {
    pub pair: (Endpoint, Endpoint),
    pub nu_max: i32,
    /// `B(nu)` for `nu = -nu_max ..= nu_max`.
    pub coefficients: Vec<C64>,
}

impl FlipSpectrum {
    pub fn get(&self, nu: i32) -> Option<C64> {
        (nu.abs() <= self.nu_max).then(|| self.coefficients[(nu + self.nu_max) as usize])
    }

    /// `sum |B(nu)|^2` over the kept harmonics.
    pub fn power(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Signed frequency of index `j` on an `n`-point grid.
fn grid_frequency(j: usize, n: usize) -> i32 {
    if j < n / 2 {
        j as i32
    } else {
        j as i32 - n as i32
    }
}
