//! Brute-force reference: a Gaussian wavepacket sent through a finite chain
//! with the driven dot attached, integrated with the implicit midpoint rule.
//!
//! The dot is stored right after site 0 so that the Hamiltonian is a band
//! matrix with two off-diagonals, which keeps every step linear in the chain
//! length.

use rayon::prelude::*;

use crate::linalg::{BandLu, BandMatrix};
use crate::model::{check_momentum, coupling_at, Params};
use crate::{Error, Result, C64};

type ModelParams = Params<f64>;

/// Propagation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Number of chain sites (the chain spans `-L/2 ..= L/2`).
    pub length: usize,
    /// Packet width in sites.
    pub sigma: f64,
    /// Time step.
    pub dt: f64,
}

impl OracleOptions {
    /// Defaults for a given hopping: `L = 4000`, `sigma = 40`, `dt = 0.02 / h`.
    pub fn for_params(p: &ModelParams) -> Self {
        Self {
            length: 4000,
            sigma: 40.0,
            dt: 0.02 / p.h,
        }
    }
}

/// State of the finite chain plus dot.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeWavefunction {
    /// Chain sites run from `-half` to `half`.
    pub half: i64,
    /// Amplitudes in storage order (sites `<= 0`, dot, sites `> 0`).
    pub psi: Vec<C64>,
    pub t: f64,
}

impl LatticeWavefunction {
    fn index(&self, x: i64) -> usize {
        if x <= 0 {
            (x + self.half) as usize
        } else {
            (x + self.half + 1) as usize
        }
    }

    fn dot_index(&self) -> usize {
        self.half as usize + 1
    }

    /// Amplitude on chain site `x`.
    pub fn site(&self, x: i64) -> C64 {
        self.psi[self.index(x)]
    }

    /// Amplitude on the dot.
    pub fn dot(&self) -> C64 {
        self.psi[self.dot_index()]
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Weight on chain sites `x > x_cut`.
    pub fn weight_right_of(&self, x_cut: i64) -> f64 {
        (x_cut + 1..=self.half).map(|x| self.site(x).norm_sqr()).sum()
    }

    /// Weight within `width` sites of either chain end.
    pub fn edge_weight(&self, width: i64) -> f64 {
        let w = width.min(self.half);
        (0..w)
            .map(|i| self.site(-self.half + i).norm_sqr() + self.site(self.half - i).norm_sqr())
            .sum()
    }

    /// Normalised Gaussian packet centred at `x0` with carrier `k0`.
    pub fn gaussian(half: i64, x0: f64, sigma: f64, k0: f64) -> Self {
        let mut wf = Self {
            half,
            psi: vec![C64::from(0.0); 2 * half as usize + 2],
            t: 0.0,
        };
        for x in -half..=half {
            let d = (x as f64 - x0) / sigma;
            let i = wf.index(x);
            wf.psi[i] = C64::from_polar((-0.25 * d * d).exp(), k0 * x as f64);
        }
        let n = wf.norm().sqrt();
        wf.psi.iter_mut().for_each(|c| *c /= n);
        wf
    }

    /// Storage index of chain position `j = x + half`.
    fn chain_slot(&self, j: usize) -> usize {
        if j <= self.half as usize {
            j
        } else {
            j + 1
        }
    }

    /// One implicit-midpoint step. Builds a throwaway [`MidpointStepper`];
    /// use one directly when stepping repeatedly.
    pub fn step(&mut self, dt: f64, p: &ModelParams) -> Result<()> {
        MidpointStepper::new(self.half, dt, p)?.step(self, p);
        Ok(())
    }
}

/// Implicit midpoint propagator `(1 + i dt H/2) psi' = (1 - i dt H/2) psi`
/// with `H` frozen at the midpoint time.
///
/// Only the two dot-chain entries depend on time, so the static matrix is
/// factorised once and the coupling is added back as a rank-two update.
#[derive(Debug, Clone)]
pub struct MidpointStepper {
    half: i64,
    dt: f64,
    lu: BandLu<f64>,
    /// Static solves against unit vectors on site 0 and on the dot.
    z_site: Vec<C64>,
    z_dot: Vec<C64>,
}

impl MidpointStepper {
    pub fn new(half: i64, dt: f64, p: &ModelParams) -> Result<Self> {
        let n = 2 * half as usize + 2;
        let a = C64::new(0.0, 0.5 * dt);
        let probe = LatticeWavefunction {
            half,
            psi: Vec::new(),
            t: 0.0,
        };
        let mut m = BandMatrix::zeros(n, 2, 2);
        for i in 0..n {
            m.set(i, i, C64::from(1.0));
        }
        for j in 0..2 * half as usize {
            let (u, v) = (probe.chain_slot(j), probe.chain_slot(j + 1));
            m.set(u, v, -a * p.h);
            m.set(v, u, -a * p.h);
        }
        let d = probe.dot_index();
        m.set(d, d, C64::from(1.0) + a * p.eps_d);
        let lu = m.factor()?;
        let unit = |i: usize| {
            let mut e = vec![C64::from(0.0); n];
            e[i] = C64::from(1.0);
            lu.solve(&mut e);
            e
        };
        let z_site = unit(probe.index(0));
        let z_dot = unit(d);
        Ok(Self {
            half,
            dt,
            lu,
            z_site,
            z_dot,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, wf: &mut LatticeWavefunction, p: &ModelParams) {
        assert_eq!(wf.half, self.half, "stepper built for a different chain");
        let g = coupling_at(wf.t + 0.5 * self.dt, p).0;
        let a = C64::new(0.0, 0.5 * self.dt);
        let (i0, d) = (wf.index(0), wf.dot_index());
        let sites = 2 * self.half as usize + 1;
        let psi = &wf.psi;
        let mut rhs = vec![C64::from(0.0); psi.len()];
        for j in 0..sites {
            let mut hpsi = C64::from(0.0);
            if j > 0 {
                hpsi -= psi[wf.chain_slot(j - 1)] * p.h;
            }
            if j + 1 < sites {
                hpsi -= psi[wf.chain_slot(j + 1)] * p.h;
            }
            let i = wf.chain_slot(j);
            if i == i0 {
                hpsi -= psi[d] * g;
            }
            rhs[i] = psi[i] - a * hpsi;
        }
        rhs[d] = psi[d] - a * (psi[d] * p.eps_d - psi[i0] * g);
        self.lu.solve(&mut rhs);
        // Woodbury correction for the coupling c (e0 ed^T + ed e0^T)
        let c = -a * g;
        if c.norm() > 0.0 {
            let inv = c.inv();
            let (m00, m01) = (inv + self.z_site[d], self.z_dot[d]);
            let (m10, m11) = (self.z_site[i0], inv + self.z_dot[i0]);
            let (r0, r1) = (rhs[d], rhs[i0]);
            let det = m00 * m11 - m01 * m10;
            let s0 = (r0 * m11 - m01 * r1) / det;
            let s1 = (m00 * r1 - m10 * r0) / det;
            for ((x, zs), zd) in rhs.iter_mut().zip(&self.z_site).zip(&self.z_dot) {
                *x -= zs * s0 + zd * s1;
            }
        }
        wf.psi = rhs;
        wf.t += self.dt;
    }
}

/// Result of one propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagation {
    pub k0: f64,
    /// Weight on sites `x > 0` at the final time.
    pub transmitted: f64,
    /// Largest deviation of the norm from one along the run.
    pub norm_drift: f64,
    pub final_time: f64,
}

/// Sends a packet with carrier `k0` through the dot and returns the
/// transmitted probability.
pub fn propagate(k0: f64, opts: &OracleOptions, p: &ModelParams) -> Result<f64> {
    propagate_detailed(k0, opts, p).map(|r| r.transmitted)
}

/// As [`propagate`] with diagnostics.
pub fn propagate_detailed(k0: f64, opts: &OracleOptions, p: &ModelParams) -> Result<Propagation> {
    check_momentum(k0)?;
    p.validate()?;
    if opts.sigma < 20.0 {
        return Err(Error::InvalidParam {
            field: "sigma",
            reason: format!("packet width must be at least 20 sites, got {}", opts.sigma),
        });
    }
    if !(opts.dt > 0.0) {
        return Err(Error::InvalidParam {
            field: "dt",
            reason: format!("must be positive, got {}", opts.dt),
        });
    }
    let half = (opts.length / 2) as i64;
    let x0 = -6.0 * opts.sigma;
    if (half as f64) < 6.0 * opts.sigma + 5.0 * opts.sigma {
        return Err(Error::InvalidParam {
            field: "length",
            reason: format!("chain of {} sites too short for sigma = {}", opts.length, opts.sigma),
        });
    }
    let speed = 2.0 * p.h * k0.sin();
    // incoming centre ends 8 sigma past the dot
    let final_time = 14.0 * opts.sigma / speed;
    let steps = (final_time / opts.dt).ceil() as usize;
    let mut wf = LatticeWavefunction::gaussian(half, x0, opts.sigma, k0);
    let edge = (5.0 * opts.sigma) as i64;
    let stepper = MidpointStepper::new(half, opts.dt, p)?;
    let mut drift: f64 = 0.0;
    for s in 0..steps {
        stepper.step(&mut wf, p);
        if s % 256 == 0 || s + 1 == steps {
            drift = drift.max((wf.norm() - 1.0).abs());
            let weight = wf.edge_weight(edge);
            if weight > 1e-6 {
                return Err(Error::BoundaryReflection { weight });
            }
        }
    }
    Ok(Propagation {
        k0,
        transmitted: wf.weight_right_of(0),
        norm_drift: drift,
        final_time: wf.t,
    })
}

/// Transmission at several carriers, computed in parallel.
pub fn transmission_curve(ks: &[f64], opts: &OracleOptions, p: &ModelParams) -> Result<Vec<(f64, f64)>> {
    ks.par_iter().map(|&k| propagate(k, opts, p).map(|t| (k, t))).collect()
}
