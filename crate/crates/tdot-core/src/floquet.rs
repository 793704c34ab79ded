//! Exact Floquet scattering off the driven dot.
//!
//! With a harmonic coupling only neighbouring sidebands talk to each other
//! through the dot, and eliminating the dot amplitude leaves a five-term
//! recursion for the transmitted amplitudes `tau_n`:
//!
//! ```text
//! a_n tau_{n-2} + b_n tau_{n-1} + c_n tau_n + d_n tau_{n+1} + e_n tau_{n+2} = 2ih sin(k_0) delta_{n0}
//! ```
//!
//! truncated to `|n| <= (n_modes - 1) / 2` and solved as a banded system.

use num_traits::{One, Zero};

use crate::linalg::BandMatrix;
use crate::model::{check_momentum, dispersion, Params};
use crate::{Complex, Error, Real, Result};

/// Default number of sidebands kept.
pub const DEFAULT_MODES: usize = 31;

/// Largest boundary amplitude accepted as converged.
pub const BOUNDARY_LIMIT: f64 = 1e-5;

/// Momentum of sideband `n` at Floquet energy `E_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMomentum<T> {
    pub n: i32,
    pub k: Complex<T>,
    /// Whether `E_F + n omega` lies inside the band (propagating channel).
    pub open: bool,
}

impl<T: Real> ChannelMomentum<T> {
    /// Current weight `|sin k_n|` of an open channel, zero for closed ones.
    pub fn speed(&self) -> T {
        if self.open {
            self.k.re.sin().abs()
        } else {
            T::zero()
        }
    }
}

/// Complex momentum solving `cos k = -(E_F + i eta + n omega) / 2h` on the
/// branch `k = -i ln(z + i sqrt(1 - z^2))`, which keeps evanescent channels
/// decaying (`Im k > 0`).
pub fn channel_momentum<T: Real>(e_f: T, n: i32, p: &Params<T>) -> ChannelMomentum<T> {
    let shifted = e_f + T::from(n).unwrap() * p.omega;
    let z = -(Complex::new(shifted, p.eta)) / (T::lit(2.0) * p.h);
    let root = (Complex::<T>::one() - z * z).sqrt();
    let k = -Complex::<T>::i() * (z + Complex::<T>::i() * root).ln();
    ChannelMomentum {
        n,
        k,
        open: shifted.abs() <= T::lit(2.0) * p.h,
    }
}

/// The five coefficients of row `n`, multiplying `tau_{n-2} .. tau_{n+2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowCoefficients<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: Complex<T>,
    pub e: Complex<T>,
}

/// Coefficients of row `n` of the recursion.
pub fn recursion_coefficients<T: Real>(n: i32, e_f: T, p: &Params<T>) -> RowCoefficients<T> {
    let inv_d = |m: i32| {
        let den = Complex::new(p.eps_d - e_f - T::from(m).unwrap() * p.omega, -p.eta);
        den.inv()
    };
    let (dm, d0, dp) = (inv_d(n - 1), inv_d(n), inv_d(n + 1));
    let quarter = p.g1 * p.g1 / T::lit(4.0);
    let half = p.g0 * p.g1 / T::lit(2.0);
    let kn = channel_momentum(e_f, n, p).k;
    RowCoefficients {
        a: dm * quarter,
        b: (dm + d0) * half,
        c: Complex::i() * (T::lit(2.0) * p.h) * kn.sin() + d0 * (p.g0 * p.g0) + (dp + dm) * quarter,
        d: (d0 + dp) * half,
        e: dp * quarter,
    }
}

/// Amplitudes in one sideband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel<T> {
    pub momentum: ChannelMomentum<T>,
    /// Transmitted amplitude.
    pub tau: Complex<T>,
    /// Reflected amplitude.
    pub r: Complex<T>,
    /// Dot amplitude of this harmonic.
    pub dot: Complex<T>,
    /// Velocity factor `|sin k_n / sin k_in|`, zero for closed channels.
    pub weight: T,
}

/// Solution of the truncated Floquet problem for one incoming momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub k_in: T,
    pub e_f: T,
    pub n_modes: usize,
    /// Channels ordered by `n` from `-(n_modes-1)/2` upward.
    pub channels: Vec<Channel<T>>,
    pub t_total: T,
    pub t_elastic: T,
}

impl<T: Real> Solution<T> {
    /// Channel with sideband index `n`, if kept.
    pub fn channel(&self, n: i32) -> Option<&Channel<T>> {
        let half = (self.n_modes / 2) as i32;
        (n.abs() <= half).then(|| &self.channels[(n + half) as usize])
    }

    /// Inelastic transmission into open sideband `n != 0`.
    pub fn t_inelastic(&self, n: i32) -> Option<T> {
        self.channel(n)
            .filter(|c| n != 0 && c.momentum.open)
            .map(|c| c.weight * c.tau.norm_sqr())
    }

    /// Open sidebands other than the elastic one.
    pub fn open_inelastic(&self) -> impl Iterator<Item = i32> + '_ {
        self.channels
            .iter()
            .filter(|c| c.momentum.open && c.momentum.n != 0)
            .map(|c| c.momentum.n)
    }

    /// Velocity-weighted outgoing current; equals one for a unitary solution.
    pub fn unitarity_sum(&self) -> T {
        self.channels
            .iter()
            .fold(T::zero(), |s, c| s + c.weight * (c.tau.norm_sqr() + c.r.norm_sqr()))
    }
}

/// Solves the truncated recursion at incoming momentum `k_in`.
pub fn solve<T: Real>(k_in: T, n_modes: usize, p: &Params<T>) -> Result<Solution<T>> {
    let sol = solve_unchecked(k_in, n_modes, p)?;
    let edge = sol.channels[0].tau.norm().max(sol.channels[n_modes - 1].tau.norm());
    if edge > T::lit(BOUNDARY_LIMIT) {
        return Err(Error::NotConverged {
            amplitude: edge.to_f64().unwrap_or(f64::NAN),
            limit: BOUNDARY_LIMIT,
        });
    }
    Ok(sol)
}

/// As [`solve`] but without the boundary-amplitude check.
pub fn solve_unchecked<T: Real>(k_in: T, n_modes: usize, p: &Params<T>) -> Result<Solution<T>> {
    check_momentum(k_in)?;
    if n_modes < 5 || n_modes.is_multiple_of(2) {
        return Err(Error::InvalidParam {
            field: "n_modes",
            reason: format!("must be odd and at least 5, got {n_modes}"),
        });
    }
    let half = (n_modes / 2) as i32;
    let e_f = dispersion(k_in, p);
    let mut m = BandMatrix::zeros(n_modes, 2, 2);
    let mut rhs = vec![Complex::zero(); n_modes];
    for i in 0..n_modes {
        let n = i as i32 - half;
        let row = recursion_coefficients(n, e_f, p);
        let cols = [(-2, row.a), (-1, row.b), (0, row.c), (1, row.d), (2, row.e)];
        for (off, v) in cols {
            let j = i as i32 + off;
            if (0..n_modes as i32).contains(&j) {
                m.set(i, j as usize, v);
            }
        }
    }
    let speed_in = k_in.sin();
    rhs[half as usize] = Complex::i() * (T::lit(2.0) * p.h) * channel_momentum(e_f, 0, p).k.sin();
    m.solve(&mut rhs)?;

    let tau_at = |i: i32| {
        if (0..n_modes as i32).contains(&i) {
            rhs[i as usize]
        } else {
            Complex::zero()
        }
    };
    let half_g1 = p.g1 / T::lit(2.0);
    let channels: Vec<Channel<T>> = (0..n_modes as i32)
        .map(|i| {
            let n = i - half;
            let momentum = channel_momentum(e_f, n, p);
            let tau = tau_at(i);
            let r = if n == 0 { tau - T::one() } else { tau };
            let den = Complex::new(p.eps_d - e_f - T::from(n).unwrap() * p.omega, -p.eta);
            let dot = (tau * p.g0 + (tau_at(i - 1) + tau_at(i + 1)) * half_g1) / den;
            Channel {
                momentum,
                tau,
                r,
                dot,
                weight: momentum.speed() / speed_in,
            }
        })
        .collect();
    let t_total = channels.iter().fold(T::zero(), |s, c| s + c.weight * c.tau.norm_sqr());
    let t_elastic = channels[half as usize].tau.norm_sqr();
    Ok(Solution {
        k_in,
        e_f,
        n_modes,
        channels,
        t_total,
        t_elastic,
    })
}

/// One line of a truncation study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow<T> {
    pub n_modes: usize,
    pub t_total: T,
    /// Change of `t_total` from the previous row (`None` for the first).
    pub delta: Option<T>,
    /// Largest change of any shared `tau_n` from the previous row.
    pub max_tau_change: Option<T>,
}

/// Total transmission at increasing truncations.
pub fn convergence_report<T: Real>(k_in: T, modes: &[usize], p: &Params<T>) -> Result<Vec<ConvergenceRow<T>>> {
    let mut rows: Vec<ConvergenceRow<T>> = Vec::with_capacity(modes.len());
    let mut prev: Option<Solution<T>> = None;
    for &n in modes {
        let sol = solve_unchecked(k_in, n, p)?;
        let (delta, max_tau_change) = match &prev {
            Some(q) => {
                let change = q.channels.iter().fold(T::zero(), |m, c| {
                    let other = sol.channel(c.momentum.n).map_or(Complex::zero(), |o| o.tau);
                    m.max((other - c.tau).norm())
                });
                (Some((sol.t_total - q.t_total).abs()), Some(change))
            }
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n_modes: n,
            t_total: sol.t_total,
            delta,
            max_tau_change,
        });
        prev = Some(sol);
    }
    Ok(rows)
}

/// Smallest total transmission on `[lo, hi]`: a scan of `points` momenta
/// followed by golden-section refinement around the best one. Dips can be a
/// few 1e-4 wide in `k`, so keep the scan step below that.
pub fn transmission_minimum<T: Real>(lo: T, hi: T, points: usize, n_modes: usize, p: &Params<T>) -> Result<(T, T)> {
    let points = points.max(3);
    let step = (hi - lo) / T::from(points - 1).unwrap();
    let at = |k: T| solve(k, n_modes, p).map(|s| s.t_total);
    let mut best = (lo, at(lo)?);
    for i in 1..points {
        let k = lo + step * T::from(i).unwrap();
        let t = at(k)?;
        if t < best.1 {
            best = (k, t);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let ratio = T::lit(0.5 * (5f64.sqrt() - 1.0));
    let mut c = b - (b - a) * ratio;
    let mut d = a + (b - a) * ratio;
    let (mut fc, mut fd) = (at(c)?, at(d)?);
    while b - a > T::lit(1e-9) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * ratio;
            fc = at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * ratio;
            fd = at(d)?;
        }
    }
    let k = T::lit(0.5) * (a + b);
    let t = at(k)?;
    Ok(if t < best.1 { (k, t) } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{static_scattering, DEFAULT_ETA};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn fig4() -> Params<f64> {
        Params::new(0.5, -1.0, 0.5, 0.25, 1.0, DEFAULT_ETA).unwrap()
    }

    #[test]
    fn band_centre_channel() {
        let c = channel_momentum(0.0, 0, &fig4());
        assert!(c.open);
        assert_abs_diff_eq!(c.k.re, FRAC_PI_2, epsilon = 1e-10);
    }

    #[test]
    fn band_edge_channel_has_no_speed() {
        let c = channel_momentum(0.0, 1, &fig4());
        assert!(c.open);
        assert_abs_diff_eq!(c.k.re.abs(), PI, epsilon = 1e-5);
        assert!(c.speed() < 1e-5);
    }

    #[test]
    fn closed_channel_decays() {
        let p = fig4();
        let c = channel_momentum(0.0, 2, &p);
        assert!(!c.open);
        assert!(c.k.im > 0.0);
        let z = -(Complex::new(2.0, p.eta)) / (2.0 * p.h);
        assert!((c.k.cos() - z).norm() < 1e-12);
    }

    #[test]
    fn undriven_rows_are_diagonal() {
        let p = Params::undriven(0.5, -1.0, 0.5).unwrap();
        let r = recursion_coefficients(1, -0.3, &p);
        for v in [r.a, r.b, r.d, r.e] {
            assert_eq!(v, Complex::zero());
        }
        assert!(r.c.norm() > 0.0);
    }

    #[test]
    fn coefficient_mirror_symmetry() {
        // a_n and e_{-n} coincide once n -> -n and omega -> -omega.
        let p = fig4();
        let mut q = p;
        q.omega = -p.omega;
        let e_f = -0.3;
        let lhs = recursion_coefficients(1, e_f, &p);
        let rhs = recursion_coefficients(-1, e_f, &q);
        assert!((lhs.a - rhs.e).norm() < 1e-14);
        assert!((lhs.b - rhs.d).norm() < 1e-14);
    }

    #[test]
    fn static_reduction() {
        let p = Params::undriven(0.5, -1.0, 0.5).unwrap();
        for k in [0.3, 1.0, 2.2] {
            let sol = solve(k, DEFAULT_MODES, &p).unwrap();
            let st = static_scattering(k, 0.5, &p).unwrap();
            assert!((sol.channel(0).unwrap().tau - st.tau).norm() < 1e-10);
            for c in &sol.channels {
                if c.momentum.n != 0 {
                    assert_eq!(c.tau, Complex::zero());
                }
            }
        }
    }

    #[test]
    fn fano_dip_near_first_resonance() {
        let p = fig4();
        let t = (0..41)
            .map(|i| 1.24 + 0.001 * i as f64)
            .map(|k| solve(k, DEFAULT_MODES, &p).unwrap().t_total)
            .fold(f64::INFINITY, f64::min);
        assert!(t < 0.05, "minimum {t}");
    }

    #[test]
    fn unitarity_at_fig4() {
        let p = fig4();
        for k in [0.2, 0.9, 1.26, 1.9, 2.34, 2.9] {
            let s = solve(k, DEFAULT_MODES, &p).unwrap();
            assert_abs_diff_eq!(s.unitarity_sum(), 1.0, epsilon = 1e-5);
        }
    }

    #[test]
    fn dot_amplitude_satisfies_site_zero_equation() {
        // Continuity at x = 0 makes the reflected and transmitted waves
        // share site 0, and the dot eliminates to the recursion.
        let p = fig4();
        let s = solve(1.1, DEFAULT_MODES, &p).unwrap();
        let c0 = s.channel(0).unwrap();
        assert!(c0.dot.norm() > 0.0);
        assert!((c0.r + 1.0 - c0.tau).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_truncation() {
        let p = fig4();
        assert!(solve(1.0, 4, &p).is_err());
        assert!(solve(1.0, 3, &p).is_err());
    }

    #[test]
    fn single_precision_static_limit() {
        let p = Params::<f32>::undriven(0.5, -1.0, 0.5).unwrap();
        let s = solve(1.0f32, 11, &p).unwrap();
        let st = static_scattering(1.0f32, 0.5, &p).unwrap();
        assert!((s.t_total - st.transmission()).abs() < 1e-5);
    }
}
