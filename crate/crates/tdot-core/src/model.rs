//! Static model: dispersion, driven coupling, closed-form scattering and bound
//! states of the frozen Hamiltonian.
//!
//! Sites `x` of the infinite chain carry hopping `-h`; the dot has on-site
//! energy `eps_d` and couples to site 0 with matrix element `-g`.

use nalgebra::Matrix4;

use crate::{Complex, Error, Real, Result, C64};

/// Guard below which `sin k` is treated as a band edge.
pub const BAND_EDGE_GUARD: f64 = 1e-9;

/// Default convergence regulator. Small enough that the velocity-weighted
/// current sum of the Floquet solution is unaffected at the 1e-5 level.
pub const DEFAULT_ETA: f64 = 1e-12;

/// Physical parameters of the driven T-coupled dot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params<T> {
    /// Chain hopping amplitude.
    pub h: T,
    /// Dot on-site energy.
    pub eps_d: T,
    /// Static part of the dot-lead coupling.
    pub g0: T,
    /// Driving amplitude of the coupling.
    pub g1: T,
    /// Driving angular frequency.
    pub omega: T,
    /// Positive convergence regulator (`i0` prescription).
    pub eta: T,
}

impl<T: Real> Params<T> {
    /// Builds and validates a parameter set.
    pub fn new(h: T, eps_d: T, g0: T, g1: T, omega: T, eta: T) -> Result<Self> {
        let p = Self {
            h,
            eps_d,
            g0,
            g1,
            omega,
            eta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Undriven parameters (`g1 = 0`, `omega = 1`, default regulator).
    pub fn undriven(h: T, eps_d: T, g0: T) -> Result<Self> {
        Self::new(h, eps_d, g0, T::zero(), T::one(), T::lit(DEFAULT_ETA))
    }

    /// Checks every invariant; `g0 = g1 = 0` is accepted as the decoupled dot.
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Err(Error::InvalidParam { field, reason });
        let fields = [
            ("h", self.h),
            ("eps_d", self.eps_d),
            ("g0", self.g0),
            ("g1", self.g1),
            ("omega", self.omega),
            ("eta", self.eta),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return bad(name, format!("{v} is not finite"));
            }
        }
        if self.h <= T::zero() {
            return bad("h", format!("must be positive, got {}", self.h));
        }
        if self.omega <= T::zero() {
            return bad("omega", format!("must be positive, got {}", self.omega));
        }
        if self.eta <= T::zero() {
            return bad("eta", format!("must be positive, got {}", self.eta));
        }
        if self.eta > self.omega / T::lit(100.0) {
            return bad("eta", format!("must not exceed omega/100, got {}", self.eta));
        }
        if self.g1 < T::zero() {
            return bad("g1", format!("must be non-negative, got {}", self.g1));
        }
        let decoupled = self.g0 == T::zero() && self.g1 == T::zero();
        if !decoupled && self.g0 <= self.g1 {
            return bad(
                "g0",
                format!("must exceed g1 so that g(t) > 0 (g0 = {}, g1 = {})", self.g0, self.g1),
            );
        }
        Ok(())
    }

    /// Driving period `2 pi / omega`.
    pub fn period(&self) -> T {
        T::TAU() / self.omega
    }
}

/// Tight-binding dispersion `-2h cos k`.
pub fn dispersion<T: Real>(k: T, p: &Params<T>) -> T {
    -(T::lit(2.0) * p.h * k.cos())
}

/// Coupling `g(t)` and its time derivative.
pub fn coupling_at<T: Real>(t: T, p: &Params<T>) -> (T, T) {
    let wt = p.omega * t;
    (p.g0 + p.g1 * wt.cos(), -(p.g1 * p.omega * wt.sin()))
}

/// Fails unless `0 < k < pi` with `sin k` away from zero.
pub fn check_momentum<T: Real>(k: T) -> Result<()> {
    let s = k.sin();
    if !(k > T::zero() && k < T::PI()) || s.abs() <= T::lit(BAND_EDGE_GUARD) {
        return Err(Error::BandEdge {
            k: k.to_f64().unwrap_or(f64::NAN),
            sin_k: s.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Closed-form scattering of a plane wave off the static dot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticScattering<T> {
    pub k: T,
    /// Reflection kernel `b_k`.
    pub b: Complex<T>,
    /// Transmission amplitude `1 + b`.
    pub tau: Complex<T>,
    /// Reflection amplitude `b`.
    pub r: Complex<T>,
}

impl<T: Real> StaticScattering<T> {
    /// Transmission probability.
    pub fn transmission(&self) -> T {
        self.tau.norm_sqr()
    }
}

/// Reflection kernel `b_k = -g^2 / (g^2 + 2ih (eps_d - eps_k) sin k)` without
/// any momentum check; `k` may be complex.
pub fn reflection_kernel<T: Real>(k: Complex<T>, g: T, p: &Params<T>) -> Complex<T> {
    let two = T::lit(2.0);
    let eps_k = -(k.cos() * (two * p.h));
    let g2 = Complex::from(g * g);
    let den = g2 + Complex::i() * (two * p.h) * (Complex::from(p.eps_d) - eps_k) * k.sin();
    -(g2 / den)
}

/// Static scattering amplitudes at coupling `g`.
pub fn static_scattering<T: Real>(k: T, g: T, p: &Params<T>) -> Result<StaticScattering<T>> {
    check_momentum(k)?;
    let b = reflection_kernel(Complex::from(k), g, p);
    Ok(StaticScattering {
        k,
        b,
        tau: b + T::one(),
        r: b,
    })
}

/// A bound state of the frozen Hamiltonian, `psi(x) = psi(0) z^|x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    /// Real root of the bound-state quartic with `|z| < 1`.
    pub z: f64,
    /// Decay rate `-ln|z|`.
    pub q: f64,
    /// Energy, outside the band.
    pub energy: f64,
}

/// The two bound states at a given coupling, ordered by energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundStateSet {
    pub coupling_value: f64,
    pub states: [BoundState; 2],
}

/// Coefficients of `h^2 z^4 + h eps_d z^3 + g^2 z^2 - h eps_d z - h^2`, highest first.
pub fn quartic_coefficients(g: f64, p: &Params<f64>) -> [f64; 5] {
    let h = p.h;
    [h * h, h * p.eps_d, g * g, -h * p.eps_d, -h * h]
}

fn horner(c: &[f64; 5], z: C64) -> (C64, C64) {
    let mut v = C64::new(c[0], 0.0);
    let mut d = C64::new(0.0, 0.0);
    for &ci in &c[1..] {
        d = d * z + v;
        v = v * z + ci;
    }
    (v, d)
}

/// Residual of the bound-state quartic at `z`.
pub fn quartic_residual(z: C64, g: f64, p: &Params<f64>) -> f64 {
    horner(&quartic_coefficients(g, p), z).0.norm()
}

/// All four roots of the bound-state quartic (companion-matrix eigenvalues
/// polished by two Newton steps).
pub fn quartic_roots(g: f64, p: &Params<f64>) -> [C64; 4] {
    let c = quartic_coefficients(g, p);
    let a: Vec<f64> = c[1..].iter().map(|ci| ci / c[0]).collect();
    let companion = Matrix4::new(
        -a[0], -a[1], -a[2], -a[3], //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0,
    );
    let eig = companion.complex_eigenvalues();
    let mut roots = [C64::new(0.0, 0.0); 4];
    for (slot, z0) in roots.iter_mut().zip(eig.iter()) {
        let mut z = *z0;
        for _ in 0..2 {
            let (v, d) = horner(&c, z);
            if d.norm() > 0.0 {
                z -= v / d;
            }
        }
        *slot = z;
    }
    roots
}

/// Bound states of the frozen Hamiltonian at coupling `g`.
///
/// A root is physical when it is real with `|z| < 1`; positive roots give
/// `E = -2h cosh q`, negative ones `E = 2h cosh q`.
pub fn bound_states(g: f64, p: &Params<f64>) -> Result<BoundStateSet> {
    if !(g > 0.0) {
        return Err(Error::InvalidParam {
            field: "g",
            reason: format!("bound states need a positive coupling, got {g}"),
        });
    }
    let mut found: Vec<BoundState> = quartic_roots(g, p)
        .iter()
        .filter(|z| z.im.abs() < 1e-8 * z.norm().max(1.0) && z.re.abs() < 1.0 && z.re != 0.0)
        .map(|z| {
            let q = -z.re.abs().ln();
            let e = 2.0 * p.h * q.cosh();
            BoundState {
                z: z.re,
                q,
                energy: if z.re > 0.0 { -e } else { e },
            }
        })
        .collect();
    if found.len() != 2 {
        return Err(Error::BoundStateCount { g, found: found.len() });
    }
    found.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(BoundStateSet {
        coupling_value: g,
        states: [found[0], found[1]],
    })
}
