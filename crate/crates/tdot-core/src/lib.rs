//! Transmission spectra of a quantum dot side-coupled to a tight-binding chain
//! whose dot-lead coupling is driven periodically, `g(t) = g0 + g1 cos(wt)`.
//!
//! Four independent routes to the same observable are provided:
//!
//! * [`model`]: the static problem in closed form, plus bound states.
//! * [`floquet`]: exact multi-channel Floquet scattering up to sideband truncation.
//! * [`gpp`]: second-order adiabatic perturbation theory in the instantaneous
//!   eigenbasis ([`basis`]), with resummed level shifts, and the resonance
//!   locator built on it ([`resonance`]).
//! * [`oracle`]: brute-force wavepacket propagation on a finite chain.
//!
//! The closed-form model, the banded solver and the Floquet engine are generic
//! over the real scalar type. The perturbative machinery works in `f64` only
//! because its tolerances sit far below single precision.

pub mod basis;
pub mod error;
pub mod floquet;
pub mod gpp;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod resonance;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst};

pub use error::{Error, Result};

/// Real scalar usable by the generic parts of the crate.
pub trait Real: Float + FloatConst + Debug + Display + Send + Sync + 'static {
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from(x).expect("literal representable in scalar type")
    }
}

impl<T> Real for T where T: Float + FloatConst + Debug + Display + Send + Sync + 'static {}

/// Complex number over `T`.
pub type Complex<T> = num_complex::Complex<T>;
/// Double-precision complex number.
pub type C64 = num_complex::Complex64;

/// Model parameters in double precision.
pub type ModelParams = model::Params<f64>;
/// Static scattering amplitudes in double precision.
pub type StaticScattering = model::StaticScattering<f64>;
/// Floquet solution in double precision.
pub type FloquetSolution = floquet::Solution<f64>;
/// Floquet channel momentum in double precision.
pub type ChannelMomentum = floquet::ChannelMomentum<f64>;
