//! Input-output theory of a spin-ensemble maser amplifier and microwave cooler.
//!
//! The crate covers the full forward model (reflection, gain, noise
//! coefficients and output-noise spectra for both the amplifying and the
//! absorbing branch), the receiver-chain de-embedding used to turn measured
//! noise ratios into device noise temperatures, spin thermometry, coupling
//! strengths from mode-field maps, and the least-squares fits used to extract
//! model parameters from measured traces.
//!
//! All frequencies and rates are carried internally in rad/s.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod coupling;
pub mod error;
pub mod faddeeva;
pub mod fitting;
pub mod quadrature;
pub mod quantities;
pub mod response;
pub mod spectrum;
pub mod thermo;

pub use error::{Error, Result};
pub use quantities::{AngularFrequency, Rate, Temperature};
pub use response::{BathOccupations, Branch, NoiseCoefficients, ResonatorParams};
pub use spectrum::{SpinEnsemble, SpinProfile};
