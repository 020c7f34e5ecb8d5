//! Unitary perturbative decompositions of quantum evolution operators.
//!
//! The propagator of `H(λ; t) = H₀ + Σ λⁿ Hₙ(t)` is written as
//! `U = U₀(t) e^{-iZ(λ;t)} e^{-i∫₀ᵗC} e^{iZ(λ;0)}` with Hermitian generators,
//! so every truncation of the generator series is exactly unitary.
//!
//! - [`linalg`]: dense operators, Hermitian exponentials, clustered spectra.
//! - [`trigpoly`], [`secular`]: operator-valued trigonometric polynomials.
//! - [`expansion_ti`]: time-independent perturbations.
//! - [`expansion_td`]: time-dependent (trigonometric) perturbations.
//! - [`models`]: the trapped-ion family.
//! - [`oracle`]: reference integrator, Dyson and Magnus truncations, fits.

pub mod error;
pub mod expansion_td;
pub mod expansion_ti;
pub mod linalg;
pub mod models;
pub mod nested;
pub mod oracle;
pub mod secular;
pub mod trigpoly;

pub use error::{Error, Result};
pub use linalg::{Operator, Spectrum, C64};
pub use secular::SecularPoly;
pub use trigpoly::{Frequency, FrequencyBasis, TrigPoly};
