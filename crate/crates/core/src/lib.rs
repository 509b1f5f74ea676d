//! Fluctuation dynamics of the resonance fluorescence of a driven three-level
//! lambda atom near coherent population trapping.
//!
//! The crate is organised around the nine optical Bloch equations of the
//! system, written as a linear flow `ds/dt = M s` over a fixed operator basis:
//!
//! - [`model`] builds the generator `M` and solves for the steady state,
//!   dark state and saturation parameters.
//! - [`regression`] constructs equal-time fluctuation moments and propagates
//!   them in the delay `tau` with the one-step matrix exponential.
//! - [`chd`] assembles the conditional-homodyne amplitude-intensity
//!   correlation `h_phi(tau)` on both time branches, its second-/third-order
//!   split, and classifies violations of the classical bounds.
//! - [`spectra`] evaluates all frequency-domain quantities as resolvent
//!   solves: the incoherent emission spectrum, the conditional-homodyne
//!   quadrature spectra, the squeezing spectrum and the variance.
//! - [`oracle`] holds the slow, independent validators (fixed-step RK4 master
//!   equation integration, direct operator algebra, quadrature transforms)
//!   used by the test suite and the `validate` command.
//!
//! All rates and frequencies are in units of the probe decay rate `gamma_a`
//! unless stated otherwise; times are in units of `1/gamma_a`.

pub mod chd;
pub mod error;
pub mod model;
pub mod oracle;
pub mod regression;
pub mod spectra;

use nalgebra::{Complex, SMatrix, SVector};

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Dense complex matrix in the nine-operator basis.
pub type Mat9 = SMatrix<C64, 9, 9>;
/// Complex vector in the nine-operator basis.
pub type Vec9 = SVector<C64, 9>;
/// Dense complex matrix over the atomic states `{|e>, |a>, |b>}`.
pub type Mat3 = SMatrix<C64, 3, 3>;
/// Complex state vector over `{|e>, |a>, |b>}`.
pub type Vec3 = SVector<C64, 3>;

pub use chd::{ChdSignal, QuadraturePhase, ViolationReport};
pub use error::Error;
pub use model::{BlochGenerator, LambdaParams, Level, OperatorIndex, SteadyState, Transition};
pub use regression::{CorrelationTrace, InitialConditionKind, TauGrid};
pub use spectra::{Branch, Efficiency, Spectrum, SpectrumKind};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
