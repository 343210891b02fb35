#![allow(clippy::needless_range_loop)] // index-heavy numeric kernels read better with explicit indices

//! Two driven auto-ionization systems coupled by the dipole-dipole
//! interaction.
//!
//! Each system ("atom" `a` and `b`) has a ground state, one auto-ionizing
//! bound state and a flat continuum; both are pumped by the same stationary
//! optical field. The dipole-dipole interaction exchanges energy between the
//! atoms through three channels: bound-bound (`J_ab`) and two bound-continuum
//! channels (`J_a`, `J_b`). Because the continua are flat the coupled
//! equations of motion close under a resolvent pole expansion, and the crate
//! evaluates that closed form directly:
//!
//! - time-domain amplitudes of the discrete, singly- and doubly-ionized
//!   sectors ([`dynamics`]),
//! - the long-time joint photoelectron amplitude and its analytic norm,
//! - gridded joint/marginal spectra, moments and covariance ([`spectra`]),
//! - quadratic negativity of the two-electron continuum state through
//!   several independent routes, plus energy-filtered variants
//!   ([`entanglement`]),
//! - independent ground truth: the exactly factorizing uncoupled solution and
//!   a direct pseudo-continuum propagation of the full Hamiltonian
//!   ([`oracle`]),
//! - the dressed-state (Fano-diagonalized) picture with the balance condition
//!   for the two dipole-dipole channels ([`fano`]).
//!
//! All energies are in units with `ħ = 1`; the rotating frame of the pump
//! frequency `E_L` is used throughout.

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod fano;
pub mod linalg;
pub mod matrices;
pub mod oracle;
pub mod params;
pub mod presets;
pub mod smallmat;
pub mod spectra;
pub mod util;

pub use error::Error;

/// Complex double-precision scalar used everywhere in the crate.
pub type C64 = num_complex::Complex64;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
