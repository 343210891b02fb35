//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A Fano-style field was requested whose defining denominator coupling
    /// is exactly zero (e.g. `q_a` with `V_a = 0`).
    #[error("division by zero coupling while deriving `{field}`")]
    DivisionByZeroCoupling { field: &'static str },

    /// The requested combination of Fano-style parameters cannot be realized
    /// by any physical raw parameter set under the fixed phase conventions.
    #[error("infeasible parameter combination: {0}")]
    InfeasibleParams(String),

    /// Two eigenvalues coincide where a spectral-projector formula or an
    /// analytic-norm denominator needs them distinct.
    #[error("degenerate eigenvalues: {0}")]
    DegenerateEigenvalues(String),

    /// The effective 4x4 matrix is numerically defective: its eigenvector
    /// basis is too ill-conditioned to trust. A tiny symmetric detuning
    /// (~1e-9) usually lifts the degeneracy.
    #[error("near-defective matrix (eigenvector condition estimate {cond:.3e})")]
    NearDefectiveMatrix { cond: f64 },

    /// An iterative eigenvalue computation failed to converge.
    #[error("eigenvalue iteration failed to converge: {0}")]
    NoConvergence(&'static str),

    /// A spectrum or state that must be unit-normalized is not.
    #[error("state not normalized (norm = {norm:.6e})")]
    NotNormalized { norm: f64 },

    /// Boundary intensity of a sampled spectrum is too large relative to its
    /// peak: the grid truncates the tails.
    #[error("grid too narrow: boundary/peak intensity ratio {ratio:.3e} exceeds {limit:.1e}")]
    GridTooNarrow { ratio: f64, limit: f64 },

    /// A brute-force quadrature was requested on a grid too large for its
    /// O(G^4) cost.
    #[error("grid too large for brute-force quadrature: {points} points (max {max})")]
    GridTooLarge { points: usize, max: usize },

    /// An energy filter window carries no spectral weight.
    #[error("empty filter window (windowed norm = {norm:.3e})")]
    EmptyWindow { norm: f64 },

    /// A second spectral moment vanished where a covariance denominator
    /// needs it positive.
    #[error("vanishing second moment")]
    ZeroSecondMoment,

    /// A factorization oracle was asked to run on a model whose dipole-dipole
    /// couplings are not all zero.
    #[error("dipole-dipole coupling is nonzero: {0}")]
    NonzeroCoupling(String),

    /// A propagation step lost more norm than the unitary integrator allows.
    #[error("propagation step too large: single-step norm drift {drift:.3e}")]
    StepTooLarge { drift: f64 },

    /// Propagation beyond the pseudo-continuum recurrence time was requested.
    #[error("requested time {requested:.3} exceeds the recurrence bound {bound:.3}")]
    RecurrenceExceeded { requested: f64, bound: f64 },

    /// Balance solving needs a nonzero bound-state dipole moment.
    #[error("zero dipole moment {0}")]
    ZeroDipole(&'static str),

    /// A parameter file or parameter string could not be parsed.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An energy grid specification is not usable.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// No figure preset with the given identifier exists.
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    /// A sweep referenced a parameter name that cannot be resolved.
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}
