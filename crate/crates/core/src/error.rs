//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("unknown kinetics pack `{0}`")]
    KineticsNotFound(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The constant mode `sigma = 0` carries no spatial structure and is
    /// excluded from every bifurcation scan.
    #[error("zero mode excluded: {0}")]
    ZeroModeExcluded(String),

    /// Arrival-variant analysis requires `eta(Abar) > eta'(Abar)*Bbar`.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("no mode has a positive bifurcation value")]
    NoPositiveBifurcation,

    /// The projection denominator of the first-order corrector vanished.
    #[error("degenerate projection: {0}")]
    DegenerateProjection(String),

    /// The first-order integral system is singular at this mode.
    #[error("resonant second-order coefficient: {0}")]
    ResonantK2(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical blowup at t = {t}, dt = {dt}")]
    NumericalBlowup { t: f64, dt: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
