use thiserror::Error;

/// Errors raised by the coefficient, dynamics, entanglement and analysis layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// An argument of `f2` fell below the divergence guard.
    #[error("degenerate geometry: f2 argument {argument:e} is below the guard {x_min:e}")]
    DegenerateGeometry { argument: f64, x_min: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid integration window: {0}")]
    InvalidWindow(String),

    #[error("integration diverged at tau = {tau}: |{field}| = {value:e} exceeds 10")]
    IntegrationDiverged {
        tau: f64,
        field: &'static str,
        value: f64,
    },

    #[error("trace drifted to {trace:.15} at tau = {tau}")]
    TraceDrift { tau: f64, trace: f64 },

    #[error("non-physical state: {which} radicand {radicand:e} is below tolerance")]
    NonPhysicalState { which: &'static str, radicand: f64 },

    #[error("oracle evolution lost trace: |tr - 1| = {drift:e}")]
    OracleDivergence { drift: f64 },

    #[error("window too short: concurrence {concurrence:e} still non-decreasing at tau = {t_max}")]
    WindowTooShort { t_max: f64, concurrence: f64 },

    #[error("invalid threshold {0}: must be positive and finite")]
    InvalidThreshold(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
