use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SgiError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// `D - p·μ|B∥|` vanished or changed sign: the field is outside the weak-field regime.
    #[error("degenerate denominator D - p*mu*|B_par| = {value:e} J for p = {p}")]
    DegenerateDenominator { p: i8, value: f64 },

    #[error("time step {dt:e} s exceeds the limit {limit:e} s")]
    StepSize { dt: f64, limit: f64 },

    #[error("state became non-finite at t = {t:e} s")]
    NonFinite { t: f64 },

    /// The quadratic bias ramp drove the bias field to zero.
    #[error("bias ramp reached zero field at t = {t:e} s")]
    BiasExhausted { t: f64 },

    #[error("wavepacket width collapsed to {sigma:e} (initial {sigma0:e}) at t = {t:e} s")]
    WidthCollapse { sigma: f64, sigma0: f64, t: f64 },

    #[error("angular width {sigma:e} rad too large for the Gaussian overlap (limit 0.3 rad)")]
    WavepacketTooWide { sigma: f64 },

    #[error("sequence arms have {arm1} and {arm2} pulses; both must match the pulse durations")]
    UnbalancedArms { arm1: usize, arm2: usize },
}

pub type Result<T> = std::result::Result<T, SgiError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> SgiError {
    SgiError::InvalidParameter { name, reason: reason.into() }
}
