use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} must be non-negative, got {value}")]
    NegativeInput { name: &'static str, value: f64 },

    #[error("{name} must be finite and positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },

    #[error("odd cat state with zero amplitude is the zero vector")]
    DegenerateCat,

    #[error("state has no terms")]
    EmptyState,

    #[error("state trace {0} is not positive")]
    NonPositiveTrace(f64),

    #[error("post-selection left a state with zero trace")]
    ZeroHeraldProbability,

    #[error("mode index {mode} out of range for {n_modes}-mode state")]
    UnknownMode { mode: usize, n_modes: usize },

    #[error("expected a {expected}-mode state, got {found} modes")]
    ModeCount { expected: usize, found: usize },

    #[error("mode {0} is coupled by more than one channel")]
    DuplicateCoupling(usize),

    #[error("slice count must be at least 1")]
    NoSlices,

    #[error("G(tau) has a pole at tau = {tau} (Gamma*tau = 2*pi*k, cat size vanishes)")]
    Pole { tau: f64, big_gamma: f64 },

    #[error("no interaction time below the first pole tau = {pole} reaches the target")]
    NoSolution { pole: f64 },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("Fock cutoff {cutoff} too small for mode {mode}: {detail}")]
    CutoffInadequate {
        mode: usize,
        cutoff: usize,
        detail: String,
    },

    #[error("qubit block {0} has vanishing weight")]
    VanishingBlock(&'static str),

    #[error("integration did not meet the trace-drift criterion after {0} step halvings")]
    StepHalvingExhausted(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn non_negative<T: crate::Real>(name: &'static str, value: T) -> Result<()> {
    if value.is_nan() || value < T::zero() {
        Err(Error::NegativeInput {
            name,
            value: value.as_f64(),
        })
    } else {
        Ok(())
    }
}

pub(crate) fn positive<T: crate::Real>(name: &'static str, value: T) -> Result<()> {
    if !value.is_finite() || value <= T::zero() {
        Err(Error::NonPositiveInput {
            name,
            value: value.as_f64(),
        })
    } else {
        Ok(())
    }
}
