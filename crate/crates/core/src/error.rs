use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape error: {0}")]
    Shape(String),

    /// A Gram sum produced a squared norm that is negative beyond round-off.
    #[error("numerical inconsistency: squared norm {0:e} is negative")]
    NegativeNorm(f64),

    #[error("cannot normalize a state with norm {0:e}")]
    ZeroState(f64),

    #[error("hadamard on mode {mode}: amplitude {amplitude} is not ±{alpha_ref}")]
    GateDomain {
        mode: usize,
        amplitude: String,
        alpha_ref: f64,
    },

    #[error("vacuum selection on mode {mode} has vanishing probability {prob:e}")]
    ZeroProbability { mode: usize, prob: f64 },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("truncation error: lost norm {lost:e} exceeds {limit:e}")]
    Truncation { lost: f64, limit: f64 },

    #[error("number-basis tensor limited to {cap} modes, got {requested}")]
    ModeCap { cap: usize, requested: usize },
}
