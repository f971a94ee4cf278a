use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(
        "quadrature did not converge: value {value:.6e}, error estimate {error_estimate:.3e} \
         after {evaluations} evaluations"
    )]
    NonConvergence {
        value: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("integrand produced a non-finite value at x = {at}")]
    NonFiniteEvaluation { at: f64 },

    #[error("semi-infinite integrand decays too slowly (panel contributions stopped shrinking)")]
    SlowDecay,

    #[error("nested quadrature exceeded its budget of {ceiling} integrand evaluations")]
    PerformanceBudgetExceeded { ceiling: u64 },

    #[error("{function}: argument {value} outside the domain")]
    Domain { function: &'static str, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("base-station field is empty")]
    EmptyField,

    #[error("window side {side} m is smaller than the required {required} m")]
    WindowTooSmall { side: f64, required: f64 },

    #[error("association table still incomplete after {attempts} candidate UEs")]
    AttemptBudgetExhausted { attempts: u64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
