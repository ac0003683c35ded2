//! Error taxonomy shared by every module.
//!
//! The variants map one-to-one onto the CLI exit codes: configuration
//! problems (2), model/domain problems (3), quadrature accuracy failures (4)
//! and simulation blow-ups (5).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// A structurally invalid input: bad parameter ranges, too many
    /// mixture terms, odd Hermite orders, and the like.
    #[error("configuration: {0}")]
    Config(String),

    /// The request is well formed but the model does not support it
    /// (e.g. moment bounds for a generator with no solution theory).
    #[error("model: {0}")]
    Domain(String),

    /// A quadrature or extrapolation failed to reach the requested
    /// tolerance; carries the best error estimate achieved.
    #[error("accuracy: {context}: requested {requested:.3e}, achieved {achieved:.3e}")]
    Accuracy {
        context: String,
        requested: f64,
        achieved: f64,
    },

    /// A custom symbol evaluator returned an invalid value.
    #[error("symbol evaluation at xi={xi}: {reason}")]
    SymbolEval { xi: f64, reason: String },

    /// Recurrence / local-time classification could not be decided.
    #[error("classification indeterminate: {0}")]
    Indeterminate(String),

    /// A deterministic mesh scheme went unstable at the configured step.
    #[error("step size: {0}")]
    StepSize(String),

    /// The inversion grid cannot resolve the requested density.
    #[error("resolution: {0}")]
    Resolution(String),

    /// A simulated path produced a non-finite value.
    #[error("blow-up at step {step} (path {path}): {detail}")]
    BlowUp {
        step: usize,
        path: u64,
        detail: String,
    },
}

impl CoreError {
    pub fn config(msg: impl Into<String>) -> Self {
        CoreError::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }

    /// Exit code the CLI maps this error onto.
    pub fn exit_code(&self) -> i32 {
        match self {
            CoreError::Config(_) => 2,
            CoreError::Domain(_)
            | CoreError::SymbolEval { .. }
            | CoreError::Indeterminate(_)
            | CoreError::Resolution(_) => 3,
            CoreError::Accuracy { .. } | CoreError::StepSize(_) => 4,
            CoreError::BlowUp { .. } => 5,
        }
    }
}
