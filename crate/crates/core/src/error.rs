use thiserror::Error;

/// Errors raised by the solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum AlgaeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coverage violation at (s={state}, a={action}): target mass {target_mass:e} with zero data mass")]
    Support {
        state: usize,
        action: usize,
        target_mass: f64,
    },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e} ({context})")]
    Residual {
        context: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("induced chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("normal matrix is ill-conditioned (min eigenvalue {min_eigenvalue:e})")]
    Conditioning { min_eigenvalue: f64 },

    #[error("inner solver did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl AlgaeError {
    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            AlgaeError::Singular(_)
                | AlgaeError::Residual { .. }
                | AlgaeError::NotErgodic(_)
                | AlgaeError::Conditioning { .. }
                | AlgaeError::NonConvergence { .. }
                | AlgaeError::Numerical(_)
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            AlgaeError::InvalidInput(_) => "invalid_input",
            AlgaeError::Config(_) => "config",
            AlgaeError::Domain(_) => "domain",
            AlgaeError::Support { .. } => "support",
            AlgaeError::Singular(_) => "singular",
            AlgaeError::Residual { .. } => "residual",
            AlgaeError::NotErgodic(_) => "not_ergodic",
            AlgaeError::Conditioning { .. } => "conditioning",
            AlgaeError::NonConvergence { .. } => "non_convergence",
            AlgaeError::Numerical(_) => "numerical",
            AlgaeError::Parse(_) => "parse",
            AlgaeError::Io(_) => "io",
            AlgaeError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, AlgaeError>;
