use thiserror::Error;

/// Errors produced by the simulation, optimization and budgeting layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("model flag `{flag}` requires a {axis}-axis Fock ladder on every atom")]
    FlagSpaceMismatch {
        flag: &'static str,
        axis: &'static str,
    },

    #[error("state vector has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "integrator step size underflow at t = {t:.6e} (h = {h:.3e}); pulse is not resolvable"
    )]
    StepUnderflow { t: f64, h: f64 },

    #[error("invalid tolerance {0}; must be positive and finite")]
    InvalidTolerance(f64),

    #[error("phase of |{state}> undefined: returning amplitude {magnitude:.3e} < 1e-6")]
    UndefinedPhase { state: &'static str, magnitude: f64 },

    #[error("thermal sum not converged: neglected Boltzmann weight {0:.3e} exceeds 1e-6")]
    ThermalTail(f64),

    #[error("Fock truncation not converged: relative change {0:.3} when enlarging the ladder")]
    FockNotConverged(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("optimization infeasible: best infidelity {best:.3e} above threshold {threshold:.1e}")]
    Infeasible { best: f64, threshold: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("figure data error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
