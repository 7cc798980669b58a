use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the verification engine.
///
/// Every variant names the module that raised it so that command-line
/// reports can point at the failing stage.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("[group_core] jet budget exceeded: {requested} directions/letters requested, at most {budget} allowed")]
    BudgetExceeded { requested: usize, budget: usize },

    #[error("[group_core] determinant drifted from 1: |det - 1| = {deviation:e}")]
    Determinant { deviation: f64 },

    #[error("[special_functions] parameter-degenerate: c = {c} is a nonpositive integer")]
    ParameterDegenerate { c: Complex64 },

    #[error("[special_functions] no convergent regime for z = {z}: {reason}")]
    NoConvergentRegime { z: Complex64, reason: &'static str },

    #[error("[principal_series] bandwidth overflow: input occupies Fourier modes above {limit} (relative tail {tail:e})")]
    BandwidthOverflow { limit: usize, tail: f64 },

    #[error("[principal_series] parity mismatch: {detail}")]
    ParityMismatch { detail: String },

    #[error("[enveloping] off-target residual {residual:e} exceeds 1e-9 for mode {mode}: ladder convention is inconsistent")]
    OffTargetResidual { mode: i32, residual: f64 },

    #[error("[enveloping] exceptional parameter s = {s}: ladder coefficient at mode {mode} has modulus {modulus:e} < 1e-8")]
    ExceptionalParameter { s: Complex64, mode: i32, modulus: f64 },

    #[error("[decomposition] rank-deficient dictionary: {reason}")]
    RankDeficient { reason: String },

    #[error("[decomposition] fit-ok-holdout-bad: fit residual {fit:e} but holdout residual {holdout:e} (enlarge the sample sets)")]
    HoldoutMismatch { fit: f64, holdout: f64 },

    #[error("[decomposition] non-removable behaviour: circle means at r and r/2 differ by {change:e} (relative)")]
    NonRemovable { change: f64 },

    #[error("[continuation] branch violation at t = {t}: {reason}")]
    BranchViolation { t: Complex64, reason: String },

    #[error("[{module}] invalid input: {reason}")]
    InvalidInput { module: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(module: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            module,
            reason: reason.into(),
        }
    }

    /// Name of the module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::BudgetExceeded { .. } | Error::Determinant { .. } => "group_core",
            Error::ParameterDegenerate { .. } | Error::NoConvergentRegime { .. } => {
                "special_functions"
            }
            Error::BandwidthOverflow { .. } | Error::ParityMismatch { .. } => "principal_series",
            Error::OffTargetResidual { .. } | Error::ExceptionalParameter { .. } => "enveloping",
            Error::RankDeficient { .. }
            | Error::HoldoutMismatch { .. }
            | Error::NonRemovable { .. } => "decomposition",
            Error::BranchViolation { .. } => "continuation",
            Error::InvalidInput { module, .. } => module,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
