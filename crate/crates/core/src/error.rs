//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register size {got} outside [1, {cap}]")]
    RegisterSize { got: usize, cap: usize },

    #[error("qubit count mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("qubit {qubit} out of range for {num_qubits}-qubit register")]
    SupportOutOfRange { qubit: usize, num_qubits: usize },

    #[error("invalid operator support: {0}")]
    InvalidSupport(String),

    #[error("matrix not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix not a projector (deviation {0:.3e})")]
    NotProjector(f64),

    #[error("term not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("term norm {0:.6} exceeds 1")]
    NormExceeded(f64),

    #[error("{what} needs {got} qubits, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        got: usize,
        cap: usize,
    },

    #[error("layer {layer} not commuting: terms {first} and {second} have commutator norm {norm:.3e}")]
    NotCommuting {
        layer: usize,
        first: usize,
        second: usize,
        norm: f64,
    },

    #[error("circuit not swap-normalized: qubit {qubit} carries {count} gates (max 3)")]
    CircuitNotNormalized { qubit: usize, count: usize },

    #[error("no output qubit designated")]
    NoOutputQubit,

    #[error("per-qubit degree {degree} exceeds encodable cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("thresholds out of order: c = {c:.6e} must be below s = {s:.6e}")]
    ThresholdOrder { c: f64, s: f64 },

    #[error("path length {len} exceeds budget m_max = {m_max}")]
    BudgetExceeded { len: usize, m_max: usize },

    #[error("instance layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("parameter out of range: {0}")]
    ParamRange(String),
}

impl Error {
    /// Stable machine-readable code for reports and exit statuses.
    pub fn code(&self) -> &'static str {
        match self {
            Error::RegisterSize { .. } => "register_size",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::SupportOutOfRange { .. } => "support_out_of_range",
            Error::InvalidSupport(_) => "invalid_support",
            Error::NotHermitian(_) => "not_hermitian",
            Error::NotUnitary(_) => "not_unitary",
            Error::NotProjector(_) => "not_projector",
            Error::NotPsd(_) => "not_psd",
            Error::NormExceeded(_) => "norm_exceeded",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::NotCommuting { .. } => "not_commuting",
            Error::CircuitNotNormalized { .. } => "circuit_not_normalized",
            Error::NoOutputQubit => "no_output_qubit",
            Error::DegreeCap { .. } => "degree_cap",
            Error::ThresholdOrder { .. } => "threshold_order",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::LayoutMismatch(_) => "layout_mismatch",
            Error::ParamRange(_) => "param_range",
        }
    }

    /// True when the failure is a resource-cap refusal rather than bad input.
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            Error::CapExceeded { .. } | Error::DegreeCap { .. } | Error::RegisterSize { .. }
        )
    }
}
