use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("operands live in different field contexts")]
    ContextMismatch,
    #[error("invalid field context: {0}")]
    InvalidContext(String),
    #[error("invalid jet variable: {0}")]
    InvalidJet(String),
    #[error("argument of {0} must be parity-even")]
    OddFunctionArgument(&'static str),
    #[error("argument of {0} is a nonzero constant; its value is not rational")]
    ConstantFunctionArgument(&'static str),
    #[error("{0} is not parity-homogeneous; split it into even and odd parts first")]
    NonHomogeneous(String),
    #[error("value on the zero section is not rational (function of a nonzero constant)")]
    IrrationalZeroSection,
}
