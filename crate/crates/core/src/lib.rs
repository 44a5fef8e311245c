//! Symbolic kernel for Z2-graded variational calculus over jet spaces.
//!
//! Densities are canonical graded differential polynomials with `exp`,
//! `sin` and `cos` factors ([`expr`]). On top of them sit total and Euler
//! derivatives ([`calculus`]), local functionals compared modulo total
//! divergences ([`functional`]), and the variational Schouten bracket with
//! an exact checker for its shifted-graded Jacobi identity and a term-level
//! trace of how the identity balances ([`schouten`]). [`textio`] parses and
//! renders densities; [`harness`] holds the seeded fuzzer and reports used by
//! the command-line tool.

pub mod calculus;
pub mod error;
pub mod expr;
pub mod functional;
pub mod harness;
pub mod schouten;
pub mod textio;

/// Exact rational coefficients.
pub type Rational = num_rational::BigRational;

pub use calculus::{euler, is_exact, partial, total_derivative, Direction, Side};
pub use error::AlgebraError;
pub use expr::{
    Expression, FieldContext, FieldDecl, FuncKind, JetVar, MultiIndex, Owner, Parity, ParityOf,
};
pub use functional::{functional_eq, functional_parity, scale_add, Functional};
pub use schouten::{
    expand_trace, graded_symmetry_defect, jacobi_defect, reorder_sign_ledger, schouten_bracket,
    BracketResult, TraceReport, Verdict,
};
pub use textio::{
    format, format_trace, parse_context, parse_density, ContextSpec, OutputFormat, ParseError,
};
