//! Crate-wide error type.
//!
//! Every fallible operation in the workbench funnels into [`Error`]. The
//! variants are deliberately coarse: callers branch on *kind* (precision,
//! precondition, unsupported input), and the payload strings carry the
//! specifics for reports and logs.

use num_rational::Ratio;
use thiserror::Error;

pub type CResult<T> = Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A valuation or comparison is not determined at the current working
    /// precision. `known_at_least` is the best lower bound established for the
    /// valuation in question (normalized units of the field that raised it).
    /// Callers may rebuild inputs at higher precision and retry.
    #[error("insufficient precision: {what} (valuation known to be >= {known_at_least})")]
    InsufficientPrecision { what: String, known_at_least: i64 },

    /// Division by an exact zero.
    #[error("division by zero")]
    DivisionByZero,

    /// An operation required a unit (valuation 0) and got something else.
    #[error("not a unit: valuation is {val}")]
    NotAUnit { val: Ratio<i64> },

    /// An operation on the one-units required v(lambda - 1) > 0.
    #[error("element is not congruent to 1 (v(x - 1) = {val})")]
    NotInNabla0 { val: Ratio<i64> },

    /// The operation is only defined in the other characteristic case.
    #[error("wrong characteristic case: {0}")]
    WrongCharacteristic(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// A polynomial expected to be irreducible is not.
    #[error("polynomial is not irreducible: {0}")]
    NotIrreducible(String),

    /// A polynomial expected to be separable is not.
    #[error("polynomial is not separable: {0}")]
    NotSeparable(String),

    /// A polynomial expected to be Eisenstein fails the test.
    #[error("polynomial is not Eisenstein: {0}")]
    NotEisenstein(String),

    /// Transfer of an Eisenstein polynomial requires the value-group index to
    /// be prime to p.
    #[error("value-group index divisible by p: {0}")]
    IndexDivisible(String),

    /// The input is outside the supported desk-scale fragment. The payload
    /// says exactly which fragment boundary was hit.
    #[error("unsupported field or input shape: {0}")]
    UnsupportedField(String),

    /// An iterative procedure (Newton, improvement loop, peeling) exhausted
    /// its step budget.
    #[error("iteration budget exceeded in {0}")]
    IterationBudgetExceeded(String),

    /// The degree-p classifier could not separate the cases at working
    /// precision.
    #[error("extension unclassifiable at current precision: {0}")]
    UnclassifiableAtPrecision(String),

    /// Descent data failed its coset verification.
    #[error("descent data mismatch: {0}")]
    DescentMismatch(String),

    /// A certificate check failed (the algebra may still be fine; the stated
    /// criterion could not be verified).
    #[error("certificate check failed: {0}")]
    CheckFailed(String),

    /// Cyclicity of an extension could not be established.
    #[error("no cyclic action found: {0}")]
    NotCyclicDetectable(String),

    /// Tower constructions are capped at height 3.
    #[error("tower height limit exceeded: {0}")]
    TowerHeightExceeded(usize),

    /// Config or expression syntax error.
    #[error("parse error: {0}")]
    ParseError(String),

    /// Elements from different fields were mixed in one operation.
    #[error("mismatched fields: {0}")]
    MismatchedFields(String),
}

impl Error {
    /// Shorthand used by arithmetic kernels.
    pub(crate) fn prec(what: impl Into<String>, known_at_least: i64) -> Self {
        Error::InsufficientPrecision { what: what.into(), known_at_least }
    }
}
