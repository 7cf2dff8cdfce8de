//! Shared error type for every fallible operation in the crate.

use crate::mindex::{MultiIndex, RankedVar};
use thiserror::Error;

/// Errors reported by library operations.
///
/// Contract violations (mismatched contexts, wrong multi-index width, and the
/// like) are programming errors and panic instead; this enum covers the
/// domain-level failures a caller is expected to handle.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum DiffError {
    /// Division by an exactly-zero scalar.
    #[error("division by zero")]
    DivisionByZero,

    /// A truncated-series operation lost every significant digit, e.g. a
    /// series fraction whose denominator is zero to available precision.
    #[error("precision loss: {0}")]
    PrecisionLoss(String),

    /// Series inversion with a non-unit constant term.
    #[error("constant term {0} is not a unit")]
    NotAUnit(String),

    /// Supplied derivation images do not commute: `[d{i}, d{j}](u{k})`
    /// evaluates to `witness` instead of zero.
    #[error("derivations d{i} and d{j} do not commute on generator u{k}: [d{i},d{j}](u{k}) = {witness}")]
    NonCommutingDerivations {
        i: usize,
        j: usize,
        k: usize,
        witness: String,
    },

    /// An evaluation map sent a denominator to zero.
    #[error("point map hits a pole while evaluating {0}")]
    PoleError(String),

    /// An evaluation map has no image for a generator it is asked to evaluate.
    #[error("point map has no image for {0}")]
    UndefinedGenerator(String),

    /// A point map fails to respect a relation of its domain presentation.
    #[error("point map does not respect relation {relation}: image is {image}, not zero")]
    RelationNotRespected { relation: String, image: String },

    /// A characteristic-set constructor received a constant element.
    #[error("element {0} has no leader (it is free of the unknowns)")]
    ConstantPolynomial(String),

    /// A characteristic-set constructor received elements that are not
    /// pairwise reduced.
    #[error("set is not autoreduced: element {offender} is not reduced with respect to element {against}")]
    NotAutoreduced { offender: String, against: String },

    /// A solver precondition: each equation must have the shape `v - g` with
    /// `v` its leader and `g` of lower rank.
    #[error("system is not explicit: {0}")]
    NotExplicit(String),

    /// A solver found two derivation paths assigning different values to the
    /// same derivative.
    #[error("inconsistent system: {var} evaluates to {left} along one path and {right} along another")]
    InconsistentSystem {
        var: RankedVar,
        left: String,
        right: String,
    },

    /// A solver is missing an initial value for a free derivative.
    #[error("missing initial value for {0}")]
    MissingInitial(RankedVar),

    /// A solver received an initial value for a derivative that is determined
    /// by the system.
    #[error("initial value supplied for {0}, which is determined by the system")]
    UnexpectedInitial(RankedVar),

    /// A prolongation or split was asked for below the order of its inputs.
    #[error("order bound {bound} is below the order {actual} of {what}")]
    OrderExceeded {
        what: String,
        bound: u32,
        actual: u32,
    },

    /// A matrix family fails the mixed-partials integrability test:
    /// `d{i}(A{j}) - d{j}(A{i}) - [A{i}, A{j}]` equals `residual`, not zero.
    #[error("integrability violation between A{i} and A{j}: residual {residual}")]
    Violation {
        i: usize,
        j: usize,
        residual: String,
    },

    /// Two recurrence paths for a fundamental solution disagree; the input
    /// family is not integrable to the requested precision.
    #[error("fundamental-solution paths disagree at order {alpha}: {left} vs {right}")]
    IntegrabilityError {
        alpha: MultiIndex,
        left: String,
        right: String,
    },

    /// A supplied witness does not satisfy the variety it is claimed to lie on.
    #[error("witness does not satisfy {0}")]
    WitnessNotOnX(String),

    /// A variable frame does not have the shape an operation requires.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A computation exceeded its configured size or depth budget.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// Text input failed to parse.
    #[error("syntax error at {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },

    /// Input parsed but refers to derivations, generators, or variables the
    /// ambient context does not have.
    #[error("arity error: {0}")]
    ArityError(String),
}

/// Convenient alias used throughout the crate.
pub type Result<T> = std::result::Result<T, DiffError>;
