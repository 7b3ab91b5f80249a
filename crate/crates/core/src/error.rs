use thiserror::Error;

/// Errors raised by the solvers and checkers.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// computation ran in, so the error type stays non-generic.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("grid mismatch: [0,{left_horizon}] with {left_steps} steps vs [0,{right_horizon}] with {right_steps} steps")]
    GridMismatch {
        left_horizon: f64,
        left_steps: usize,
        right_horizon: f64,
        right_steps: usize,
    },

    #[error("grid too coarse: order-{order} differentiation needs at least {min_steps} steps, got {steps}")]
    GridTooCoarse {
        order: usize,
        steps: usize,
        min_steps: usize,
    },

    #[error("degenerate marching diagonal {effective:e} (free coefficient {constant:e}): the equation is not of the second kind")]
    DegenerateDiagonal { effective: f64, constant: f64 },

    #[error("first-kind kernel vanishes at t=0 (value {value:e}); differentiation cannot produce a second-kind equation")]
    FirstKindKernelVanishes { value: f64 },

    #[error("inconsistent first-kind data: rhs(0) = {value:e} exceeds tolerance {tolerance:e}; exact data must vanish at t=0")]
    FirstKindInconsistentRhs { value: f64, tolerance: f64 },

    #[error("measurement vanishes at t=0: g(0) = {value:e}; the initial state must have a nonzero component along the measurement functional")]
    MeasurementVanishesAtZero { value: f64 },

    #[error("measurement eigenvalue must be nonzero")]
    ZeroMeasurementEigenvalue,

    #[error("first-order kernel must vanish at t=0, got l(0) = {value:e}")]
    KernelNonzeroAtZero { value: f64 },

    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("operator eigenvalues must be nondecreasing (index {index})")]
    EigenvaluesNotSorted { index: usize },

    #[error("measurement mode index {index} out of range for {modes} modes")]
    MeasureIndexOutOfRange { index: usize, modes: usize },

    #[error("operator carries no spatial basis; projection/synthesis need one")]
    MissingSpatialBasis,

    #[error("spatial grid under-resolved: {points} samples for {modes} modes (need at least {required})")]
    UnderResolvedSpatialGrid {
        points: usize,
        modes: usize,
        required: usize,
    },

    #[error("requested {requested} retained modes but only {available} are present")]
    TruncationOutOfRange { requested: usize, available: usize },

    #[error("kernel is sign-indefinite (min {min:e}); the requested bound only covers nonnegative kernels")]
    SignIndefiniteKernel { min: f64 },

    #[error("bound check needs a positive eigenvalue, got {lambda}")]
    NonpositiveEigenvalue { lambda: f64 },

    #[error("derivative of order {order} unavailable: {reason}")]
    DerivativeUnavailable { order: usize, reason: String },

    #[error("first-order solve cross-check failed: reduced and fixed-point routes differ by {difference:e} (allowed {allowed:e}); the data are likely too rough for the reduction")]
    CrossCheckFailed { difference: f64, allowed: f64 },

    #[error("nonfinite value produced in {context}")]
    NonFinite { context: &'static str },

    #[error("auxiliary trace g0 missing: supply its samples or a shared eigenvalue for the second operator")]
    MissingAuxiliaryTrace,

    #[error("unsolvable modes {modes:?}: vanishing denominator with nonvanishing numerator (first: |D| = {denominator:e}, numerator = {numerator:e})")]
    UnsolvableModes {
        modes: Vec<usize>,
        denominator: f64,
        numerator: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
