use crate::Scalar;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every named failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ZeroDivisor: division by the zero polynomial")]
    ZeroDivisor,
    #[error("PoleEvaluation: non-removable pole at {0}")]
    PoleEvaluation(Scalar),
    #[error("ConstantPolynomial: root finding needs degree >= 1")]
    ConstantPolynomial,

    #[error("InvalidCurve: {0}")]
    InvalidCurve(String),
    #[error("LeadingCoefficientVanishes: quadratic view degenerates at {0}")]
    LeadingCoefficientVanishes(Scalar),
    #[error("VerticalTangent: dF/dy vanishes at ({x}, {y})")]
    VerticalTangent { x: Scalar, y: Scalar },

    #[error("OffCurve: |F({x}, {y})| = {residual:e} exceeds tolerance")]
    OffCurve { x: Scalar, y: Scalar, residual: f64 },
    #[error("LatticeSingularity at index {index}")]
    LatticeSingularity { index: i64 },
    #[error("LatticeStagnation at index {index}")]
    LatticeStagnation { index: i64 },
    #[error("NotMaterialized: lattice index {index} has not been generated")]
    NotMaterialized { index: i64 },
    #[error("InvalidRange: {0}")]
    InvalidRange(String),
    #[error("CurveFit: {0}")]
    CurveFit(String),

    #[error("BranchPointEvaluation: the two roots coincide at {0}")]
    BranchPointEvaluation(Scalar),
    #[error("ReconstructionFallback: {0}")]
    ReconstructionFallback(String),
    #[error("MethodDegenerate: {0}")]
    MethodDegenerate(String),
    #[error("NoValidSamples")]
    NoValidSamples,

    #[error("FactorMissing: {0}")]
    FactorMissing(String),
    #[error("DegreeMismatch: {0}")]
    DegreeMismatch(String),
    #[error("NoSpecialPoint: {0}")]
    NoSpecialPoint(String),
    #[error("BranchAssignmentFailed: {0}")]
    BranchAssignmentFailed(String),
    #[error("SmallDivisor at index {index} (|divisor| = {magnitude:e})")]
    SmallDivisor { index: usize, magnitude: f64 },
    #[error("InternalInconsistency: {0}")]
    InternalInconsistency(String),
    #[error("HitSingularLattice at step {index}")]
    HitSingularLattice { index: usize },
    #[error("WrongMode: {0}")]
    WrongMode(String),
    #[error("MissingField: {0}")]
    MissingField(String),

    #[error("WindowTooSmall: {usable} usable terms, need at least 5")]
    WindowTooSmall { usable: usize },
    #[error("RefinePath: square-root branch ambiguous near {0}")]
    RefinePath(Scalar),
    #[error("PathThroughBranchPoint: path passes through a zero of P near {0}")]
    PathThroughBranchPoint(Scalar),

    #[error("Io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
