use thiserror::Error;

/// Coarse error category, one per CLI exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    Parse,
    Numerical,
    Precondition,
}

#[derive(Error, Debug)]
pub enum Error {
    #[error("ParseError: line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("SchemaError: {0}")]
    Schema(String),
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),

    #[error("SingularPencil: reciprocal condition {rcond:.3e} at point {point}")]
    SingularPencil { point: String, rcond: f64 },
    #[error("SingularE: {0}")]
    SingularE(String),
    #[error("SingularLoewner: {0}")]
    SingularLoewner(String),
    #[error("SingularStep: {0}")]
    SingularStep(String),
    #[error("SingularTransform: {0}")]
    SingularTransform(String),
    #[error("PencilNotRegular: {0}")]
    PencilNotRegular(String),
    #[error("DenominatorZero at ({0})")]
    DenominatorZero(String),
    #[error("ClosedLoopSingularAtPoint: {0}")]
    ClosedLoopSingularAtPoint(String),
    #[error("NullSpaceDimension: expected 1, found {0}")]
    NullSpaceDimension(usize),
    #[error("NoConvergence: {0}")]
    NoConvergence(String),

    #[error("TooFewPoints: need {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("CoincidentPoints: left {left} equals right {right}")]
    CoincidentPoints { left: String, right: String },
    #[error("RankTooLarge: requested {requested}, max {max}")]
    RankTooLarge { requested: usize, max: usize },
    #[error("NotConjugateClosed: {0}")]
    NotConjugateClosed(String),
    #[error("ConflictingData at point {0}")]
    ConflictingData(String),
    #[error("IndexOutOfRange: {0}")]
    IndexOutOfRange(String),
    #[error("OutOfRange: {0}")]
    OutOfRange(String),
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error("ZeroLeadingInput")]
    ZeroLeadingInput,
    #[error("InsufficientData: {0}")]
    InsufficientData(String),
    #[error("InsufficientExcitation: {0}")]
    InsufficientExcitation(String),
    #[error("UnsupportedTruncation: {0}")]
    UnsupportedTruncation(usize),
    #[error("PlantZeroAtPoint: {0}")]
    PlantZeroAtPoint(String),
    #[error("ReferenceUnityAtPoint: {0}")]
    ReferenceUnityAtPoint(String),
    #[error("BranchPoint: transfer function undefined at s = 0")]
    BranchPoint,
    #[error("WeightZeroAtPoint: {0}")]
    WeightZeroAtPoint(String),
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        use Error::*;
        match self {
            Parse { .. } | Schema(_) | Io(_) => ErrorFamily::Parse,
            SingularPencil { .. }
            | SingularE(_)
            | SingularLoewner(_)
            | SingularStep(_)
            | SingularTransform(_)
            | PencilNotRegular(_)
            | DenominatorZero(_)
            | ClosedLoopSingularAtPoint(_)
            | NullSpaceDimension(_)
            | NoConvergence(_) => ErrorFamily::Numerical,
            _ => ErrorFamily::Precondition,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.family() {
            ErrorFamily::Parse => 2,
            ErrorFamily::Numerical => 3,
            ErrorFamily::Precondition => 4,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
