//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by construction and operations across all modules.
///
/// Witness payloads are carried as canonical rendered text so errors stay
/// independent of the owning context or presentation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("conjugation is not defined on odd powers of e")]
    OddEpsilonPower,
    #[error("operands belong to different contexts")]
    ContextMismatch,
    #[error("generator `{0}` is not part of the context")]
    UnknownGenerator(String),
    #[error("generator name `{0}` is reserved or duplicated")]
    BadGeneratorName(String),
    #[error("image of `{generator}` must be homogeneous of degree {expected}, got {found}")]
    ImageDegree {
        generator: String,
        expected: i64,
        found: String,
    },
    #[error("derivation has even degree {0}; the deformation is only defined for odd degree")]
    EvenDegree(i64),
    #[error("derivation does not square to zero on `{generator}`: d(d {generator}) = {witness}")]
    NotSquareZero { generator: String, witness: String },
    #[error("deformation coefficient lambda must be nonzero")]
    ZeroLambda,
    #[error("lambda must be +i*h or -i*h for the S-transform equivalence, got {0}")]
    UnsupportedLambda(String),
    #[error("input has components of both parities")]
    MixedParityInput,
    #[error("input is not homogeneous")]
    NonHomogeneous,
    #[error("input has an odd-degree component")]
    OddComponentPresent,
    #[error("morphism does not intertwine the differentials on `{generator}`: defect {witness}")]
    NotChainMap { generator: String, witness: String },
    #[error("derivations {i} and {j} do not commute: witness on `{witness}`")]
    NonCommutingDerivations {
        i: usize,
        j: usize,
        witness: String,
    },
    #[error("a truncation order is required for the exponential product")]
    MissingTruncationOrder,
    #[error("matrix shapes do not conform: {0}")]
    ShapeMismatch(String),
    #[error("boundary does not square to zero at degree {degree}")]
    BoundaryNotSquareZero { degree: i64 },
    #[error("graded maps belong to different complexes")]
    ComplexMismatch,
    #[error("maps are not composable")]
    NotComposable,
    #[error("degree window contains no basis maps")]
    EmptyWindow,
    #[error("degree window is not closed under the bracket or differential (degree {0} escapes)")]
    WindowNotClosed(i64),
    #[error("elements belong to different presentations")]
    PresentationMismatch,
    #[error("basis index {0} is out of range")]
    BasisIndex(usize),
    #[error("structure constant violates the grading: {0}")]
    GradingViolation(String),
    #[error("map is not a coalgebra morphism: {0}")]
    NotCoalgebraMap(String),
    #[error("map does not preserve degrees: {0}")]
    DegreeBreaking(String),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("the algebra is not finite-dimensional without a nilpotency bound >= 2")]
    InfiniteDimensional,
    #[error("the truncation ideal is not stable under the differential: d({generator}^{power}) has witness {witness}")]
    TruncationNotStable {
        generator: String,
        power: u32,
        witness: String,
    },
    #[error("unknown catalog instance `{0}`")]
    UnknownInstance(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("no {kind} named `{name}`")]
    NameNotFound { kind: &'static str, name: String },
    #[error("{kind} `{name}` is already defined")]
    DuplicateName { kind: &'static str, name: String },
    #[error("parse error at {line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
}

impl Error {
    pub fn parse(line: usize, col: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            message: message.into(),
        }
    }
}
