use thiserror::Error;

/// Errors raised by the algebra, morphism, and pipeline operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("operation requires a finite field")]
    NotFiniteField,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("{value} is not p-integral at p = {p}")]
    NotPIntegral { value: String, p: u64 },
    #[error("operands have different bracket flavors")]
    FlavorMismatch,
    #[error("operands live on different sides (P vs W)")]
    SideMismatch,
    #[error("expected {expected} images, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("expansion exceeded {bound} terms")]
    ExpansionBoundExceeded { bound: usize },
    #[error("element is not central")]
    NotCentral,
    #[error("central element has an exponent not divisible by p")]
    NotInPthPowerForm,
    #[error("linear part is singular")]
    SingularLinearPart,
    #[error("negative power of h in an image; extend the map first")]
    NegativeHExponent,
    #[error("truncation is not compatible with this grading on the Weyl side")]
    IncompatibleGrading,
    #[error("generator kind incompatible with flavor: {0}")]
    IncompatibleFlavor(String),
    #[error("operation requires characteristic zero")]
    PositiveCharacteristic,
    #[error("endomorphism is not a symplectomorphism")]
    NotSymplectic,
    #[error("Jacobian is not 1")]
    NonUnitJacobian,
    #[error("deviation at order {0} is not Hamiltonian")]
    DeviationNotHamiltonian(i64),
    #[error("approximation stalled at rank {0}")]
    StageStall(i64),
    #[error("zero covector")]
    ZeroCovector,
    #[error("center bracket: commutator coefficient not divisible by p")]
    NotDivisibleByP,
    #[error("p-th power of an image is not central")]
    InternalCentralityFailure,
    #[error("no central p-th root")]
    NoRoot,
    #[error("central p-th root is not unique")]
    Ambiguous,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("lift did not stabilize: {0}")]
    StabilizationFailure(String),
    #[error("h-poles remain after twisting; raise k")]
    InsufficientK,
    #[error("index out of range: {0}")]
    IndexOutOfRange(usize),
    #[error("inverse could not be certified at order {0}")]
    InverseNotCertified(usize),
    #[error("syntax error at position {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
