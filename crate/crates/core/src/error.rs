use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("prime {0} exceeds the supported range (p < 2^32)")]
    PrimeTooLarge(u64),
    #[error("precision {requested} out of range for p = {p} (allowed {min}..={max})")]
    PrecisionOutOfRange { p: u64, requested: u32, min: u32, max: u32 },
    #[error("operands live over different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted by cancellation over p = {p}")]
    PrecisionExhausted { p: u64 },
    #[error("insufficient precision: need {needed} p-adic digits, have {have}")]
    InsufficientPrecision { needed: u32, have: u32 },
    #[error("{0} is undefined at zero")]
    ZeroArgument(&'static str),
    #[error("expected a p-adic unit")]
    NotAUnit,
    #[error("element is congruent to 1 to the full precision {0}; filtration level is at least {0}")]
    FiltrationCap(u32),
    #[error("element is not in U_{level}")]
    NotInFiltration { level: u32 },
    #[error("defining element is a square; the extension is split")]
    SquareDefiningElement,
    #[error("norm image has index {0} in K*/K*^2, expected 2")]
    NormIndex(usize),
    #[error("x is not in M: x(x^2 - e) is not a norm")]
    NotInM,
    #[error("e is a square; the split case is not handled here")]
    SplitCase,
    #[error("cubic has a repeated root")]
    SingularCubic,
    #[error("d is a rational square; X is rational over Q and out of scope")]
    RationalSquare,
    #[error("conic search inconclusive: {0}")]
    Inconclusive(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
    #[error("cannot factor {0}: outside the supported range")]
    Factorization(String),
}
