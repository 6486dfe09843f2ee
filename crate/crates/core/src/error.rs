use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("`{name}` has order {order}, exceeding the declared jet order {max}")]
    OrderExceeded { name: String, order: usize, max: usize },
    #[error("cyclic substitution through `{0}`")]
    CyclicBinding(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative radicand under an even root")]
    NegativeRadicand,
    #[error("no value bound for `{0}`")]
    UnboundAtom(String),
    #[error("order {order} outside 0..={max}")]
    OutOfRange { order: usize, max: usize },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("internal verification failed: {0}")]
    Verification(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
