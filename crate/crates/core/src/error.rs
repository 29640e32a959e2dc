use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero in {op}")]
    DivisionByZero { op: &'static str },

    #[error("cyclic substitution: the rule for {target} reintroduces {symbol}")]
    CyclicSubstitution { target: String, symbol: String },

    #[error("substitution makes a denominator vanish identically")]
    VanishingDenominator,

    #[error("truncation overflow: {coordinate} lies beyond the order budget {max_order}")]
    Truncation { coordinate: String, max_order: usize },

    #[error("equation is not affine in its principal derivative {principal}")]
    NotAffine { principal: String },

    #[error("reduction does not terminate: {0}")]
    NonTerminating(String),

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn is_truncation(&self) -> bool {
        matches!(self, Error::Truncation { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
