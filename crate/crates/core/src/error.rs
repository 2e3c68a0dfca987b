use thiserror::Error;

/// Errors raised by the identification-coding routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// An enumeration or allocation would exceed its configured budget.
    #[error("resource budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    /// The cost constraint admits no input letter.
    #[error("infeasible constraint: cheapest usable letter costs {min_cost}, constraint is {constraint}")]
    Infeasible { min_cost: f64, constraint: f64 },

    /// The conditional typical set of the reference sequence is empty.
    #[error("conditional typical set is empty; increase delta or n")]
    DegenerateTypicality,

    /// The channel has repeated rows where distinct rows are required.
    #[error("channel rows {0} and {1} coincide; reduce the channel first")]
    DuplicateRows(usize, usize),

    /// Codebook construction left no usable codeword.
    #[error("codebook construction failed: {0}")]
    Construction(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
