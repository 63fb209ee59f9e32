use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("seam violation: explicit cell ({h}, {t}) is White but lies outside the tail channel of width {c}")]
    SeamViolation { h: usize, t: usize, c: u32 },

    #[error("{op}: precondition failed: {detail}")]
    Precondition { op: &'static str, detail: String },

    /// A step produced a policy that contradicts its own guarantee. Indicates an
    /// implementation bug, never bad input.
    #[error("{op}: postcondition violated: {detail}")]
    Postcondition { op: &'static str, detail: String },

    #[error("budget exceeded: {needed} candidates requested, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
