use thiserror::Error;

/// Domain errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A declaration or parameter is malformed (bad alphabet, bad word,
    /// bad potential table, unparsable beta, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An enumeration or search exceeded its configured budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A theorem hypothesis the caller relies on does not hold.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// Beta-expansion digits were requested beyond the generated horizon
    /// and the expansion has no detected eventual period to extend with.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// A level of the word family is empty where a nonempty one is required.
    #[error("empty level: {0}")]
    EmptyLevel(String),

    /// A word admits no admissible extension of the required length.
    #[error("non-extendable word: {0}")]
    NonExtendableWord(String),

    /// A constructed word fell outside the language (signals a word family
    /// without the free concatenation property).
    #[error("admissibility violation: {0}")]
    AdmissibilityViolation(String),

    /// Integer growth in a Moran schedule exceeded the safe range before
    /// the requested level count was reached.
    #[error("schedule overflow: {0}")]
    ScheduleOverflow(String),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::HypothesisViolated(_) => 2,
            Error::BudgetExceeded(_) => 3,
            _ => 1,
        }
    }
}
