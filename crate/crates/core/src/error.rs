use thiserror::Error;

/// Errors produced by the workbench.
///
/// Budget-type failures (`is_budget_exceeded`) signal that an operation was
/// refused or cut short because of a configured resource limit rather than a
/// mathematical failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0} is not prime")]
    NotPrime(String),

    #[error("factorisation of q - 1 exceeded the configured budget; orders unavailable for q = {0}")]
    ModulusTooLargeForOrderComputation(String),

    #[error("factorisation of q - 1 unavailable for q = {0}")]
    FactorizationUnavailable(String),

    #[error("precision insufficient: {0}")]
    PrecisionInsufficient(String),

    #[error("repeated root suspected: roots {0} and {1} are closer than the working tolerance")]
    RepeatedRootSuspected(usize, usize),

    #[error("power iteration did not converge after {iterations} iterations (last relative change {last_change:e})")]
    PowerIterationDiverged {
        iterations: usize,
        last_change: f64,
        trace: Vec<f64>,
    },

    #[error("rounding ambiguous: coordinate {index} lies {distance:e} from the nearest integer")]
    RoundingAmbiguous { index: usize, distance: f64 },

    #[error("error value set too large: estimated {estimated} values exceeds cap {cap}")]
    SetTooLarge { estimated: u128, cap: u64 },

    #[error("sample variant mismatch: {0}")]
    SampleVariantMismatch(String),

    #[error("attack infeasible: {0}")]
    AttackInfeasible(String),

    #[error("f and the cyclotomic polynomial share a factor over Q")]
    NotCoprime,

    #[error("factoring budget exceeded: {0}")]
    FactoringBudgetExceeded(String),

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("q = {q} does not split the cyclotomic polynomial of index {m}")]
    DoesNotSplit { m: u64, q: String },

    #[error("schema violation at `{path}`: {message}")]
    SchemaViolation { path: String, message: String },

    #[error("I/O failure: {0}")]
    IoFailure(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Malformed(String),
}

impl Error {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::SchemaViolation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by a configured resource limit.
    pub fn is_budget_exceeded(&self) -> bool {
        matches!(
            self,
            Error::ModulusTooLargeForOrderComputation(_)
                | Error::FactorizationUnavailable(_)
                | Error::SetTooLarge { .. }
                | Error::AttackInfeasible(_)
                | Error::FactoringBudgetExceeded(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
