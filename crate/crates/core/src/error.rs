use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: String,
        expected: String,
        found: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration diverged at step {step} (t = {time:.6e}): non-finite state")]
    IntegrationDiverged { step: usize, time: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unknown benchmark `{name}`; valid names: {valid}")]
    UnknownBenchmark { name: String, valid: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("excitation failed after {attempts} attempts: {matrix} is rank deficient (rank {rank} < {required})")]
    ExcitationFailure {
        matrix: String,
        attempts: usize,
        rank: usize,
        required: usize,
    },

    #[error("zero-input trajectory cannot reach full rank: the state matrix A is singular (rank {rank} < {n}); a full-rank A is required")]
    SingularDrift { rank: usize, n: usize },

    #[error("{what} is rank deficient: numeric rank {rank} < {required} (tolerance {tolerance:.3e})")]
    RankDeficient {
        what: String,
        rank: usize,
        required: usize,
        tolerance: f64,
    },

    #[error("LMI infeasible: {reason}; feasibility holds if and only if (A, B) is stabilizable")]
    Infeasible { reason: String },

    #[error("reduction equation infeasible: {0}; a full-column-rank solution exists only if the range condition R(AΘ) ⊆ R([Θ | B]) holds")]
    ReductionInfeasible(String),

    #[error("Gram matrix BᵀPB is singular (condition {condition:.3e}); increase input excitation or rescale B̂")]
    SingularGram { condition: f64 },

    #[error("simulation function invalid: {0}")]
    SfInvalid(String),

    #[error("verification infeasible: {0}")]
    VerificationInfeasible(String),

    #[error("safety infeasible: box half-width {half_width:.4e} on axis {axis} does not exceed the certified margin {margin:.4e}")]
    SafetyInfeasible {
        axis: usize,
        half_width: f64,
        margin: f64,
    },

    #[error("planning infeasible: {0}")]
    PlanningInfeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("step {step} ({name}) failed: {source}")]
    Step {
        step: u8,
        name: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Configuration,
    Infeasibility,
    Failure,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::UnknownBenchmark { .. } => {
                ErrorClass::Configuration
            }
            Error::Infeasible { .. }
            | Error::ReductionInfeasible(_)
            | Error::VerificationInfeasible(_)
            | Error::SafetyInfeasible { .. }
            | Error::PlanningInfeasible(_) => ErrorClass::Infeasibility,
            Error::Step { source, .. } => source.class(),
            _ => ErrorClass::Failure,
        }
    }

    pub(crate) fn at_step(self, step: u8, name: &'static str) -> Error {
        Error::Step {
            step,
            name,
            source: Box::new(self),
        }
    }

    pub(crate) fn dim(what: &str, expected: impl ToString, found: impl ToString) -> Error {
        Error::Dimension {
            what: what.to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
