use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by model construction and by the verification operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid space `{space}`: {reason}")]
    InvalidSpace { space: String, reason: String },

    #[error("space `{space}` is not enumerable")]
    NotEnumerable { space: String },

    #[error("metric `{metric}` does not apply: {detail}")]
    MetricMismatch { metric: String, detail: String },

    #[error("state {state} is outside `{space}`")]
    OutOfDomain { space: String, state: String },

    #[error("space mismatch: expected `{expected}`, found `{found}`")]
    SpaceMismatch { expected: String, found: String },

    #[error("invalid relation `{relation}`: {reason}")]
    InvalidRelation { relation: String, reason: String },

    #[error("invalid dynamics `{dynamics}`: {reason}")]
    InvalidDynamics { dynamics: String, reason: String },

    #[error("invalid declaration `{id}`: {reason}")]
    InvalidDeclaration { id: String, reason: String },

    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("theory `{theory}` cannot instantiate {target}")]
    NotInstantiable { theory: String, target: String },

    #[error("theory `{theory}` declares no instantiation procedure")]
    MissingInstantiation { theory: String },

    #[error("theory `{theory}` has an empty domain or no predictions")]
    EmptyDomain { theory: String },

    #[error("theory `{theory}` has not been validated")]
    TheoryNotValidated { theory: String },

    #[error("theory `{theory}` has no prediction pairing `{program}` with `{device}`")]
    UnknownPrediction {
        theory: String,
        program: String,
        device: String,
    },

    #[error("space `{space}` is not a two-component product")]
    NotProductSpace { space: String },

    #[error("space `{space}` has {size} states, above the bound of {bound}")]
    TooLarge {
        space: String,
        size: u128,
        bound: u128,
    },
}

impl Error {
    pub(crate) fn out_of_domain(space: &str, state: impl std::fmt::Display) -> Self {
        Error::OutOfDomain {
            space: space.to_owned(),
            state: state.to_string(),
        }
    }
}
