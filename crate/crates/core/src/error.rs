use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {location}: {message}")]
    Syntax { location: String, message: String },

    #[error("table of peripheral `{peripheral}` is not a group: {witness}")]
    TableNotAGroup { peripheral: String, witness: String },

    #[error("unknown letter `{token}` in {context}")]
    UnknownLetter { context: String, token: String },

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("invalid certified constants: {0}")]
    InvalidConstants(String),

    #[error("oracle for peripheral `{peripheral}` failed: {message}")]
    OracleFailure { peripheral: String, message: String },

    #[error("free-product backend requires an empty relator set")]
    RelatorsPresent,

    #[error("relator {index} evaluates to `{element}` in the model, not the identity")]
    RelatorNotSatisfied { index: usize, element: String },

    #[error("peripheral `{0}` is not embedded in the model as a subgroup")]
    PeripheralNotEmbedded(String),

    #[error("invalid finite model: {0}")]
    InvalidModel(String),

    #[error("no finite model attached: {0}")]
    ModelMissing(String),

    #[error("not computable: {0}")]
    NotComputable(String),

    #[error("word is not reduced")]
    NotReduced,

    #[error("word is not geodesic")]
    NotGeodesic,

    #[error("word is already doubly Lambda-reduced")]
    AlreadyDoublyReduced,

    #[error("word is not doubly Lambda-reduced")]
    NotDoublyReduced,

    #[error("element has infinite order")]
    InfiniteOrder,

    #[error("word is not null-homotopic")]
    NotNullHomotopic,

    #[error("search budget exceeded{}", match .best { Some(b) => format!(" (best incomplete bound: {b})"), None => String::new() })]
    BudgetExceeded { best: Option<usize> },

    #[error("ball of radius {0} is unavailable on this backend")]
    BallUnavailable(usize),

    #[error("no conjugator found: {0}")]
    NotFound(String),

    #[error("X and Omega are empty: the group is a free product of its peripherals and has no finite non-parabolic subgroups")]
    NoFiniteNonparabolic,

    #[error("input element is parabolic (lies in peripheral `{0}`)")]
    ParabolicInput(String),

    #[error("subgroup is parabolic (conjugate into peripheral `{0}`)")]
    ParabolicSubgroup(String),

    #[error("precondition violated by `{word}`: {property}")]
    PreconditionViolated { word: String, property: String },

    #[error("Omega-membership fails for component `{0}`")]
    OmegaMembershipFails(String),

    #[error("invalid move script: {0}")]
    InvalidScript(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn syntax(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Syntax {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn precondition(word: impl Into<String>, property: impl Into<String>) -> Self {
        Error::PreconditionViolated {
            word: word.into(),
            property: property.into(),
        }
    }
}
