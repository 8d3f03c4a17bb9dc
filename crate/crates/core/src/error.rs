use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("edge {0} is a loop; graphs must be loopless")]
    LoopRejected(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("invalid chain structure: {0}")]
    InvalidChain(String),
    #[error("multidegrees are not related by twists")]
    NotEquivalent,
    #[error("no everywhere-nonnegative twist of the base multidegree")]
    NoNonnegativeTwist,
    #[error("piecewise-linear function has a non-integer slope on edge {0}")]
    InvalidSlope(String),
    #[error("invalid piecewise-linear function: {0}")]
    InvalidFunction(String),
    #[error("input is not rational: {0}")]
    IrrationalInput(String),
    #[error("divisor is not edge-reduced: {0}")]
    NotEdgeReduced(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("invalid fixture spec: {0}")]
    InvalidSpec(String),
    #[error("witness rank could not be verified: {0}")]
    WitnessUnverified(String),
    #[error("enumeration budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("graph is not a multitree")]
    NotMultitree,
    #[error("{0} and {1} do not differ by an edge-side twist")]
    NotEdgeSideTwist(String, String),
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("inconsistent vanishing profile: {0}")]
    InconsistentProfile(String),
    #[error("profile violates the multivanishing inequality at {0}")]
    ProfileViolatesI(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Parse errors map to a different CLI exit code than domain errors.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::IrrationalInput(_))
    }

    /// The variant name, e.g. `BudgetExceeded`.
    pub fn kind(&self) -> String {
        let dbg = format!("{self:?}");
        dbg.split(['(', ' ', '{']).next().unwrap_or_default().to_string()
    }
}

pub type Result<T> = std::result::Result<T, Error>;
