use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed address: {0}")]
    MalformedAddress(String),

    #[error("invalid kernel configuration: {0}")]
    InvalidKernel(String),

    #[error("vertex {0} lies outside the half-graph")]
    OutsideHalfGraph(String),

    #[error("operation requires {expected}, got {got}")]
    WrongFamily { expected: &'static str, got: String },

    #[error("ball of radius {radius} exceeds the limit of {limit} vertices")]
    BallTooLarge { radius: u32, limit: usize },

    #[error("radius {radius} exceeds configured maximum {max}")]
    RadiusTooLarge { radius: u32, max: u32 },

    #[error("constraint excludes the starting vertex")]
    OriginExcluded,

    #[error("{what} has {edges} edges, limit is {limit}")]
    SizeLimit { what: &'static str, edges: usize, limit: usize },

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("decay fit needs at least 3 usable points, got {0}")]
    Fit(usize),

    #[error("bisection bracket invalid: {0}")]
    Bracket(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the failure stems from a size or budget limit rather than bad input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            Error::BallTooLarge { .. }
                | Error::RadiusTooLarge { .. }
                | Error::SizeLimit { .. }
                | Error::TruncationTooSmall(_)
        )
    }
}
