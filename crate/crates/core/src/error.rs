use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point or parameter outside the region where the object is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Discretization too coarse for the requested accuracy.
    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("invalid function spec: {0}")]
    Spec(String),

    /// Rejected by the self-map gate; carries the largest boundary modulus seen.
    #[error("not a self-map of the disc: max |phi| = {max_modulus} on the boundary sample")]
    SelfMapGate { max_modulus: f64 },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Unsupported(_) => "unsupported",
            Error::Parameter(_) => "parameter",
            Error::Precondition(_) => "precondition",
            Error::Sampling(_) => "sampling",
            Error::Spec(_) => "spec",
            Error::SelfMapGate { .. } => "self_map_gate",
            Error::ResourceLimit(_) => "resource_limit",
            Error::Numerical(_) => "numerical",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Spec(e.to_string())
    }
}
