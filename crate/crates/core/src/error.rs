//! Crate-wide error type.
//!
//! Every failure carries a stable machine-readable kind (see [`Error::kind`])
//! so callers such as the CLI can emit structured error reports.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A design or operating-point specification violates its invariants.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    /// The requested taper is infeasible (e.g. ripple bound at or above the
    /// zero-frequency reflection, so no taper is needed or possible).
    #[error("design infeasible: {0}")]
    DesignInfeasible(String),
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    DomainError(String),
    /// The CPW geometry inversion failed at some profile sample.
    #[error("width solve failure: {0}")]
    WidthSolveFailure(String),
    /// Nonpositive or otherwise unusable physical dimensions.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    /// A root-finding bracket does not span the target value.
    #[error("bracket error: {0}")]
    BracketError(String),
    /// Two frequency-indexed objects do not share the same grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// A parameter conversion denominator vanished (pathological network).
    #[error("singular conversion: {0}")]
    SingularConversion(String),
    /// SQUID inductance diverges at odd half flux with zero asymmetry.
    #[error("divergent inductance: {0}")]
    DivergentInductance(String),
    /// Gain target below unity.
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    /// A gain profile never reaches the requested threshold.
    #[error("below threshold: {0}")]
    BelowThreshold(String),
    /// The idler frequency falls outside the tabulated environment.
    #[error("idler out of range: {0}")]
    IdlerOutOfRange(String),
    /// Simultaneous zero temperature and infinite gain requested.
    #[error("division domain: {0}")]
    DivisionDomain(String),
    /// A result would be unphysical (e.g. negative noise temperature).
    #[error("unphysical: {0}")]
    Unphysical(String),
    /// An iterative fit failed to converge.
    #[error("fit did not converge: {0}")]
    NonConvergence(String),
    /// Data cannot identify the requested parameters.
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    /// A fit converged but describes the data poorly.
    #[error("poor fit: {0}")]
    PoorFit(String),
    /// Gain never drops 1 dB within the supplied sweep.
    #[error("no compression: {0}")]
    NoCompression(String),
    /// Malformed input data file.
    #[error("parse error: {0}")]
    ParseError(String),
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::DesignInfeasible(_) => "DesignInfeasible",
            Error::DomainError(_) => "DomainError",
            Error::WidthSolveFailure(_) => "WidthSolveFailure",
            Error::InvalidGeometry(_) => "InvalidGeometry",
            Error::BracketError(_) => "BracketError",
            Error::GridMismatch(_) => "GridMismatch",
            Error::SingularConversion(_) => "SingularConversion",
            Error::DivergentInductance(_) => "DivergentInductance",
            Error::InvalidTarget(_) => "InvalidTarget",
            Error::BelowThreshold(_) => "BelowThreshold",
            Error::IdlerOutOfRange(_) => "IdlerOutOfRange",
            Error::DivisionDomain(_) => "DivisionDomain",
            Error::Unphysical(_) => "Unphysical",
            Error::NonConvergence(_) => "NonConvergence",
            Error::DegenerateData(_) => "DegenerateData",
            Error::PoorFit(_) => "PoorFit",
            Error::NoCompression(_) => "NoCompression",
            Error::ParseError(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }

    /// True for errors caused by the execution environment rather than the
    /// problem domain (I/O), which the CLI maps to a distinct exit code.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
