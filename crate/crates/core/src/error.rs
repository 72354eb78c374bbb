use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-physical input: {0}")]
    NonPhysicalInput(String),

    #[error("entropy argument {x} is below the vacuum value 1/2")]
    Domain { x: f64 },

    #[error("measured mode has det B = {beta} below 1/4")]
    DegenerateMeasuredMode { beta: f64 },

    #[error("matrix is not symmetric (relative residual {residual:e})")]
    NotSymmetric { residual: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("drift matrix is not stable (max real part {max_real_part:e})")]
    UnstableDrift { max_real_part: f64 },

    #[error("Lyapunov system is singular")]
    SingularSystem,

    #[error("quadrature did not reach tolerance {tolerance:e} (estimate {estimate:e})")]
    ToleranceNotMet { tolerance: f64, estimate: f64 },

    #[error("unstable grid point at {value}")]
    UnstablePoint { value: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSpec(String),

    #[error("target not bracketed: {0}")]
    NotBracketed(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("bad value for `{key}`: {reason}")]
    Unit { key: String, reason: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for this error. Every variant has its own code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonPhysicalInput(_) => 10,
            Error::Domain { .. } => 11,
            Error::DegenerateMeasuredMode { .. } => 12,
            Error::NotSymmetric { .. } => 13,
            Error::InvalidParams(_) => 20,
            Error::UnstableDrift { .. } => 21,
            Error::SingularSystem => 30,
            Error::ToleranceNotMet { .. } => 31,
            Error::UnstablePoint { .. } => 40,
            Error::InvalidSpec(_) => 41,
            Error::NotBracketed(_) => 42,
            Error::UnknownPreset(_) => 43,
            Error::Parse(_) => 50,
            Error::Unit { .. } => 51,
            Error::UnknownKey(_) => 52,
            Error::MissingKey(_) => 53,
            Error::Io(_) => 60,
            Error::Csv(_) => 61,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonPhysicalInput(_) => "NonPhysicalInput",
            Error::Domain { .. } => "DomainError",
            Error::DegenerateMeasuredMode { .. } => "DegenerateMeasuredMode",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::InvalidParams(_) => "InvalidParams",
            Error::UnstableDrift { .. } => "UnstableDrift",
            Error::SingularSystem => "SingularSystem",
            Error::ToleranceNotMet { .. } => "ToleranceNotMet",
            Error::UnstablePoint { .. } => "UnstablePoint",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::NotBracketed(_) => "NotBracketed",
            Error::UnknownPreset(_) => "UnknownPreset",
            Error::Parse(_) => "ParseError",
            Error::Unit { .. } => "UnitError",
            Error::UnknownKey(_) => "UnknownKey",
            Error::MissingKey(_) => "MissingKey",
            Error::Io(_) => "IoError",
            Error::Csv(_) => "CsvError",
        }
    }
}
