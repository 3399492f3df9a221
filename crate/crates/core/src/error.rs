use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(
        "window exhausted: output would be empty (deficit {deficit}); \
         supply input known through mode {required_hi} or narrow the requested modes"
    )]
    Window { deficit: i64, required_hi: i64 },

    #[error("root system {0} is not supported: type E6 is excluded")]
    ExcludedType(String),

    #[error("degenerate lattice: {0}")]
    DegenerateLattice(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Shape(_) => 2,
            Error::Window { .. } => 3,
            Error::ExcludedType(_) => 4,
            Error::DegenerateLattice(_) => 5,
            _ => 1,
        }
    }
}
