use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("inverted bounds at component {index}: lower {lower} > upper {upper}")]
    BoundInversion { index: usize, lower: f64, upper: f64 },

    #[error("negative radius at component {index}: {value}")]
    NegativeRadius { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("regressor sequence is not persistently exciting (alpha = {alpha})")]
    NotPersistentlyExciting { alpha: f64 },

    #[error("bound is vacuous: c * rho^m = {c_rho_m} >= 1")]
    VacuousBound { c_rho_m: f64 },

    #[error("horizon too large: {0}")]
    HorizonTooLarge(String),

    #[error("sequence of length {len} is shorter than window {window}")]
    SequenceTooShort { len: usize, window: usize },

    #[error("simulation diverged: non-finite output at t = {t}")]
    Diverged { t: usize },

    #[error("csv: {0}")]
    Csv(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },

    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
