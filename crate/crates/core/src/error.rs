use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("inverse Gaussian sampler requires beta = 1/2, got {0}")]
    NotInverseGaussian(f64),

    #[error("cutoff_eps = {0} >= 1 is a degenerate truncation")]
    DegenerateCutoff(f64),

    #[error("explicit scheme unstable: mu * dt_fine = {0} >= 1")]
    UnstableStep(f64),

    #[error("observation step {delta_n} is not an integer multiple of dt_fine {dt_fine}")]
    NonIntegerStride { delta_n: f64, dt_fine: f64 },

    #[error("time {t} outside [0, {max}]")]
    OutOfRange { t: f64, max: f64 },

    #[error("window too small for level {level}: r_n = {r_n} but r_n > {min_r_n} is required")]
    WindowTooSmall { level: f64, r_n: f64, min_r_n: f64 },

    #[error("rate fit needs at least 3 distinct n values, got {0}")]
    TooFewPoints(usize),

    #[error("io error: {0}")]
    Io(String),

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check(cond: bool, name: &'static str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: reason.into(),
        })
    }
}
