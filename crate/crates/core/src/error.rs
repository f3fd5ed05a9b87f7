use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("quadrature did not converge on [{lo}, {hi}] (estimated error {err:e})")]
    Quadrature { lo: f64, hi: f64, err: f64 },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParam { name: &'static str, detail: String },

    #[error("step size {dt:e} exceeds the stability limit {dt_max:e}")]
    StepSize { dt: f64, dt_max: f64 },

    #[error("step size underflow at t = {t} (h = {h:e}); the problem is too stiff for the tolerance")]
    Stiffness { t: f64, h: f64 },

    #[error("degenerate initialisation: {0}")]
    Degenerate(String),

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{truncated} of {total} paths hit the truncation level (budget {budget})")]
    TruncationBudget {
        truncated: u64,
        total: u64,
        budget: f64,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
