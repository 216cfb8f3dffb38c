use thiserror::Error;

/// Errors reported by the solver, the oracle and the command-line front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change of L bracketed on ({lo:e}, {hi:e})")]
    RootNotBracketed { lo: f64, hi: f64 },

    #[error("round-trip check failed: {0}")]
    RoundTrip(String),

    #[error("adaptive quadrature exceeded depth {depth} on [{a}, {b}]")]
    DepthExceeded { a: f64, b: f64, depth: u32 },

    #[error("polygon flow stalled after {steps} steps with gradient norm {grad_norm:e}")]
    NonConvergence { steps: usize, grad_norm: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
