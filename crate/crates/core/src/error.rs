use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument fell outside the range the operation is defined on.
    #[error("{name} = {value} is outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid probability vector: {0}")]
    InvalidVector(String),

    /// Post-selection on an outcome that cannot occur.
    #[error("degenerate condition: {0}")]
    Degenerate(String),

    #[error("outside the distillable regime: {0}")]
    Regime(String),

    #[error("experiment log records no rounds")]
    EmptyExperiment,

    #[error("expected a log for protocol {expected}, found protocol {found}")]
    ProtocolMismatch { expected: char, found: char },

    #[error("unknown protocol {0:?}")]
    UnknownProtocol(String),

    #[error("malformed log at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Checks `lo <= value <= hi` (and finiteness), naming the offending argument.
pub(crate) fn check_closed(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::Domain { name, value, range })
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    check_closed(name, value, 0.0, 1.0, "[0, 1]")
}
