use alloc::string::String;

/// Errors raised by the numerical kit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A model or contract value violates its construction invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    /// ν_t = 0 makes ζ infinite; the series path cannot be used.
    #[error("series singular: accrued variance is zero (use an oracle)")]
    SeriesSingular,
    /// The finite-difference solution left [0, 1] beyond tolerance.
    #[error("PDE instability: psi = {value} at grid node ({time_index}, {space_index}); refine the grid")]
    Instability {
        value: f64,
        time_index: usize,
        space_index: usize,
    },
    /// A tolerance could not be met.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    /// A series check was requested past the index where terms start growing.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
