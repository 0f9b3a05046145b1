use alloc::string::String;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by model construction, evaluation and the optimizers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration value violates its invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        /// Parameter name.
        name: &'static str,
        /// What is wrong with it.
        reason: String,
    },

    /// The waveform does not provide a factor the truncation order needs.
    #[error("waveform has no moment factor for order {order}")]
    MissingMomentFactor {
        /// Even moment order.
        order: u32,
    },

    /// A waveform factor entry is unusable.
    #[error("invalid waveform factor at order {order} (value {value}): {reason}")]
    InvalidWaveformFactor {
        /// Moment order of the entry.
        order: u32,
        /// Offending value.
        value: f64,
        /// What is wrong with it.
        reason: &'static str,
    },

    /// An argument lies outside the domain of the function.
    #[error("{what} out of domain: {value}")]
    Domain {
        /// Argument description.
        what: &'static str,
        /// Offending value.
        value: f64,
    },

    /// An iterative method failed to reach its tolerance.
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        /// Which method.
        what: &'static str,
        /// Iterations spent.
        iterations: usize,
    },

    /// The search grid exceeds the cell cap and no override was given.
    #[error("grid has {cells} cells, above the limit of {limit}; pass an explicit override")]
    GridTooLarge {
        /// Estimated cell count.
        cells: u64,
        /// Active cap.
        limit: u64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
