use alloc::string::String;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input or parameter failed validation.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The page has no foreground after binarization.
    #[error("no content: foreground fraction {fraction:.2e} is below {threshold:.0e}")]
    NoContent { fraction: f64, threshold: f64 },

    /// A projection was requested on a spectrum that has not been centered.
    #[error("projection requires a centered spectrum")]
    NotCentered,

    /// No preset exists for the requested working height.
    #[error("no preset for height {height}; valid heights are 1024, 1500, 2048, 3072, 4096")]
    UnknownPreset { height: u32 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
