use thiserror::Error;

/// Errors raised by the benchmark library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("signal of {got} samples is shorter than the {need}-sample analysis window")]
    SignalTooShort { got: usize, need: usize },

    #[error("spectral centroid undefined: frame {frame} has zero energy")]
    ZeroEnergyFrame { frame: usize },

    #[error("non-finite distance ({value}) from spec `{spec}`")]
    NonFinite { spec: String, value: f64 },

    #[error("spec `{0}` must be evaluated through an external worker session")]
    ExternalSpec(String),

    #[error("analytic gradients are unavailable for external spec `{0}`")]
    AnalyticUnsupported(String),

    #[error("unknown spec name `{0}`")]
    UnknownSpec(String),

    #[error(transparent)]
    Extern(#[from] crate::extern_protocol::ExternError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
