use std::fmt;

use pitchgrad::Error;

/// Top-level failure, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or spec names: exit 2.
    Usage(String),
    /// External worker could not be started or broke the protocol: exit 3.
    Worker(String),
    /// A distance evaluated to NaN or infinity: exit 4.
    Numeric(String),
    /// Anything else (I/O): exit 1.
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Worker(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Worker(m) | Failure::Numeric(m) | Failure::Other(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::UnknownSpec(_)
            | Error::Config(_)
            | Error::Domain(_)
            | Error::AnalyticUnsupported(_)
            | Error::ExternalSpec(_) => Failure::Usage(msg),
            Error::Extern(_) => Failure::Worker(msg),
            Error::NonFinite { .. } => Failure::Numeric(msg),
            Error::SignalTooShort { .. } | Error::ZeroEnergyFrame { .. } | Error::Io(_) => {
                Failure::Other(msg)
            }
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pitchgrad::extern_protocol::ExternError;

    #[test]
    fn exit_codes() {
        let code = |e: Error| Failure::from(e).exit_code();
        assert_eq!(code(Error::UnknownSpec("x".into())), 2);
        assert_eq!(code(Error::AnalyticUnsupported("external".into())), 2);
        assert_eq!(code(Error::Extern(ExternError::Closed)), 3);
        assert_eq!(code(Error::NonFinite { spec: "mss".into(), value: f64::NAN }), 4);
        assert_eq!(code(Error::ZeroEnergyFrame { frame: 0 }), 1);
    }
}
