use thiserror::Error;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VIOLATION: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("check failed: {0}")]
    Violation(String),
    #[error(transparent)]
    Core(#[from] midstop::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use midstop::Error as E;
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Violation(_) => EXIT_VIOLATION,
            CliError::Core(e) => match e {
                E::Range { .. } | E::Size { .. } | E::Precondition(_) => EXIT_USAGE,
                E::Domain(_) | E::Structural { .. } | E::Contract(_) => EXIT_VIOLATION,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::Violation("x".into()).exit_code(), EXIT_VIOLATION);
        let structural = midstop::Error::Structural { t: 3, ranks: vec![1, 3] };
        assert_eq!(CliError::from(structural).exit_code(), EXIT_VIOLATION);
        assert_eq!(CliError::from(midstop::Error::Domain("nan".into())).exit_code(), EXIT_VIOLATION);
        let size = midstop::Error::Size { what: "paper mode", n: 5000, cap: 2000 };
        assert_eq!(CliError::from(size).exit_code(), EXIT_USAGE);
    }
}
