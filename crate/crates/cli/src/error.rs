use thiserror::Error;

/// Failure classes with their process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("io: {0}")]
    Io(String),
    #[error("config: {0}")]
    Config(String),
    #[error("numerical: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// `error kind=<class> msg=<text>` on a single line.
    pub fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Io(m) => ("io", m),
            CliError::Config(m) => ("config", m),
            CliError::Numerical(m) => ("numerical", m),
        };
        format!("error kind={kind} msg={}", msg.split_whitespace().collect::<Vec<_>>().join(" "))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<vibdimer::Error> for CliError {
    fn from(e: vibdimer::Error) -> Self {
        use vibdimer::Error as E;
        match e {
            // fixable by editing the configuration
            E::InvalidParameter { .. }
            | E::Schedule(_)
            | E::Grid(_)
            | E::MissingBlock(_)
            | E::CutoffOverflow { .. }
            | E::Truncation { .. }
            | E::QuantaCap { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
