use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },

    #[error("{key}: {msg}")]
    OutOfRange { key: String, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Sim(#[from] lambsim::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable class name.
    pub fn class(&self) -> &'static str {
        use lambsim::Error as E;
        match self {
            CliError::UnknownKey { .. } => "unknown_key",
            CliError::Malformed { .. } => "malformed",
            CliError::OutOfRange { .. } => "out_of_range",
            CliError::Io { .. } | CliError::Csv { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Sim(e) => match e.root() {
                E::InvalidConstants(_) | E::Unphysical { .. } | E::NonFinitePhase(_) => "unphysical",
                E::NormDrift { .. } => "norm_drift",
                E::NotHermitian(_) | E::NoConvergence(_) => "numerical",
                _ => "invalid_input",
            },
        }
    }

    /// Process exit status; distinct for every class.
    pub fn exit_code(&self) -> u8 {
        match self.class() {
            "usage" => 2,
            "unknown_key" => 10,
            "malformed" => 11,
            "out_of_range" => 12,
            "io" => 13,
            "unphysical" => 20,
            "invalid_input" => 21,
            "norm_drift" => 22,
            "numerical" => 23,
            _ => 1,
        }
    }

    /// `error,<class>,<message>` on one line.
    pub fn report_line(&self) -> String {
        let msg: String = self
            .to_string()
            .chars()
            .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
            .collect();
        format!("error,{},{}", self.class(), msg)
    }
}
