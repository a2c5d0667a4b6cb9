//! Configuration, dispatch and reports behind the `twistfock` binary.

pub mod commands;
pub mod config;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    ConfigParse(String),
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("{command}: {source}")]
    Library { command: String, source: twistfock::Error },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn library(command: &str, source: twistfock::Error) -> CliError {
        CliError::Library { command: command.to_string(), source }
    }

    pub fn context(self, command: &str) -> CliError {
        match self {
            CliError::ConfigParse(m) => CliError::ConfigParse(format!("{command}: {m}")),
            other => other,
        }
    }
}
