use serde::Serialize;

/// Failure of a command, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, malformed configuration.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or malformed input, unwritable output.
    #[error("{0}")]
    Data(String),
    /// The analysis itself failed, possibly for a single entity.
    #[error("{message}")]
    Analysis { entity_id: Option<String>, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Analysis { .. } => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Analysis { .. } => "analysis",
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            exit_code: i32,
            #[serde(skip_serializing_if = "Option::is_none")]
            entity_id: Option<&'a str>,
            message: String,
        }
        let entity_id = match self {
            CliError::Analysis { entity_id, .. } => entity_id.as_deref(),
            _ => None,
        };
        serde_json::to_string(&Record { error: self.kind(), exit_code: self.exit_code(), entity_id, message: self.to_string() })
            .expect("error record serializes")
    }
}

impl From<mdsts_core::Error> for CliError {
    fn from(e: mdsts_core::Error) -> Self {
        let entity_id = match &e {
            mdsts_core::Error::Entity { id, .. } => Some(id.clone()),
            _ => None,
        };
        CliError::Analysis { entity_id, message: e.to_string() }
    }
}

pub fn io_error(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}
