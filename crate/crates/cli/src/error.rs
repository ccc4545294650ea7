use serde_json::json;
use thiserror::Error;

use mftg_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{0}")]
    Usage(String),

    #[error("missing solve artifact: {0}")]
    MissingArtifact(String),

    #[error("malformed artifact {path}: {message}")]
    Artifact { path: String, message: String },

    #[error("{failed} verification checks failed: {names}")]
    Verification { failed: usize, names: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn io_err(path: impl AsRef<std::path::Path>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.as_ref().display().to_string();
    move |source| CliError::Io { path, source }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                CoreError::InvalidInput(_) => "invalid_input",
                CoreError::ModelValidation(_) => "model_validation",
                CoreError::Capacity { .. } => "capacity",
                CoreError::DegenerateGrid { .. } => "degenerate_grid",
                CoreError::Reachability { .. } => "infeasible",
                CoreError::Catalog(_) => "unknown_fixture",
            },
            CliError::Usage(_) => "usage",
            CliError::MissingArtifact(_) => "missing_artifact",
            CliError::Artifact { .. } => "artifact",
            CliError::Verification { .. } => "verification",
            CliError::Io { .. } => "io",
        }
    }

    /// 0 success, 1 failed checks or i/o, 2 validation, 3 capacity, 4 infeasibility.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::Capacity { .. } | CoreError::DegenerateGrid { .. }) => 3,
            CliError::Core(CoreError::Reachability { .. }) => 4,
            CliError::Core(_) | CliError::Usage(_) | CliError::MissingArtifact(_) | CliError::Artifact { .. } => 2,
            CliError::Verification { .. } | CliError::Io { .. } => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Core(CoreError::Reachability { residual }) = self {
            body["residual"] = json!(residual);
        }
        json!({ "error": body })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_class() {
        let cap = CliError::Core(CoreError::Capacity {
            what: "grid".into(),
            required: 10,
            cap: 5,
        });
        assert_eq!(cap.exit_code(), 3);
        assert_eq!(CliError::Core(CoreError::Reachability { residual: 0.1 }).exit_code(), 4);
        assert_eq!(CliError::Core(CoreError::ModelValidation("x".into())).exit_code(), 2);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        let j = CliError::Core(CoreError::Reachability { residual: 0.25 }).to_json();
        assert_eq!(j["error"]["kind"], "infeasible");
        assert_eq!(j["error"]["residual"], 0.25);
    }
}
