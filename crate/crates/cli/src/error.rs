use std::path::PathBuf;

use rykick::error::Error as CoreError;
use serde::Serialize;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("gate infeasible: {0}")]
    Infeasible(String),
}

/// Machine-readable form printed on stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "validation",
            CliError::Core(e) if input_error(e) => "validation",
            CliError::Core(_) => "numerical",
            CliError::Io { .. } => "io",
            CliError::Infeasible(_) => "infeasible",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "validation" => EXIT_VALIDATION,
            "numerical" => EXIT_NUMERICAL,
            "infeasible" => EXIT_INFEASIBLE,
            _ => EXIT_IO,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport { kind: self.kind(), exit_code: self.exit_code(), message: self.to_string() }
    }
}

/// Errors traceable to the configured parameters rather than to the
/// numerics: bad values, an unconfined trap, a crystal past its zigzag
/// point, or too few waveform parameters.
fn input_error(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::InvalidInput(_)
            | CoreError::UnstableTrap(_)
            | CoreError::LinearInstability { .. }
            | CoreError::InsufficientSlices { .. }
            | CoreError::InsufficientTerms { .. }
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_category() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::UnstableTrap("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::EmptyNullSpace).exit_code(), 3);
        assert_eq!(CliError::Core(CoreError::NoConvergence { what: "x", iterations: 1 }).exit_code(), 3);
        assert_eq!(CliError::Infeasible("x".into()).exit_code(), 4);
    }

    #[test]
    fn report_serializes() {
        let r = CliError::Core(CoreError::EmptyNullSpace).report();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"kind":"numerical","exit_code":3,"message":"closure system has an empty null space"}"#);
    }
}
