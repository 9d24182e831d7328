use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    /// `row` counts data rows from 1 (the header is row 0); `col` counts from 1.
    #[error("cannot parse cell at row {row}, column {col} ({column}): {value:?}")]
    ParseError { row: usize, col: usize, column: String, value: String },

    #[error("response column {0:?} not found in header")]
    MissingResponseColumn(String),

    #[error("file {0} has no header or no data rows")]
    EmptyFile(PathBuf),

    #[error("too few rows: {0}")]
    TooFewRows(String),

    #[error("malformed input: {0}")]
    Data(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: ghostvar_core::Error,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, e: impl fmt::Display) -> Self {
        CliError::Io { path: path.into(), message: e.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::ParseError { .. } => "parse_error",
            CliError::MissingResponseColumn(_) => "missing_response_column",
            CliError::EmptyFile(_) => "empty_file",
            CliError::TooFewRows(_) => "too_few_rows",
            CliError::Data(_) => "data",
            CliError::Io { .. } => "io",
            CliError::Stage { source, .. } => core_kind(source),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::ParseError { .. }
            | CliError::MissingResponseColumn(_)
            | CliError::EmptyFile(_)
            | CliError::TooFewRows(_)
            | CliError::Data(_)
            | CliError::Io { .. } => EXIT_DATA,
            CliError::Stage { source, .. } => core_exit_code(source),
        }
    }

    /// One-line JSON diagnostic for stderr.
    pub fn diagnostic(&self) -> String {
        #[derive(Serialize)]
        struct Diag<'a> {
            error: &'a str,
            exit_code: u8,
            #[serde(skip_serializing_if = "Option::is_none")]
            stage: Option<&'a str>,
            message: String,
        }
        let stage = match self {
            CliError::Stage { stage, .. } => Some(*stage),
            _ => None,
        };
        let d = Diag { error: self.kind(), exit_code: self.exit_code(), stage, message: self.to_string() };
        serde_json::to_string(&d).expect("diagnostic serializes")
    }
}

fn core_kind(e: &ghostvar_core::Error) -> &'static str {
    use ghostvar_core::Error::*;
    match e {
        RankDeficient { .. } => "rank_deficient",
        DimensionMismatch(_) => "dimension_mismatch",
        NotSymmetric(_) => "not_symmetric",
        NoConvergence(_) => "no_convergence",
        InvalidProbability(_) => "invalid_probability",
        NotPositiveSemiDefinite => "not_positive_semi_definite",
        NonFinite(_) => "non_finite",
        SchemaMismatch(_) => "schema_mismatch",
        InvalidArgument(_) => "invalid_argument",
        RefitFailed(_) => "refit_failed",
        ZeroRelevanceVariable(_) => "zero_relevance_variable",
        DegenerateSimilarity => "degenerate_similarity",
        SpawnFailed(_) => "spawn_failed",
        ProtocolViolation(_) => "protocol_violation",
        Timeout(_) => "timeout",
    }
}

fn core_exit_code(e: &ghostvar_core::Error) -> u8 {
    use ghostvar_core::Error::*;
    match e {
        InvalidArgument(_) | InvalidProbability(_) | SpawnFailed(_) => EXIT_CONFIG,
        DimensionMismatch(_) | SchemaMismatch(_) | NonFinite(_) => EXIT_DATA,
        _ => EXIT_NUMERIC,
    }
}

/// Attaches a stage name to core errors.
pub trait StageContext<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> StageContext<T> for ghostvar_core::Result<T> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}
