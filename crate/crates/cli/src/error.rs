use std::fmt;

use synergy_core::decomposition::DecompositionError;
use synergy_core::geo::GeoError;
use synergy_core::ingest::IngestError;
use synergy_core::oracle::OracleError;
use synergy_core::synth::SynthError;
use synergy_core::taxonomy::TaxonomyError;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input: exit 2.
    Input(String),
    /// Nothing left to analyse at the requested scale or sector: exit 3.
    EmptySample(String),
}

impl CliError {
    pub fn input(msg: impl fmt::Display) -> Self {
        CliError::Input(msg.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::EmptySample(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "input error: {msg}"),
            CliError::EmptySample(msg) => write!(f, "empty sample: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DecompositionError> for CliError {
    fn from(e: DecompositionError) -> Self {
        match e {
            DecompositionError::EmptySample(_) | DecompositionError::EmptySector(_) => {
                CliError::EmptySample(e.to_string())
            }
            other => CliError::input(other),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::input(e)
    }
}

impl From<GeoError> for CliError {
    fn from(e: GeoError) -> Self {
        CliError::input(e)
    }
}

impl From<TaxonomyError> for CliError {
    fn from(e: TaxonomyError) -> Self {
        CliError::input(e)
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::input(e)
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::EmptySample => CliError::EmptySample(e.to_string()),
            other => CliError::input(other),
        }
    }
}
