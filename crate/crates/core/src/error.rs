use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: String },

    #[error("line {line}: unknown speaker label `{label}`")]
    UnknownSpeaker { line: usize, label: String },

    #[error("line {line}: duplicate turn {turn} in dialogue `{dialogue_id}`")]
    DuplicateTurn {
        line: usize,
        dialogue_id: String,
        turn: usize,
    },

    #[error("dialogue `{dialogue_id}`: turns are not contiguous from 0 in record order")]
    NonContiguousTurns { dialogue_id: String },

    #[error("line {line}: invalid utterance tag `{tag}`")]
    InvalidTag { line: usize, tag: String },

    #[error("line {line}: no turn {turn} in dialogue `{dialogue_id}`")]
    UnknownTurn {
        line: usize,
        dialogue_id: String,
        turn: usize,
    },

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("histograms use different bin edges")]
    BinningMismatch,

    #[error("invalid binning: {0}")]
    InvalidBinning(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Malformed { .. } => "malformed_record",
            Error::MissingField { .. } => "missing_field",
            Error::UnknownSpeaker { .. } => "unknown_speaker",
            Error::DuplicateTurn { .. } => "duplicate_turn",
            Error::NonContiguousTurns { .. } => "non_contiguous_turns",
            Error::InvalidTag { .. } => "invalid_tag",
            Error::UnknownTurn { .. } => "unknown_turn",
            Error::UnknownField(_) => "unknown_field",
            Error::EmptyInput(_) => "empty_input",
            Error::BinningMismatch => "binning_mismatch",
            Error::InvalidBinning(_) => "invalid_binning",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}
