use std::io;

/// Errors raised while loading resources or running the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Malformed {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("gloss {0:?} is empty after removing labels")]
    GlossEmptyAfterCleaning(String),

    #[error("no lexicon entries survived cleaning")]
    EmptyDictionary,

    #[error("dictionary has no patterns to match")]
    EmptyMatcher,

    #[error("corpus {0:?} contains no dialogs")]
    EmptyCorpus(String),

    #[error("duplicate utterance id {0:?}")]
    DuplicateId(String),

    #[error("unknown utterance id {0:?}")]
    UnknownId(String),

    #[error("dialog is empty")]
    EmptyDialog,

    #[error("entry reference {0:?} does not resolve in the dictionary")]
    UnresolvedEntry(String),

    #[error("invalid span {start}..{end} for utterance {utterance_id:?}: {reason}")]
    InvalidSpan {
        utterance_id: String,
        start: usize,
        end: usize,
        reason: &'static str,
    },

    #[error("probability {value} for {id:?} is outside [0, 1]")]
    ScoreOutOfRange { id: String, value: f64 },

    #[error("threshold {0} is outside [0, 1]")]
    ThresholdOutOfRange(f64),

    #[error("gold set is empty; recall is undefined")]
    EmptyGold,

    #[error("dialog acts missing on {missing} utterance(s); the corpus lacks act labels")]
    MissingDialogActs { missing: usize },

    #[error("runs cover different ids; symmetric difference: {}", .0.join(", "))]
    IdMismatch(Vec<String>),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn malformed(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by bad input rather than by the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
