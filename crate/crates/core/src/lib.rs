//! Unsupervised initiative and collaboration metrics for two-party dialogues.
//!
//! Every dialogue is reduced to a small vector of per-participant rates:
//! how often each side asks questions (`Question`), how many recurring topic
//! tokens it coins (`Information`), how often it picks up the other side's
//! tokens or refers back with an anaphor (`Repetition`), and the difference
//! between the last two (`Flow`). Rates are folded into an average and a
//! signed asymmetry per concept, aggregated into dataset profiles, and
//! compared against a human reference to diagnose dialogue models.
//!
//! The pipeline, bottom up:
//!
//! - [`transcript`]: canonical dialogue model and line-delimited ingestion.
//! - [`lexical`]: tokenization, anaphora, and token attribution.
//! - [`tagging`]: utterance types and question detection.
//! - [`metrics`]: per-dialogue [`ShapeVector`]s.
//! - [`profile`]: dataset profiles, dialogue-type quadrants, tables and plots.
//! - [`diagnostics`]: histogram cross-entropy against a reference corpus.
//! - [`synth`]: seeded synthetic corpora for tests and demos.

pub mod diagnostics;
mod error;
pub mod lexical;
pub mod metrics;
pub mod profile;
pub mod synth;
pub mod tagging;
pub mod transcript;

pub use diagnostics::{
    cross_entropy, diagnose, histogram, rank, reports_to_csv, reports_to_markdown, Binning,
    DevianceLabel, DevianceRules, DiagnosticReport, MetricHistogram, ReferenceDistribution,
};
pub use error::{Error, Result};
pub use lexical::{
    frequent_tokens, token_events, tokenize, TokenEvent, Tokenizer, TokenizerConfig, ANAPHORA,
};
pub use metrics::{
    delta, information_counts, question_counts, repetition_counts, shape, shape_corpus, RoleCounts,
    RoleMetrics, ShapeConfig, ShapeField, ShapeRow, ShapeVector,
};
pub use profile::{classify, profile, scatter_points, CorpusProfile, DialogueTypeLabel};
pub use tagging::{import_tags, is_question, rule_tag, QuestionPolicy, UtteranceTag};
pub use transcript::{emit_canonical, ingest, Dialogue, MappingConfig, PerRole, Role, Utterance};
