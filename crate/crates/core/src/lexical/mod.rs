//! Tokenization, anaphora, and token attribution.
//!
//! A dialogue's vocabulary is the set of normalized tokens it contains.
//! Tokens that occur more than once are treated as topic carriers; each is
//! attributed to the role that used it first, and every later use by the
//! other role counts as uptake of that topic.

mod stem;
mod stopwords;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;

use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::transcript::{Dialogue, Role};
use crate::Result;

pub use stem::stem;

/// Referring expressions counted as implicit repetition.
pub const ANAPHORA: [&str; 11] = [
    "it", "they", "them", "their", "she", "he", "her", "him", "his", "this", "that",
];

pub fn is_anaphor(token: &str) -> bool {
    ANAPHORA.contains(&token)
}

pub fn english_stopwords() -> BTreeSet<String> {
    stopwords::ENGLISH.iter().map(|s| s.to_string()).collect()
}

/// Reads a one-term-per-line list. Blank lines and `#` comments are skipped;
/// terms are trimmed and lowercased.
pub fn load_term_list<R: BufRead>(reader: R) -> Result<BTreeSet<String>> {
    let mut terms = BTreeSet::new();
    for line in reader.lines() {
        let line = line?;
        let term = line.trim();
        if term.is_empty() || term.starts_with('#') {
            continue;
        }
        terms.insert(term.to_lowercase());
    }
    Ok(terms)
}

/// Compiled pattern for masked entity mentions such as `@88487`.
#[derive(Clone)]
pub struct MentionPattern(Regex);

impl MentionPattern {
    pub fn new(pattern: &str) -> Result<Self, regex::Error> {
        Regex::new(pattern).map(Self)
    }

    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }
}

impl Default for MentionPattern {
    fn default() -> Self {
        Self::new(r"\B@\w+").expect("default mention pattern compiles")
    }
}

impl fmt::Debug for MentionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("MentionPattern")
            .field(&self.as_str())
            .finish()
    }
}

impl PartialEq for MentionPattern {
    fn eq(&self, other: &Self) -> bool {
        self.as_str() == other.as_str()
    }
}

impl Serialize for MentionPattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for MentionPattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        MentionPattern::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Normalization policy for utterance text.
///
/// Stopwords are matched on the lowercased surface form. The `exclude`
/// list removes further terms from the vocabulary and is matched on both
/// the surface form and the stem, so `liked` is dropped by `like`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub stem: bool,
    pub stopwords: BTreeSet<String>,
    pub exclude: BTreeSet<String>,
    pub mention_pattern: MentionPattern,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: true,
            stem: true,
            stopwords: english_stopwords(),
            exclude: BTreeSet::new(),
            mention_pattern: MentionPattern::default(),
        }
    }
}

impl TokenizerConfig {
    pub fn with_exclusions<I, S>(mut self, terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.exclude.extend(terms.into_iter().map(Into::into));
        self
    }
}

/// A normalized token and whether it is an anaphor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub is_anaphor: bool,
}

/// Tokenizer bound to one configuration.
#[derive(Debug, Clone)]
pub struct Tokenizer<'a> {
    config: &'a TokenizerConfig,
}

impl<'a> Tokenizer<'a> {
    pub fn new(config: &'a TokenizerConfig) -> Self {
        Self { config }
    }

    fn raw_words<'t>(&self, segment: &'t str, out: &mut Vec<&'t str>) {
        if self.config.strip_punctuation {
            out.extend(
                segment
                    .split(|c: char| !c.is_alphanumeric())
                    .filter(|w| !w.is_empty()),
            );
        } else {
            out.extend(segment.split_whitespace());
        }
    }

    fn normalize(&self, raw: &str) -> Option<Token> {
        let lowered = raw.to_lowercase();
        if is_anaphor(&lowered) {
            return Some(Token {
                text: lowered,
                is_anaphor: true,
            });
        }
        let cfg = self.config;
        if cfg.stopwords.contains(&lowered) {
            return None;
        }
        let surface = if cfg.lowercase {
            lowered
        } else {
            raw.to_string()
        };
        let stemmed = if cfg.stem {
            stem(&surface)
        } else {
            surface.clone()
        };
        if cfg.exclude.contains(&surface) || cfg.exclude.contains(&stemmed) {
            return None;
        }
        Some(Token {
            text: stemmed,
            is_anaphor: false,
        })
    }

    pub fn tokens(&self, text: &str) -> Vec<Token> {
        let mut out = Vec::new();
        let mut words = Vec::new();
        let mut cursor = 0;
        for m in self.config.mention_pattern.0.find_iter(text) {
            words.clear();
            self.raw_words(&text[cursor..m.start()], &mut words);
            out.extend(words.iter().filter_map(|w| self.normalize(w)));
            out.push(Token {
                text: m.as_str().to_string(),
                is_anaphor: false,
            });
            cursor = m.end();
        }
        words.clear();
        self.raw_words(&text[cursor..], &mut words);
        out.extend(words.iter().filter_map(|w| self.normalize(w)));
        out
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        self.tokens(text).into_iter().map(|t| t.text).collect()
    }
}

/// Normalized token stream of one utterance.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    Tokenizer::new(config).tokenize(text)
}

/// One token occurrence with its attribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenEvent {
    pub token: String,
    pub dialogue_freq: usize,
    pub introducer: Role,
    pub occurrence_role: Role,
    pub utterance_index: usize,
    /// Position within the utterance's token stream.
    pub position: usize,
    pub is_anaphor: bool,
    pub is_repetition_across_roles: bool,
}

/// Every token occurrence in the dialogue, in (utterance, position) order.
pub fn token_events(dialogue: &Dialogue, config: &TokenizerConfig) -> Vec<TokenEvent> {
    let tokenizer = Tokenizer::new(config);
    let mut occurrences = Vec::new();
    let mut freq: HashMap<String, usize> = HashMap::new();
    let mut introducer: HashMap<String, Role> = HashMap::new();

    for u in &dialogue.utterances {
        for (position, token) in tokenizer.tokens(&u.text).into_iter().enumerate() {
            *freq.entry(token.text.clone()).or_default() += 1;
            introducer.entry(token.text.clone()).or_insert(u.role);
            occurrences.push((token.text, u.role, u.index, position));
        }
    }

    occurrences
        .into_iter()
        .map(|(token, role, utterance_index, position)| {
            let first = introducer[&token];
            TokenEvent {
                dialogue_freq: freq[&token],
                introducer: first,
                occurrence_role: role,
                utterance_index,
                position,
                is_anaphor: is_anaphor(&token),
                is_repetition_across_roles: role != first,
                token,
            }
        })
        .collect()
}

/// Tokens occurring more than once in the dialogue.
pub fn frequent_tokens(events: &[TokenEvent]) -> BTreeSet<String> {
    events
        .iter()
        .filter(|e| e.dialogue_freq > 1)
        .map(|e| e.token.clone())
        .collect()
}
