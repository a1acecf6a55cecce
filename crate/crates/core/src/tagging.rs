//! Utterance types and question detection.
//!
//! Tags follow the 14-class NPS Chat taxonomy. Tags can be imported from an
//! external classifier; anything left untagged falls back to [`rule_tag`],
//! a small deterministic tagger that only separates questions, greetings,
//! farewells and statements.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::transcript::{Dialogue, Utterance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UtteranceTag {
    Statement,
    Emotion,
    Greet,
    Bye,
    Accept,
    Reject,
    WhQuestion,
    YnQuestion,
    YAnswer,
    NAnswer,
    Emphasis,
    Continuer,
    Clarify,
    Other,
}

impl UtteranceTag {
    pub const ALL: [UtteranceTag; 14] = [
        UtteranceTag::Statement,
        UtteranceTag::Emotion,
        UtteranceTag::Greet,
        UtteranceTag::Bye,
        UtteranceTag::Accept,
        UtteranceTag::Reject,
        UtteranceTag::WhQuestion,
        UtteranceTag::YnQuestion,
        UtteranceTag::YAnswer,
        UtteranceTag::NAnswer,
        UtteranceTag::Emphasis,
        UtteranceTag::Continuer,
        UtteranceTag::Clarify,
        UtteranceTag::Other,
    ];

    /// The NPS Chat label, e.g. `whQuestion`.
    pub fn name(self) -> &'static str {
        match self {
            UtteranceTag::Statement => "Statement",
            UtteranceTag::Emotion => "Emotion",
            UtteranceTag::Greet => "Greet",
            UtteranceTag::Bye => "Bye",
            UtteranceTag::Accept => "Accept",
            UtteranceTag::Reject => "Reject",
            UtteranceTag::WhQuestion => "whQuestion",
            UtteranceTag::YnQuestion => "ynQuestion",
            UtteranceTag::YAnswer => "yAnswer",
            UtteranceTag::NAnswer => "nAnswer",
            UtteranceTag::Emphasis => "Emphasis",
            UtteranceTag::Continuer => "Continuer",
            UtteranceTag::Clarify => "Clarify",
            UtteranceTag::Other => "Other",
        }
    }
}

impl fmt::Display for UtteranceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UtteranceTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        UtteranceTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidTag {
                line: 0,
                tag: s.to_string(),
            })
    }
}

impl Serialize for UtteranceTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for UtteranceTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which tags count as questions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "QuestionPolicyRepr", into = "QuestionPolicyRepr")]
pub struct QuestionPolicy {
    question_tags: BTreeSet<UtteranceTag>,
}

#[derive(Serialize, Deserialize)]
struct QuestionPolicyRepr {
    question_tags: BTreeSet<UtteranceTag>,
}

impl TryFrom<QuestionPolicyRepr> for QuestionPolicy {
    type Error = Error;

    fn try_from(repr: QuestionPolicyRepr) -> Result<Self> {
        QuestionPolicy::new(repr.question_tags)
    }
}

impl From<QuestionPolicy> for QuestionPolicyRepr {
    fn from(policy: QuestionPolicy) -> Self {
        QuestionPolicyRepr {
            question_tags: policy.question_tags,
        }
    }
}

impl QuestionPolicy {
    pub fn new(tags: impl IntoIterator<Item = UtteranceTag>) -> Result<Self> {
        let question_tags: BTreeSet<_> = tags.into_iter().collect();
        if question_tags.is_empty() {
            return Err(Error::InvalidConfig(
                "question policy needs at least one tag".into(),
            ));
        }
        Ok(Self { question_tags })
    }

    pub fn question_tags(&self) -> &BTreeSet<UtteranceTag> {
        &self.question_tags
    }

    pub fn contains(&self, tag: UtteranceTag) -> bool {
        self.question_tags.contains(&tag)
    }
}

impl Default for QuestionPolicy {
    fn default() -> Self {
        Self {
            question_tags: BTreeSet::from([UtteranceTag::WhQuestion, UtteranceTag::YnQuestion]),
        }
    }
}

const WH_WORDS: &[&str] = &[
    "what", "which", "who", "whom", "whose", "where", "when", "why", "how",
];

// Clitics cover "what's", "who're", "where'd" and friends.
const AUXILIARIES: &[&str] = &[
    "do", "does", "did", "is", "are", "was", "were", "am", "can", "could", "will", "would",
    "should", "shall", "may", "might", "must", "have", "has", "had", "s", "re", "d", "ll", "ve",
];

// Sentence-initial auxiliaries that open a yes/no question; clitics excluded.
const YN_OPENERS: &[&str] = &[
    "do", "does", "did", "is", "are", "was", "were", "can", "could", "will", "would", "should",
    "have", "has", "had",
];

const GREETINGS: &[&str] = &[
    "hi",
    "hello",
    "hey",
    "hiya",
    "howdy",
    "greetings",
    "yo",
    "heya",
];

const FAREWELLS: &[&str] = &["bye", "goodbye", "byebye", "cya", "farewell", "ciao"];

struct Sentence {
    words: Vec<String>,
    interrogative: bool,
}

fn sentences(text: &str) -> Vec<Sentence> {
    let mut out = Vec::new();
    let mut current = String::new();
    let flush = |buf: &mut String, interrogative: bool, out: &mut Vec<Sentence>| {
        let words: Vec<String> = buf
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        if !words.is_empty() || interrogative {
            out.push(Sentence {
                words,
                interrogative,
            });
        }
        buf.clear();
    };
    for c in text.chars() {
        match c {
            '?' => flush(&mut current, true, &mut out),
            '.' | '!' | '\n' => flush(&mut current, false, &mut out),
            _ => current.push(c),
        }
    }
    flush(&mut current, false, &mut out);
    out
}

/// Deterministic fallback tagger.
///
/// A wh-word opening an interrogative sentence, or a wh-word directly
/// followed by an auxiliary anywhere, gives `whQuestion`. Any other sentence
/// ending in `?`, or one opening with an auxiliary or modal, gives
/// `ynQuestion`. Greeting and farewell openers come next; everything else
/// is a `Statement`.
pub fn rule_tag(text: &str) -> UtteranceTag {
    let sents = sentences(text);
    let is = |w: &str, set: &[&str]| set.contains(&w);

    let wh = sents.iter().any(|s| {
        let opens_wh = s.words.first().is_some_and(|w| is(w, WH_WORDS));
        (opens_wh && s.interrogative)
            || s.words
                .windows(2)
                .any(|pair| is(&pair[0], WH_WORDS) && is(&pair[1], AUXILIARIES))
    });
    if wh {
        return UtteranceTag::WhQuestion;
    }

    let yn = sents
        .iter()
        .any(|s| s.interrogative || s.words.first().is_some_and(|w| is(w, YN_OPENERS)));
    if yn {
        return UtteranceTag::YnQuestion;
    }

    let first = sents
        .first()
        .and_then(|s| s.words.first().map(String::as_str));
    let second = sents
        .first()
        .and_then(|s| s.words.get(1).map(String::as_str));
    match (first, second) {
        (Some(w), _) if is(w, GREETINGS) => UtteranceTag::Greet,
        (Some("good"), Some("morning" | "afternoon" | "evening")) => UtteranceTag::Greet,
        (Some(w), _) if is(w, FAREWELLS) => UtteranceTag::Bye,
        (Some("see"), Some("you" | "ya")) | (Some("good"), Some("night")) => UtteranceTag::Bye,
        _ => UtteranceTag::Statement,
    }
}

/// The imported tag when present, else the rule-based one.
pub fn effective_tag(utterance: &Utterance) -> UtteranceTag {
    utterance.tag.unwrap_or_else(|| rule_tag(&utterance.text))
}

pub fn is_question(utterance: &Utterance, policy: &QuestionPolicy) -> bool {
    policy.contains(effective_tag(utterance))
}

#[derive(Debug, Deserialize)]
struct TagRecord {
    dialogue_id: String,
    turn: usize,
    tag: String,
}

/// Attaches externally produced tags to a corpus.
///
/// Each line is `{"dialogue_id": .., "turn": .., "tag": ..}`. Imported tags
/// replace any tag already present on the utterance.
pub fn import_tags<R: BufRead>(dialogues: &[Dialogue], tag_stream: R) -> Result<Vec<Dialogue>> {
    let mut out = dialogues.to_vec();
    let index: HashMap<&str, usize> = dialogues
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.as_str(), i))
        .collect();

    for (i, line) in tag_stream.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TagRecord = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let tag: UtteranceTag = record.tag.parse().map_err(|_| Error::InvalidTag {
            line: line_no,
            tag: record.tag.clone(),
        })?;
        let unknown = || Error::UnknownTurn {
            line: line_no,
            dialogue_id: record.dialogue_id.clone(),
            turn: record.turn,
        };
        let slot = *index.get(record.dialogue_id.as_str()).ok_or_else(unknown)?;
        let utterance = out[slot]
            .utterances
            .get_mut(record.turn)
            .ok_or_else(unknown)?;
        utterance.tag = Some(tag);
    }
    Ok(out)
}
