//! Canonical dialogue model and line-delimited ingestion.
//!
//! Source corpora come in many shapes. Each record is one JSON object per
//! line; a [`MappingConfig`] says which keys hold the dialogue id, speaker,
//! text and (optionally) utterance tag, and maps raw speaker labels onto the
//! two [`Role`]s. The canonical on-disk form written by [`emit_canonical`]
//! is ingestible with [`MappingConfig::canonical`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::tagging::UtteranceTag;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Assistant,
    Seeker,
}

impl Role {
    pub const BOTH: [Role; 2] = [Role::Assistant, Role::Seeker];

    pub fn other(self) -> Role {
        match self {
            Role::Assistant => Role::Seeker,
            Role::Seeker => Role::Assistant,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Assistant => "assistant",
            Role::Seeker => "seeker",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "assistant" => Ok(Role::Assistant),
            "seeker" => Ok(Role::Seeker),
            other => Err(Error::InvalidConfig(format!("unknown role `{other}`"))),
        }
    }
}

/// One value per role.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerRole<T> {
    pub assistant: T,
    pub seeker: T,
}

impl<T> PerRole<T> {
    pub fn new(assistant: T, seeker: T) -> Self {
        Self { assistant, seeker }
    }

    pub fn get(&self, role: Role) -> &T {
        match role {
            Role::Assistant => &self.assistant,
            Role::Seeker => &self.seeker,
        }
    }

    pub fn get_mut(&mut self, role: Role) -> &mut T {
        match role {
            Role::Assistant => &mut self.assistant,
            Role::Seeker => &mut self.seeker,
        }
    }

    pub fn swapped(self) -> Self {
        Self {
            assistant: self.seeker,
            seeker: self.assistant,
        }
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> PerRole<U> {
        PerRole {
            assistant: f(self.assistant),
            seeker: f(self.seeker),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub index: usize,
    pub role: Role,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<UtteranceTag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    pub dataset: String,
    pub utterances: Vec<Utterance>,
}

impl Dialogue {
    /// Builds a dialogue from `(role, text)` pairs, numbering turns from 0.
    pub fn from_turns<S: Into<String>>(
        id: impl Into<String>,
        dataset: impl Into<String>,
        turns: impl IntoIterator<Item = (Role, S)>,
    ) -> Self {
        let utterances = turns
            .into_iter()
            .enumerate()
            .map(|(index, (role, text))| Utterance {
                index,
                role,
                text: text.into(),
                tag: None,
            })
            .collect();
        Self {
            id: id.into(),
            dataset: dataset.into(),
            utterances,
        }
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn utterance_counts(&self) -> PerRole<usize> {
        let mut counts = PerRole::default();
        for u in &self.utterances {
            *counts.get_mut(u.role) += 1;
        }
        counts
    }

    /// True when only one of the two roles ever speaks.
    pub fn is_single_participant(&self) -> bool {
        let counts = self.utterance_counts();
        counts.assistant == 0 || counts.seeker == 0
    }

    /// The same dialogue with every utterance attributed to the other role.
    pub fn swap_roles(&self) -> Dialogue {
        let mut swapped = self.clone();
        for u in &mut swapped.utterances {
            u.role = u.role.other();
        }
        swapped
    }
}

/// Corpus-level counts reported after ingestion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub dialogues: usize,
    pub utterances: usize,
    pub tagged_utterances: usize,
    pub single_participant: Vec<String>,
}

impl IngestStats {
    pub fn of(dialogues: &[Dialogue]) -> Self {
        let mut stats = IngestStats {
            dialogues: dialogues.len(),
            ..Default::default()
        };
        for d in dialogues {
            stats.utterances += d.len();
            stats.tagged_utterances += d.utterances.iter().filter(|u| u.tag.is_some()).count();
            if d.is_single_participant() {
                stats.single_participant.push(d.id.clone());
            }
        }
        stats
    }
}

/// Field mapping from a source record layout onto the canonical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingConfig {
    pub id_field: String,
    pub role_field: String,
    pub role_aliases: BTreeMap<String, Role>,
    pub text_field: String,
    #[serde(default)]
    pub tag_field: Option<String>,
    /// Explicit turn number; when absent, turns are numbered in record order.
    #[serde(default)]
    pub turn_field: Option<String>,
    #[serde(default)]
    pub dataset_field: Option<String>,
    /// Dataset label used when no dataset field is mapped or present.
    #[serde(default)]
    pub default_dataset: Option<String>,
}

impl MappingConfig {
    /// The identity mapping for canonical records.
    pub fn canonical() -> Self {
        Self {
            id_field: "dialogue_id".into(),
            role_field: "role".into(),
            role_aliases: BTreeMap::from([
                ("assistant".to_string(), Role::Assistant),
                ("seeker".to_string(), Role::Seeker),
            ]),
            text_field: "text".into(),
            tag_field: Some("tag".into()),
            turn_field: Some("turn".into()),
            dataset_field: Some("dataset".into()),
            default_dataset: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One line of the canonical corpus format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalRecord {
    pub dialogue_id: String,
    pub dataset: String,
    pub turn: usize,
    pub role: Role,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<UtteranceTag>,
}

fn scalar_to_string(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn required_string(obj: &Map<String, Value>, field: &str, line: usize) -> Result<String> {
    let value = obj.get(field).ok_or_else(|| Error::MissingField {
        line,
        field: field.to_string(),
    })?;
    scalar_to_string(value).ok_or_else(|| Error::Malformed {
        line,
        message: format!("field `{field}` is not a scalar"),
    })
}

/// Reads line-delimited JSON records and groups them into dialogues.
///
/// Dialogues appear in order of first occurrence; utterances keep record
/// order. Blank lines are skipped.
pub fn ingest<R: BufRead>(reader: R, config: &MappingConfig) -> Result<Vec<Dialogue>> {
    let mut dialogues: Vec<Dialogue> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    let mut explicit_turns: Vec<Vec<usize>> = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let obj = value.as_object().ok_or_else(|| Error::Malformed {
            line: line_no,
            message: "record is not a JSON object".into(),
        })?;

        let id = required_string(obj, &config.id_field, line_no)?;
        let label = required_string(obj, &config.role_field, line_no)?;
        let role = *config
            .role_aliases
            .get(&label)
            .ok_or_else(|| Error::UnknownSpeaker {
                line: line_no,
                label: label.clone(),
            })?;
        let text = match obj.get(&config.text_field) {
            None => {
                return Err(Error::MissingField {
                    line: line_no,
                    field: config.text_field.clone(),
                })
            }
            Some(Value::Null) => String::new(),
            Some(v) => scalar_to_string(v).ok_or_else(|| Error::Malformed {
                line: line_no,
                message: format!("field `{}` is not a scalar", config.text_field),
            })?,
        };
        let tag = match config.tag_field.as_deref().and_then(|f| obj.get(f)) {
            None | Some(Value::Null) => None,
            Some(v) => {
                let raw = scalar_to_string(v).unwrap_or_default();
                Some(raw.parse::<UtteranceTag>().map_err(|_| Error::InvalidTag {
                    line: line_no,
                    tag: raw,
                })?)
            }
        };
        let dataset = config
            .dataset_field
            .as_deref()
            .and_then(|f| obj.get(f))
            .and_then(scalar_to_string)
            .or_else(|| config.default_dataset.clone())
            .unwrap_or_default();
        let turn = match config.turn_field.as_deref().and_then(|f| obj.get(f)) {
            None => None,
            Some(v) => Some(v.as_u64().ok_or_else(|| Error::Malformed {
                line: line_no,
                message: "turn is not a non-negative integer".into(),
            })? as usize),
        };

        let slot = *by_id.entry(id.clone()).or_insert_with(|| {
            dialogues.push(Dialogue {
                id: id.clone(),
                dataset,
                utterances: Vec::new(),
            });
            explicit_turns.push(Vec::new());
            dialogues.len() - 1
        });
        let dialogue = &mut dialogues[slot];
        let index = dialogue.utterances.len();
        if let Some(turn) = turn {
            let seen = &mut explicit_turns[slot];
            if seen.contains(&turn) {
                return Err(Error::DuplicateTurn {
                    line: line_no,
                    dialogue_id: id,
                    turn,
                });
            }
            seen.push(turn);
        }
        dialogue.utterances.push(Utterance {
            index,
            role,
            text,
            tag,
        });
    }

    for (dialogue, turns) in dialogues.iter().zip(&explicit_turns) {
        // Explicit turn numbers must agree with record order.
        if !turns.is_empty() && turns.iter().enumerate().any(|(i, &t)| i != t) {
            return Err(Error::NonContiguousTurns {
                dialogue_id: dialogue.id.clone(),
            });
        }
    }
    Ok(dialogues)
}

/// Writes dialogues as canonical records, one JSON object per line.
pub fn emit_canonical<W: Write>(dialogues: &[Dialogue], mut writer: W) -> Result<()> {
    for d in dialogues {
        for u in &d.utterances {
            let record = CanonicalRecord {
                dialogue_id: d.id.clone(),
                dataset: d.dataset.clone(),
                turn: u.index,
                role: u.role,
                text: u.text.clone(),
                tag: u.tag,
            };
            serde_json::to_writer(&mut writer, &record)?;
            writer.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn to_canonical_string(dialogues: &[Dialogue]) -> String {
    let mut buf = Vec::new();
    emit_canonical(dialogues, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
