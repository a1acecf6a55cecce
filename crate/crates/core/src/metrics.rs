//! Per-dialogue shape: question, information, repetition and flow rates for
//! each role, folded into an average and a signed asymmetry per concept.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lexical::{token_events, TokenEvent, TokenizerConfig};
use crate::tagging::{is_question, QuestionPolicy};
use crate::transcript::{Dialogue, PerRole, Role};
use crate::{Error, Result};

/// Everything that influences a shape besides the dialogue itself.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapeConfig {
    pub tokenizer: TokenizerConfig,
    pub question_policy: QuestionPolicy,
}

/// Raw per-role counts before normalization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleCounts {
    pub questions: usize,
    pub information: usize,
    pub repetition: usize,
}

/// Per-role rates, each a raw count divided by the dialogue's utterance count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RoleMetrics {
    pub question: f64,
    pub information: f64,
    pub repetition: f64,
    pub flow: f64,
}

impl RoleMetrics {
    pub fn from_counts(counts: RoleCounts, n_utterances: usize) -> Self {
        if n_utterances == 0 {
            return Self::default();
        }
        let n = n_utterances as f64;
        let question = counts.questions as f64 / n;
        let information = counts.information as f64 / n;
        let repetition = counts.repetition as f64 / n;
        Self {
            question,
            information,
            repetition,
            flow: repetition - information,
        }
    }
}

/// Signed asymmetry `(a - s) / (a + s)`; positive means the assistant
/// dominates. Defined as 0 when both sides are 0.
pub fn delta(value_a: f64, value_s: f64) -> f64 {
    let total = value_a + value_s;
    if total == 0.0 {
        0.0
    } else {
        (value_a - value_s) / total
    }
}

fn average(value_a: f64, value_s: f64) -> f64 {
    (value_a + value_s) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeVector {
    pub dialogue_id: String,
    pub dataset: String,
    pub n_utterances: usize,
    pub counts: PerRole<RoleCounts>,
    pub rates: PerRole<RoleMetrics>,
    pub avg_question: f64,
    pub delta_question: f64,
    pub avg_information: f64,
    pub delta_information: f64,
    pub avg_repetition: f64,
    pub delta_repetition: f64,
    /// Only one role speaks in the dialogue.
    pub degenerate: bool,
}

impl ShapeVector {
    pub fn from_counts(
        dialogue_id: impl Into<String>,
        dataset: impl Into<String>,
        n_utterances: usize,
        counts: PerRole<RoleCounts>,
        degenerate: bool,
    ) -> Self {
        let rates = counts.map(|c| RoleMetrics::from_counts(c, n_utterances));
        let (a, s) = (rates.assistant, rates.seeker);
        Self {
            dialogue_id: dialogue_id.into(),
            dataset: dataset.into(),
            n_utterances,
            counts,
            rates,
            avg_question: average(a.question, s.question),
            delta_question: delta(a.question, s.question),
            avg_information: average(a.information, s.information),
            delta_information: delta(a.information, s.information),
            avg_repetition: average(a.repetition, s.repetition),
            delta_repetition: delta(a.repetition, s.repetition),
            degenerate,
        }
    }

    pub fn flow_assistant(&self) -> f64 {
        self.rates.assistant.flow
    }

    pub fn flow_seeker(&self) -> f64 {
        self.rates.seeker.flow
    }

    pub fn field(&self, field: ShapeField) -> f64 {
        match field {
            ShapeField::AvgQuestion => self.avg_question,
            ShapeField::DeltaQuestion => self.delta_question,
            ShapeField::AvgInformation => self.avg_information,
            ShapeField::DeltaInformation => self.delta_information,
            ShapeField::AvgRepetition => self.avg_repetition,
            ShapeField::DeltaRepetition => self.delta_repetition,
            ShapeField::FlowAssistant => self.flow_assistant(),
            ShapeField::FlowSeeker => self.flow_seeker(),
        }
    }

    pub fn to_row(&self) -> ShapeRow {
        let (a, s) = (&self.rates.assistant, &self.rates.seeker);
        ShapeRow {
            dialogue_id: self.dialogue_id.clone(),
            dataset: self.dataset.clone(),
            n_utterances: self.n_utterances,
            q_a: a.question,
            q_s: s.question,
            avg_q: self.avg_question,
            delta_q: self.delta_question,
            i_a: a.information,
            i_s: s.information,
            avg_i: self.avg_information,
            delta_i: self.delta_information,
            r_a: a.repetition,
            r_s: s.repetition,
            avg_r: self.avg_repetition,
            delta_r: self.delta_repetition,
            flow_a: a.flow,
            flow_s: s.flow,
        }
    }

    /// Rebuilds a shape from an exported row. Counts are recovered as
    /// `round(rate * n)`; the degeneracy flag is not exported and reads as
    /// false.
    pub fn from_row(row: &ShapeRow) -> Self {
        let n = row.n_utterances;
        let recover = |rate: f64| (rate * n as f64).round() as usize;
        let counts = PerRole::new(
            RoleCounts {
                questions: recover(row.q_a),
                information: recover(row.i_a),
                repetition: recover(row.r_a),
            },
            RoleCounts {
                questions: recover(row.q_s),
                information: recover(row.i_s),
                repetition: recover(row.r_s),
            },
        );
        Self {
            dialogue_id: row.dialogue_id.clone(),
            dataset: row.dataset.clone(),
            n_utterances: n,
            counts,
            rates: PerRole::new(
                RoleMetrics {
                    question: row.q_a,
                    information: row.i_a,
                    repetition: row.r_a,
                    flow: row.flow_a,
                },
                RoleMetrics {
                    question: row.q_s,
                    information: row.i_s,
                    repetition: row.r_s,
                    flow: row.flow_s,
                },
            ),
            avg_question: row.avg_q,
            delta_question: row.delta_q,
            avg_information: row.avg_i,
            delta_information: row.delta_i,
            avg_repetition: row.avg_r,
            delta_repetition: row.delta_r,
            degenerate: false,
        }
    }
}

/// Summary fields of a shape, named as in exported tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShapeField {
    #[serde(rename = "avg_q")]
    AvgQuestion,
    #[serde(rename = "delta_q")]
    DeltaQuestion,
    #[serde(rename = "avg_i")]
    AvgInformation,
    #[serde(rename = "delta_i")]
    DeltaInformation,
    #[serde(rename = "avg_r")]
    AvgRepetition,
    #[serde(rename = "delta_r")]
    DeltaRepetition,
    #[serde(rename = "flow_A")]
    FlowAssistant,
    #[serde(rename = "flow_S")]
    FlowSeeker,
}

impl ShapeField {
    pub const SUMMARY: [ShapeField; 8] = [
        ShapeField::AvgQuestion,
        ShapeField::DeltaQuestion,
        ShapeField::AvgInformation,
        ShapeField::DeltaInformation,
        ShapeField::AvgRepetition,
        ShapeField::DeltaRepetition,
        ShapeField::FlowAssistant,
        ShapeField::FlowSeeker,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeField::AvgQuestion => "avg_q",
            ShapeField::DeltaQuestion => "delta_q",
            ShapeField::AvgInformation => "avg_i",
            ShapeField::DeltaInformation => "delta_i",
            ShapeField::AvgRepetition => "avg_r",
            ShapeField::DeltaRepetition => "delta_r",
            ShapeField::FlowAssistant => "flow_A",
            ShapeField::FlowSeeker => "flow_S",
        }
    }

    /// Column heading used in rendered tables.
    pub fn title(self) -> &'static str {
        match self {
            ShapeField::AvgQuestion => "Question",
            ShapeField::DeltaQuestion => "ΔQuestion",
            ShapeField::AvgInformation => "Information",
            ShapeField::DeltaInformation => "ΔInformation",
            ShapeField::AvgRepetition => "Repetition",
            ShapeField::DeltaRepetition => "ΔRepetition",
            ShapeField::FlowAssistant => "Flow_A",
            ShapeField::FlowSeeker => "Flow_S",
        }
    }

    pub fn is_delta(self) -> bool {
        matches!(
            self,
            ShapeField::DeltaQuestion | ShapeField::DeltaInformation | ShapeField::DeltaRepetition
        )
    }
}

impl fmt::Display for ShapeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShapeField::SUMMARY
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownField(s.to_string()))
    }
}

/// Flat export record, shared by the CSV and JSON-lines shape files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeRow {
    pub dialogue_id: String,
    pub dataset: String,
    pub n_utterances: usize,
    #[serde(rename = "q_A")]
    pub q_a: f64,
    #[serde(rename = "q_S")]
    pub q_s: f64,
    pub avg_q: f64,
    pub delta_q: f64,
    #[serde(rename = "i_A")]
    pub i_a: f64,
    #[serde(rename = "i_S")]
    pub i_s: f64,
    pub avg_i: f64,
    pub delta_i: f64,
    #[serde(rename = "r_A")]
    pub r_a: f64,
    #[serde(rename = "r_S")]
    pub r_s: f64,
    pub avg_r: f64,
    pub delta_r: f64,
    #[serde(rename = "flow_A")]
    pub flow_a: f64,
    #[serde(rename = "flow_S")]
    pub flow_s: f64,
}

pub fn question_counts(dialogue: &Dialogue, policy: &QuestionPolicy) -> PerRole<usize> {
    let mut counts = PerRole::default();
    for u in &dialogue.utterances {
        if is_question(u, policy) {
            *counts.get_mut(u.role) += 1;
        }
    }
    counts
}

/// Distinct recurring, non-anaphoric tokens first used by each role.
pub fn information_counts(events: &[TokenEvent]) -> PerRole<usize> {
    let mut coined: BTreeSet<&str> = BTreeSet::new();
    let mut counts = PerRole::default();
    for e in events {
        if e.dialogue_freq > 1 && !e.is_anaphor && coined.insert(&e.token) {
            *counts.get_mut(e.introducer) += 1;
        }
    }
    counts
}

/// Per role: distinct recurring tokens picked up from the other role, plus
/// every anaphor occurrence.
pub fn repetition_counts(events: &[TokenEvent]) -> PerRole<usize> {
    let mut picked_up: HashSet<(&str, Role)> = HashSet::new();
    let mut counts = PerRole::default();
    for e in events {
        let counted = e.is_anaphor
            || (e.is_repetition_across_roles && picked_up.insert((&e.token, e.occurrence_role)));
        if counted {
            *counts.get_mut(e.occurrence_role) += 1;
        }
    }
    counts
}

/// Shape of one dialogue. An empty dialogue yields all-zero rates.
pub fn shape(dialogue: &Dialogue, config: &ShapeConfig) -> ShapeVector {
    let events = token_events(dialogue, &config.tokenizer);
    let questions = question_counts(dialogue, &config.question_policy);
    let information = information_counts(&events);
    let repetition = repetition_counts(&events);
    let counts = PerRole::new(Role::Assistant, Role::Seeker).map(|role| RoleCounts {
        questions: *questions.get(role),
        information: *information.get(role),
        repetition: *repetition.get(role),
    });
    ShapeVector::from_counts(
        &dialogue.id,
        &dialogue.dataset,
        dialogue.len(),
        counts,
        dialogue.is_single_participant(),
    )
}

/// Shapes of a whole corpus, computed in parallel and ordered by dialogue
/// id (stable for equal ids).
pub fn shape_corpus(dialogues: &[Dialogue], config: &ShapeConfig) -> Vec<ShapeVector> {
    let mut shapes: Vec<ShapeVector> = dialogues.par_iter().map(|d| shape(d, config)).collect();
    shapes.sort_by(|a, b| a.dialogue_id.cmp(&b.dialogue_id));
    shapes
}

pub fn write_shapes_csv<W: Write>(shapes: &[ShapeVector], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in shapes {
        w.serialize(s.to_row())?;
    }
    if shapes.is_empty() {
        w.write_record(SHAPE_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_shapes_jsonl<W: Write>(shapes: &[ShapeVector], mut writer: W) -> Result<()> {
    for s in shapes {
        serde_json::to_writer(&mut writer, &s.to_row())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub const SHAPE_COLUMNS: [&str; 17] = [
    "dialogue_id",
    "dataset",
    "n_utterances",
    "q_A",
    "q_S",
    "avg_q",
    "delta_q",
    "i_A",
    "i_S",
    "avg_i",
    "delta_i",
    "r_A",
    "r_S",
    "avg_r",
    "delta_r",
    "flow_A",
    "flow_S",
];

/// Reads a shape CSV; lines starting with `#` are metadata and skipped.
pub fn read_shapes_csv<R: std::io::Read>(reader: R) -> Result<Vec<ShapeVector>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<ShapeRow>() {
        out.push(ShapeVector::from_row(&row?));
    }
    Ok(out)
}

/// Reads a shape JSON-lines file; objects without a `dialogue_id` (such as
/// a leading metadata line) are skipped.
pub fn read_shapes_jsonl<R: BufRead>(reader: R) -> Result<Vec<ShapeVector>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?;
        if value.get("dialogue_id").is_none() {
            continue;
        }
        let row: ShapeRow = serde_json::from_value(value).map_err(|e| Error::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(ShapeVector::from_row(&row));
    }
    Ok(out)
}
