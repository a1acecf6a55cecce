//! Dataset profiles, dialogue-type quadrants, and their rendered forms.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::metrics::{ShapeField, ShapeVector};
use crate::{Error, Result};

/// Order-independent sum: values are sorted, then added pairwise.
pub(crate) fn stable_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    pairwise(values)
}

fn pairwise(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise(lo) + pairwise(hi)
        }
    }
}

pub(crate) fn mean_of(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        return 0.0;
    }
    let n = v.len() as f64;
    stable_sum(&mut v) / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl FieldStats {
    pub fn of(values: &[f64]) -> Self {
        let mean = mean_of(values.iter().copied());
        let var = mean_of(values.iter().map(|v| (v - mean) * (v - mean)));
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusProfile {
    pub dataset: String,
    pub n_dialogues: usize,
    pub fields: BTreeMap<ShapeField, FieldStats>,
}

impl CorpusProfile {
    pub fn stats(&self, field: ShapeField) -> FieldStats {
        self.fields[&field]
    }

    pub fn mean(&self, field: ShapeField) -> f64 {
        self.stats(field).mean
    }

    /// A profile with the given means and zero spread, e.g. to place
    /// externally reported dataset averages on the quadrant chart.
    pub fn from_means(
        dataset: impl Into<String>,
        n_dialogues: usize,
        means: impl IntoIterator<Item = (ShapeField, f64)>,
    ) -> Self {
        let mut fields: BTreeMap<ShapeField, FieldStats> = ShapeField::SUMMARY
            .into_iter()
            .map(|f| {
                (
                    f,
                    FieldStats {
                        mean: 0.0,
                        std: 0.0,
                    },
                )
            })
            .collect();
        for (f, mean) in means {
            fields.insert(f, FieldStats { mean, std: 0.0 });
        }
        Self {
            dataset: dataset.into(),
            n_dialogues,
            fields,
        }
    }
}

/// Mean and population standard deviation of every summary field.
pub fn profile(shapes: &[ShapeVector], dataset: &str) -> Result<CorpusProfile> {
    if shapes.is_empty() {
        return Err(Error::EmptyInput("profile needs at least one dialogue"));
    }
    let fields = ShapeField::SUMMARY
        .into_iter()
        .map(|f| {
            let values: Vec<f64> = shapes.iter().map(|s| s.field(f)).collect();
            (f, FieldStats::of(&values))
        })
        .collect();
    Ok(CorpusProfile {
        dataset: dataset.to_string(),
        n_dialogues: shapes.len(),
        fields,
    })
}

/// Profiles per dataset label, in label order.
pub fn profile_by_dataset(shapes: &[ShapeVector]) -> Result<Vec<CorpusProfile>> {
    let mut groups: BTreeMap<&str, Vec<ShapeVector>> = BTreeMap::new();
    for s in shapes {
        groups.entry(&s.dataset).or_default().push(s.clone());
    }
    groups
        .into_iter()
        .map(|(label, group)| profile(&group, label))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Driver {
    AssistantDriven,
    SeekerDriven,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topic {
    AssistantContributed,
    SeekerContributed,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DialogueTypeLabel {
    pub driver: Driver,
    pub topic: Topic,
}

/// Which asymmetry decides the topic axis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopicAxis {
    #[default]
    Information,
    Repetition,
}

impl TopicAxis {
    pub fn field(self) -> ShapeField {
        match self {
            TopicAxis::Information => ShapeField::DeltaInformation,
            TopicAxis::Repetition => ShapeField::DeltaRepetition,
        }
    }
}

pub const DEFAULT_BALANCE_BAND: f64 = 0.1;

fn side(value: f64, band: f64) -> std::cmp::Ordering {
    if value > band {
        std::cmp::Ordering::Greater
    } else if value < -band {
        std::cmp::Ordering::Less
    } else {
        std::cmp::Ordering::Equal
    }
}

/// Quadrant of a profile from the signs of its mean ΔQuestion and
/// ΔInformation; means within `±balance_band` count as balanced.
pub fn classify(profile: &CorpusProfile, balance_band: f64) -> DialogueTypeLabel {
    classify_with_axis(profile, balance_band, TopicAxis::Information)
}

pub fn classify_with_axis(
    profile: &CorpusProfile,
    balance_band: f64,
    axis: TopicAxis,
) -> DialogueTypeLabel {
    use std::cmp::Ordering::*;
    let driver = match side(profile.mean(ShapeField::DeltaQuestion), balance_band) {
        Greater => Driver::AssistantDriven,
        Less => Driver::SeekerDriven,
        Equal => Driver::Balanced,
    };
    let topic = match side(profile.mean(axis.field()), balance_band) {
        Greater => Topic::AssistantContributed,
        Less => Topic::SeekerContributed,
        Equal => Topic::Balanced,
    };
    DialogueTypeLabel { driver, topic }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

/// One point per profile, reading the means of two named fields.
pub fn scatter_points(
    profiles: &[CorpusProfile],
    x_field: &str,
    y_field: &str,
) -> Result<Vec<ScatterPoint>> {
    let x: ShapeField = x_field.parse()?;
    let y: ShapeField = y_field.parse()?;
    Ok(profiles
        .iter()
        .map(|p| ScatterPoint {
            label: p.dataset.clone(),
            x: p.mean(x),
            y: p.mean(y),
        })
        .collect())
}

/// Vega-Lite scatter plot of labelled points with both axes drawn through
/// the origin.
pub fn scatter_plot_spec(
    points: &[ScatterPoint],
    x_field: ShapeField,
    y_field: ShapeField,
) -> Value {
    let values: Vec<Value> = points
        .iter()
        .map(|p| json!({ "label": p.label, "x": p.x, "y": p.y }))
        .collect();
    let axis = |field: ShapeField| json!({ "field": field.name(), "type": "quantitative", "title": field.title() });
    json!({
        "$schema": "https://vega.github.io/schema/vega-lite/v5.json",
        "description": format!("{} vs {} per dataset", y_field.title(), x_field.title()),
        "width": 480,
        "height": 480,
        "data": { "values": values },
        "transform": [
            { "calculate": "datum.x", "as": x_field.name() },
            { "calculate": "datum.y", "as": y_field.name() }
        ],
        "layer": [
            { "mark": { "type": "rule", "color": "#999" }, "encoding": { "x": { "datum": 0 } } },
            { "mark": { "type": "rule", "color": "#999" }, "encoding": { "y": { "datum": 0 } } },
            {
                "mark": { "type": "point", "filled": true, "size": 80 },
                "encoding": {
                    "x": axis(x_field),
                    "y": axis(y_field),
                    "tooltip": [{ "field": "label", "type": "nominal" }]
                }
            },
            {
                "mark": { "type": "text", "dx": 8, "align": "left" },
                "encoding": {
                    "x": { "field": x_field.name(), "type": "quantitative" },
                    "y": { "field": y_field.name(), "type": "quantitative" },
                    "text": { "field": "label", "type": "nominal" }
                }
            }
        ]
    })
}

/// CSV table: dataset, n_dialogues, then `<field>_mean,<field>_std` pairs.
pub fn profiles_to_csv(profiles: &[CorpusProfile]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dataset".to_string(), "n_dialogues".to_string()];
    for f in ShapeField::SUMMARY {
        header.push(format!("{}_mean", f.name()));
        header.push(format!("{}_std", f.name()));
    }
    w.write_record(&header)?;
    for p in profiles {
        let mut row = vec![p.dataset.clone(), p.n_dialogues.to_string()];
        for f in ShapeField::SUMMARY {
            let s = p.stats(f);
            row.push(s.mean.to_string());
            row.push(s.std.to_string());
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn cell(stats: FieldStats) -> String {
    format!("{:.2} ({:.2})", stats.mean, stats.std)
}

/// Markdown table in `mean (std)` form; the largest magnitude mean of each
/// column is set in bold.
pub fn profiles_to_markdown(profiles: &[CorpusProfile]) -> String {
    let mut out = String::from("| Dataset | N |");
    for f in ShapeField::SUMMARY {
        let _ = write!(out, " {} |", f.title());
    }
    out.push_str("\n|---|---:|");
    for _ in ShapeField::SUMMARY {
        out.push_str("---:|");
    }
    out.push('\n');

    let peaks: BTreeMap<ShapeField, f64> = ShapeField::SUMMARY
        .into_iter()
        .map(|f| {
            let peak = profiles
                .iter()
                .map(|p| display_round(p.mean(f)).abs())
                .fold(f64::NEG_INFINITY, f64::max);
            (f, peak)
        })
        .collect();

    for p in profiles {
        let _ = write!(out, "| {} | {} |", p.dataset, p.n_dialogues);
        for f in ShapeField::SUMMARY {
            let s = p.stats(f);
            if profiles.len() > 1 && display_round(s.mean).abs() == peaks[&f] {
                let _ = write!(out, " **{:.2}** ({:.2}) |", s.mean, s.std);
            } else {
                let _ = write!(out, " {} |", cell(s));
            }
        }
        out.push('\n');
    }
    out
}

fn display_round(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Plain-text table with aligned columns.
pub fn profiles_to_text(profiles: &[CorpusProfile]) -> String {
    let mut header = vec!["Dataset".to_string(), "N".to_string()];
    header.extend(ShapeField::SUMMARY.iter().map(|f| f.title().to_string()));
    let mut rows = vec![header];
    for p in profiles {
        let mut row = vec![p.dataset.clone(), p.n_dialogues.to_string()];
        row.extend(ShapeField::SUMMARY.iter().map(|&f| cell(p.stats(f))));
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (text, &w))| {
                let pad = w - text.chars().count();
                if c == 0 {
                    format!("{text}{}", " ".repeat(pad))
                } else {
                    format!("{}{text}", " ".repeat(pad))
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
