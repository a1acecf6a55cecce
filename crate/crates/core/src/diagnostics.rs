//! Model diagnostics against a human reference corpus.
//!
//! Each diagnosed field gets a 1-D histogram over dialogues. Bin edges are
//! fixed from the reference corpus (equal width over its observed range),
//! counts are add-alpha smoothed, and the model is scored by the mean
//! cross-entropy `H(reference, model)` in nats across fields. Corpus-mean
//! ratios against the reference then decide a deviance label.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::metrics::{ShapeField, ShapeVector};
use crate::profile::mean_of;
use crate::{Error, Result};

/// Fields compared by [`diagnose`].
pub const DIAGNOSED_FIELDS: [ShapeField; 6] = [
    ShapeField::AvgQuestion,
    ShapeField::DeltaQuestion,
    ShapeField::AvgInformation,
    ShapeField::DeltaInformation,
    ShapeField::AvgRepetition,
    ShapeField::DeltaRepetition,
];

pub const LOG_BASE: &str = "e (nats)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Binning {
    pub bins: usize,
    /// Additive smoothing per bin.
    pub alpha: f64,
}

impl Default for Binning {
    fn default() -> Self {
        Self {
            bins: 20,
            alpha: 1.0,
        }
    }
}

impl Binning {
    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 {
            return Err(Error::InvalidBinning("at least one bin is required".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidBinning(format!(
                "smoothing must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// `bins` equal-width bins spanning the observed range of `field`.
    /// A constant field gets a unit-wide range centred on its value.
    pub fn edges_for(&self, shapes: &[ShapeVector], field: ShapeField) -> Result<Vec<f64>> {
        self.validate()?;
        if shapes.is_empty() {
            return Err(Error::EmptyInput("bin edges need reference dialogues"));
        }
        let (mut lo, mut hi) = shapes
            .iter()
            .map(|s| s.field(field))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        let b = self.bins;
        let mut edges: Vec<f64> = (0..b)
            .map(|i| lo + (hi - lo) * i as f64 / b as f64)
            .collect();
        edges.push(hi);
        Ok(edges)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricHistogram {
    pub field: ShapeField,
    pub bin_edges: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl MetricHistogram {
    pub fn bins(&self) -> usize {
        self.probabilities.len()
    }

    /// Entropy `H(p, p)` in nats.
    pub fn entropy(&self) -> f64 {
        cross_entropy(self, self).expect("a histogram shares its own edges")
    }
}

fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidBinning(format!(
            "need at least 2 bin edges, got {}",
            edges.len()
        )));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidBinning(
            "bin edges must be finite and strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Bin index of `value`; out-of-range values land in the terminal bins.
fn bin_of(edges: &[f64], value: f64) -> usize {
    let interior = &edges[1..edges.len() - 1];
    interior.partition_point(|&e| e <= value)
}

/// Smoothed histogram of one field: `(count_b + alpha) / (N + alpha * B)`.
pub fn histogram(
    shapes: &[ShapeVector],
    field: ShapeField,
    bin_edges: &[f64],
    alpha: f64,
) -> Result<MetricHistogram> {
    if shapes.is_empty() {
        return Err(Error::EmptyInput("histogram needs at least one dialogue"));
    }
    validate_edges(bin_edges)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidBinning(format!(
            "smoothing must be positive, got {alpha}"
        )));
    }
    let b = bin_edges.len() - 1;
    let mut counts = vec![0usize; b];
    for s in shapes {
        counts[bin_of(bin_edges, s.field(field))] += 1;
    }
    let denom = shapes.len() as f64 + alpha * b as f64;
    Ok(MetricHistogram {
        field,
        bin_edges: bin_edges.to_vec(),
        probabilities: counts.iter().map(|&c| (c as f64 + alpha) / denom).collect(),
    })
}

/// `H(p, q) = -Σ p_b ln q_b` over identically binned histograms.
pub fn cross_entropy(p_reference: &MetricHistogram, q_model: &MetricHistogram) -> Result<f64> {
    if p_reference.bin_edges != q_model.bin_edges
        || p_reference.probabilities.len() != q_model.probabilities.len()
    {
        return Err(Error::BinningMismatch);
    }
    Ok(-p_reference
        .probabilities
        .iter()
        .zip(&q_model.probabilities)
        .map(|(p, q)| p * q.ln())
        .sum::<f64>())
}

/// Reference histograms and means, computed once and shared across models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDistribution {
    pub label: String,
    pub n_dialogues: usize,
    pub binning: Binning,
    pub log_base: String,
    pub histograms: Vec<MetricHistogram>,
    pub means: BTreeMap<ShapeField, f64>,
    /// `H(p, p)` per field.
    pub self_entropy: BTreeMap<ShapeField, f64>,
}

impl ReferenceDistribution {
    pub fn build(label: &str, shapes: &[ShapeVector], binning: Binning) -> Result<Self> {
        binning.validate()?;
        if shapes.is_empty() {
            return Err(Error::EmptyInput("reference corpus is empty"));
        }
        let mut histograms = Vec::with_capacity(DIAGNOSED_FIELDS.len());
        let mut self_entropy = BTreeMap::new();
        for field in DIAGNOSED_FIELDS {
            let edges = binning.edges_for(shapes, field)?;
            let h = histogram(shapes, field, &edges, binning.alpha)?;
            self_entropy.insert(field, h.entropy());
            histograms.push(h);
        }
        Ok(Self {
            label: label.to_string(),
            n_dialogues: shapes.len(),
            binning,
            log_base: LOG_BASE.to_string(),
            histograms,
            means: corpus_means(shapes),
            self_entropy,
        })
    }

    pub fn histogram(&self, field: ShapeField) -> Option<&MetricHistogram> {
        self.histograms.iter().find(|h| h.field == field)
    }

    pub fn diagnose(
        &self,
        model_label: &str,
        model_shapes: &[ShapeVector],
        rules: &DevianceRules,
    ) -> Result<DiagnosticReport> {
        rules.validate()?;
        if model_shapes.is_empty() {
            return Err(Error::EmptyInput("model corpus is empty"));
        }
        let mut per_field = BTreeMap::new();
        for p in &self.histograms {
            let q = histogram(model_shapes, p.field, &p.bin_edges, self.binning.alpha)?;
            per_field.insert(p.field, cross_entropy(p, &q)?);
        }
        let total = mean_of(per_field.values().copied());

        let model_means = corpus_means(model_shapes);
        let ratio = |field| mean_ratio(model_means[&field], self.means[&field]);
        let ratios = MeanRatios {
            question: ratio(ShapeField::AvgQuestion),
            information: ratio(ShapeField::AvgInformation),
            repetition: ratio(ShapeField::AvgRepetition),
        };
        Ok(DiagnosticReport {
            model: model_label.to_string(),
            reference: self.label.clone(),
            n_dialogues: model_shapes.len(),
            cross_entropy: per_field,
            total,
            label: rules.apply(&ratios),
            ratios,
            rules: *rules,
            log_base: self.log_base.clone(),
        })
    }
}

fn corpus_means(shapes: &[ShapeVector]) -> BTreeMap<ShapeField, f64> {
    DIAGNOSED_FIELDS
        .into_iter()
        .map(|f| (f, mean_of(shapes.iter().map(|s| s.field(f)))))
        .collect()
}

fn mean_ratio(model: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if model == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        model / reference
    }
}

/// Thresholds on model-to-reference mean ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DevianceRules {
    /// Interviewer when the average question rate ratio reaches this value.
    pub interviewer_ratio: f64,
    pub information_ratio_hi: f64,
    pub information_ratio_lo: f64,
    pub repetition_ratio_hi: f64,
    pub repetition_ratio_lo: f64,
}

impl Default for DevianceRules {
    fn default() -> Self {
        Self {
            interviewer_ratio: 2.0,
            information_ratio_hi: 1.5,
            information_ratio_lo: 0.67,
            repetition_ratio_hi: 1.5,
            repetition_ratio_lo: 0.67,
        }
    }
}

impl DevianceRules {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.interviewer_ratio,
            self.information_ratio_hi,
            self.information_ratio_lo,
            self.repetition_ratio_hi,
            self.repetition_ratio_lo,
        ];
        if all.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidConfig(
                "deviance ratios must be positive".into(),
            ));
        }
        let ordered = self.interviewer_ratio > 1.0
            && self.information_ratio_hi > 1.0
            && self.repetition_ratio_hi > 1.0
            && self.information_ratio_lo < 1.0
            && self.repetition_ratio_lo < 1.0;
        if !ordered {
            return Err(Error::InvalidConfig(
                "deviance thresholds need hi > 1 > lo".into(),
            ));
        }
        Ok(())
    }

    /// First matching rule in the order interviewer, talker, parrot.
    pub fn apply(&self, r: &MeanRatios) -> DevianceLabel {
        if r.question >= self.interviewer_ratio {
            DevianceLabel::Interviewer
        } else if r.information >= self.information_ratio_hi
            && r.repetition <= self.repetition_ratio_lo
        {
            DevianceLabel::Talker
        } else if r.information <= self.information_ratio_lo
            && r.repetition >= self.repetition_ratio_hi
        {
            DevianceLabel::Parrot
        } else {
            DevianceLabel::Typical
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DevianceLabel {
    Interviewer,
    Talker,
    Parrot,
    Typical,
}

impl DevianceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            DevianceLabel::Interviewer => "Interviewer",
            DevianceLabel::Talker => "Talker",
            DevianceLabel::Parrot => "Parrot",
            DevianceLabel::Typical => "Typical",
        }
    }
}

/// Model corpus mean divided by reference corpus mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanRatios {
    pub question: f64,
    pub information: f64,
    pub repetition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub model: String,
    pub reference: String,
    pub n_dialogues: usize,
    pub cross_entropy: BTreeMap<ShapeField, f64>,
    /// Unweighted mean of the per-field cross-entropies.
    pub total: f64,
    pub label: DevianceLabel,
    pub ratios: MeanRatios,
    pub rules: DevianceRules,
    pub log_base: String,
}

/// Builds the reference distribution and diagnoses one model corpus.
pub fn diagnose(
    model_label: &str,
    model_shapes: &[ShapeVector],
    reference_shapes: &[ShapeVector],
    rules: &DevianceRules,
    binning: Binning,
) -> Result<DiagnosticReport> {
    ReferenceDistribution::build("reference", reference_shapes, binning)?.diagnose(
        model_label,
        model_shapes,
        rules,
    )
}

/// Ascending by total score; ties broken by model label.
pub fn rank(mut reports: Vec<DiagnosticReport>) -> Vec<DiagnosticReport> {
    reports.sort_by(|a, b| {
        a.total
            .partial_cmp(&b.total)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.model.cmp(&b.model))
    });
    reports
}

pub fn reports_to_csv(reports: &[DiagnosticReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["model".to_string()];
    header.extend(DIAGNOSED_FIELDS.iter().map(|f| format!("H_{}", f.name())));
    header.extend(["total", "label", "ratio_q", "ratio_i", "ratio_r"].map(String::from));
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![r.model.clone()];
        row.extend(DIAGNOSED_FIELDS.iter().map(|f| {
            r.cross_entropy
                .get(f)
                .map(f64::to_string)
                .unwrap_or_default()
        }));
        row.push(r.total.to_string());
        row.push(r.label.as_str().to_string());
        row.push(r.ratios.question.to_string());
        row.push(r.ratios.information.to_string());
        row.push(r.ratios.repetition.to_string());
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Markdown ranking table, best model first as given.
pub fn reports_to_markdown(reports: &[DiagnosticReport]) -> String {
    let mut out = String::from("| Rank | Model | N |");
    for f in DIAGNOSED_FIELDS {
        let _ = write!(out, " H({}) |", f.title());
    }
    out.push_str(" Total | Label |\n|---:|---|---:|");
    for _ in DIAGNOSED_FIELDS {
        out.push_str("---:|");
    }
    out.push_str("---:|---|\n");
    for (i, r) in reports.iter().enumerate() {
        let _ = write!(out, "| {} | {} | {} |", i + 1, r.model, r.n_dialogues);
        for f in DIAGNOSED_FIELDS {
            match r.cross_entropy.get(&f) {
                Some(h) => {
                    let _ = write!(out, " {h:.3} |");
                }
                None => out.push_str(" |"),
            }
        }
        let _ = writeln!(out, " {:.3} | {} |", r.total, r.label.as_str());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::RoleCounts;
    use crate::transcript::PerRole;
    use proptest::prelude::*;

    fn shape_q(id: usize, qa: usize, qs: usize) -> ShapeVector {
        let c = |q| RoleCounts {
            questions: q,
            information: 1,
            repetition: 1,
        };
        ShapeVector::from_counts(format!("d{id}"), "x", 10, PerRole::new(c(qa), c(qs)), false)
    }

    #[test]
    fn add_one_smoothing() {
        let shapes: Vec<_> = (0..4).map(|i| shape_q(i, 0, 0)).collect();
        let h = histogram(&shapes, ShapeField::AvgQuestion, &[0.0, 0.5, 1.0], 1.0).unwrap();
        assert_eq!(h.probabilities, vec![5.0 / 6.0, 1.0 / 6.0]);
    }

    #[test]
    fn uniform_values_give_uniform_histogram() {
        // avg_q = (qa + qs) / 20 spans 0.0 .. 0.45 evenly
        let shapes: Vec<_> = (0..10).map(|i| shape_q(i, i, 0)).collect();
        let edges = Binning {
            bins: 5,
            alpha: 1.0,
        }
        .edges_for(&shapes, ShapeField::AvgQuestion)
        .unwrap();
        let h = histogram(&shapes, ShapeField::AvgQuestion, &edges, 1.0).unwrap();
        for p in &h.probabilities {
            assert!((p - 0.2).abs() < 1e-12, "{:?}", h.probabilities);
        }
    }

    #[test]
    fn out_of_range_values_clamp() {
        let shapes = vec![shape_q(0, 9, 9)];
        let h = histogram(&shapes, ShapeField::AvgQuestion, &[0.0, 0.1, 0.2], 1.0).unwrap();
        assert_eq!(h.probabilities, vec![1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn histogram_errors() {
        assert!(matches!(
            histogram(&[], ShapeField::AvgQuestion, &[0.0, 1.0], 1.0),
            Err(Error::EmptyInput(_))
        ));
        let s = vec![shape_q(0, 0, 0)];
        assert!(matches!(
            histogram(&s, ShapeField::AvgQuestion, &[0.0], 1.0),
            Err(Error::InvalidBinning(_))
        ));
        assert!(histogram(&s, ShapeField::AvgQuestion, &[1.0, 0.0], 1.0).is_err());
        assert!(histogram(&s, ShapeField::AvgQuestion, &[0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn constant_reference_field_gets_unit_range() {
        let shapes = vec![shape_q(0, 1, 1), shape_q(1, 1, 1)];
        let edges = Binning {
            bins: 2,
            alpha: 1.0,
        }
        .edges_for(&shapes, ShapeField::AvgQuestion)
        .unwrap();
        assert_eq!(edges, vec![-0.4, 0.09999999999999998, 0.6]);
    }

    #[test]
    fn half_half_entropy_is_ln2() {
        let p = MetricHistogram {
            field: ShapeField::AvgQuestion,
            bin_edges: vec![0.0, 1.0, 2.0],
            probabilities: vec![0.5, 0.5],
        };
        assert!((p.entropy() - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn mismatched_edges_are_rejected() {
        let p = MetricHistogram {
            field: ShapeField::AvgQuestion,
            bin_edges: vec![0.0, 1.0, 2.0],
            probabilities: vec![0.5, 0.5],
        };
        let mut q = p.clone();
        q.bin_edges[1] = 0.9;
        assert!(matches!(cross_entropy(&p, &q), Err(Error::BinningMismatch)));
    }

    #[test]
    fn skewed_pair_exceeds_entropy() {
        let d = 1e-3;
        let edges = vec![0.0, 1.0, 2.0];
        let p = MetricHistogram {
            field: ShapeField::AvgQuestion,
            bin_edges: edges.clone(),
            probabilities: vec![1.0 - d, d],
        };
        let q = MetricHistogram {
            field: ShapeField::AvgQuestion,
            bin_edges: edges,
            probabilities: vec![d, 1.0 - d],
        };
        let h = cross_entropy(&p, &q).unwrap();
        assert!(h > 6.0 && h > p.entropy());
    }

    fn report(model: &str, total: f64) -> DiagnosticReport {
        DiagnosticReport {
            model: model.into(),
            reference: "ref".into(),
            n_dialogues: 1,
            cross_entropy: BTreeMap::new(),
            total,
            label: DevianceLabel::Typical,
            ratios: MeanRatios {
                question: 1.0,
                information: 1.0,
                repetition: 1.0,
            },
            rules: DevianceRules::default(),
            log_base: LOG_BASE.into(),
        }
    }

    #[test]
    fn rank_orders_by_score_then_label() {
        let ranked = rank(vec![report("a", 0.3), report("b", 0.01), report("c", 0.2)]);
        let order: Vec<_> = ranked.iter().map(|r| r.total).collect();
        assert_eq!(order, vec![0.01, 0.2, 0.3]);
        assert_eq!(rank(vec![report("solo", 1.0)])[0].model, "solo");
        let tied = rank(vec![report("zeta", 0.5), report("alpha", 0.5)]);
        assert_eq!(tied[0].model, "alpha");
    }

    #[test]
    fn rule_priority() {
        let rules = DevianceRules::default();
        let r = |q, i, rep| MeanRatios {
            question: q,
            information: i,
            repetition: rep,
        };
        assert_eq!(rules.apply(&r(3.2, 2.0, 0.5)), DevianceLabel::Interviewer);
        assert_eq!(rules.apply(&r(1.0, 2.0, 0.5)), DevianceLabel::Talker);
        assert_eq!(rules.apply(&r(1.0, 0.5, 2.0)), DevianceLabel::Parrot);
        assert_eq!(rules.apply(&r(1.0, 1.0, 1.0)), DevianceLabel::Typical);
        assert_eq!(rules.apply(&r(1.0, 2.0, 1.0)), DevianceLabel::Typical);
    }

    #[test]
    fn rules_validation() {
        assert!(DevianceRules::default().validate().is_ok());
        let bad = DevianceRules {
            information_ratio_lo: 1.2,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = DevianceRules {
            interviewer_ratio: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn reference_round_trips_through_json() {
        let shapes: Vec<_> = (0..30).map(|i| shape_q(i, i % 4, i % 3)).collect();
        let reference =
            ReferenceDistribution::build("control-h", &shapes, Binning::default()).unwrap();
        let json = serde_json::to_string(&reference).unwrap();
        let back: ReferenceDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, reference);
    }

    #[test]
    fn diagnose_is_order_invariant() {
        let reference: Vec<_> = (0..40).map(|i| shape_q(i, i % 3, i % 2)).collect();
        let mut model: Vec<_> = (0..25).map(|i| shape_q(i, i % 5, 1)).collect();
        let rules = DevianceRules::default();
        let a = diagnose("m", &model, &reference, &rules, Binning::default()).unwrap();
        model.reverse();
        let mut reversed_ref = reference.clone();
        reversed_ref.reverse();
        let b = diagnose("m", &model, &reversed_ref, &rules, Binning::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_corpora_are_rejected() {
        let reference: Vec<_> = (0..5).map(|i| shape_q(i, 1, 0)).collect();
        let rules = DevianceRules::default();
        assert!(diagnose("m", &[], &reference, &rules, Binning::default()).is_err());
        assert!(diagnose("m", &reference, &[], &rules, Binning::default()).is_err());
    }

    fn arb_histogram_pair() -> impl Strategy<Value = (MetricHistogram, MetricHistogram)> {
        (2usize..25).prop_flat_map(|b| {
            let counts = proptest::collection::vec(0u32..50, b);
            (counts.clone(), counts, 0.01f64..2.0).prop_map(move |(cp, cq, alpha)| {
                let edges: Vec<f64> = (0..=b).map(|i| i as f64).collect();
                let smooth = |c: &[u32]| {
                    let n: u32 = c.iter().sum();
                    let denom = n as f64 + alpha * b as f64;
                    c.iter()
                        .map(|&x| (x as f64 + alpha) / denom)
                        .collect::<Vec<_>>()
                };
                let h = |c: &[u32]| MetricHistogram {
                    field: ShapeField::AvgQuestion,
                    bin_edges: edges.clone(),
                    probabilities: smooth(c),
                };
                (h(&cp), h(&cq))
            })
        })
    }

    proptest! {
        #[test]
        fn gibbs_inequality((p, q) in arb_histogram_pair()) {
            let h_pq = cross_entropy(&p, &q).unwrap();
            let h_pp = cross_entropy(&p, &p).unwrap();
            prop_assert!(h_pq.is_finite());
            prop_assert!(h_pq >= h_pp - 1e-12);
            let sum: f64 = p.probabilities.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(p.probabilities.iter().all(|&x| x > 0.0));
        }
    }
}
