use convshape::metrics::{
    read_shapes_csv, read_shapes_jsonl, write_shapes_csv, write_shapes_jsonl,
};
use convshape::profile::{classify_with_axis, Driver, Topic, TopicAxis, DEFAULT_BALANCE_BAND};
use convshape::synth::{generate, GeneratorSpec};
use convshape::transcript::to_canonical_string;
use convshape::{
    classify, diagnose, ingest, profile, rank, shape_corpus, Binning, DevianceLabel, DevianceRules,
    MappingConfig, PerRole, ShapeConfig, ShapeField,
};

fn elicitation_spec() -> GeneratorSpec {
    GeneratorSpec {
        label: "elicitation".into(),
        question_rate: PerRole::new(0.9, 0.0),
        information_rate: PerRole::new(0.2, 0.4),
        repetition_rate: PerRole::new(0.3, 0.5),
        min_utterances: 8,
        max_utterances: 16,
    }
}

#[test]
fn assistant_interview_lands_in_its_quadrant() {
    let corpus = generate(&elicitation_spec(), 1, 400).unwrap();
    let shapes = shape_corpus(&corpus, &ShapeConfig::default());
    let p = profile(&shapes, "elicitation").unwrap();
    assert!(p.mean(ShapeField::DeltaQuestion) > 0.95);
    let label = classify(&p, DEFAULT_BALANCE_BAND);
    assert_eq!(label.driver, Driver::AssistantDriven);
    assert_eq!(label.topic, Topic::SeekerContributed);
    let by_rep = classify_with_axis(&p, DEFAULT_BALANCE_BAND, TopicAxis::Repetition);
    assert_eq!(by_rep.topic, Topic::SeekerContributed);
}

#[test]
fn canonical_corpus_survives_a_round_trip() {
    let corpus = generate(&GeneratorSpec::parrot(), 9, 50).unwrap();
    let text = to_canonical_string(&corpus);
    let back = ingest(text.as_bytes(), &MappingConfig::canonical()).unwrap();
    assert_eq!(back, corpus);
}

#[test]
fn shape_tables_round_trip() {
    let corpus = generate(&GeneratorSpec::reference(), 2, 60).unwrap();
    let shapes = shape_corpus(&corpus, &ShapeConfig::default());

    let mut csv = Vec::new();
    write_shapes_csv(&shapes, &mut csv).unwrap();
    let from_csv = read_shapes_csv(csv.as_slice()).unwrap();
    let mut jsonl = Vec::new();
    write_shapes_jsonl(&shapes, &mut jsonl).unwrap();
    let from_jsonl = read_shapes_jsonl(jsonl.as_slice()).unwrap();

    assert_eq!(from_jsonl.len(), shapes.len());
    for ((s, c), j) in shapes.iter().zip(&from_csv).zip(&from_jsonl) {
        assert_eq!(c.counts, s.counts);
        assert_eq!(j.counts, s.counts);
        for f in ShapeField::SUMMARY {
            assert_eq!(c.field(f), s.field(f));
            assert_eq!(j.field(f), s.field(f));
        }
    }
}

#[test]
fn deviant_generators_are_labelled_and_ranked() {
    let cfg = ShapeConfig::default();
    let rules = DevianceRules::default();
    let reference = shape_corpus(
        &generate(&GeneratorSpec::reference(), 100, 500).unwrap(),
        &cfg,
    );
    let mut reports = Vec::new();
    for (spec, seed, expected) in [
        (GeneratorSpec::reference(), 101, DevianceLabel::Typical),
        (
            GeneratorSpec::interviewer(),
            102,
            DevianceLabel::Interviewer,
        ),
        (GeneratorSpec::talker(), 103, DevianceLabel::Talker),
        (GeneratorSpec::parrot(), 104, DevianceLabel::Parrot),
    ] {
        let model = shape_corpus(&generate(&spec, seed, 500).unwrap(), &cfg);
        let report = diagnose(&spec.label, &model, &reference, &rules, Binning::default()).unwrap();
        assert_eq!(report.label, expected, "{}", spec.label);
        reports.push(report);
    }
    let ranked = rank(reports);
    assert_eq!(ranked[0].model, "reference");
}
