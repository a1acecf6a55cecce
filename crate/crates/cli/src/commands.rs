use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use convshape::diagnostics::reports_to_markdown;
use convshape::metrics::{
    read_shapes_csv, read_shapes_jsonl, write_shapes_csv, write_shapes_jsonl,
};
use convshape::profile::{
    classify_with_axis, profile_by_dataset, profiles_to_csv, profiles_to_markdown,
    scatter_plot_spec, Driver, Topic,
};
use convshape::synth::{generate, GeneratorSpec};
use convshape::transcript::{to_canonical_string, IngestStats};
use convshape::{
    import_tags, ingest, rank, reports_to_csv, scatter_points, shape_corpus, CorpusProfile,
    DiagnosticReport, Dialogue, MappingConfig, ReferenceDistribution, ShapeField, ShapeVector,
};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::Run;
use crate::{Command, CommonArgs, CorpusArgs, Format};

pub fn run(command: Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Ingest { corpus, common } => {
            let config = build_config(&common, Some(&corpus), |_| {})?;
            ingest_cmd(config, &common.out)
        }
        Command::Shape {
            corpus,
            common,
            format,
        } => {
            let config = build_config(&common, Some(&corpus), |_| {})?;
            shape_cmd(config, format, &common.out)
        }
        Command::Profile {
            corpus,
            common,
            format,
            epsilon,
            emit_plot,
            plot_x,
            plot_y,
        } => {
            let config = build_config(&common, Some(&corpus), |c| {
                if let Some(e) = epsilon {
                    c.balance_band = e;
                }
            })?;
            let axes = (plot_x.parse()?, plot_y.parse()?);
            profile_cmd(config, format, emit_plot.then_some(axes), &common.out)
        }
        Command::Diagnose {
            corpus,
            reference,
            common,
            format,
            bins,
            alpha,
            emit_plot,
        } => {
            let config = build_config(&common, Some(&corpus), |c| {
                if let Some(b) = bins {
                    c.binning.bins = b;
                }
                if let Some(a) = alpha {
                    c.binning.alpha = a;
                }
                if reference.is_some() {
                    c.reference = reference.clone();
                }
            })?;
            diagnose_cmd(config, format, emit_plot, &common.out)
        }
        Command::Synth {
            preset,
            count,
            common,
        } => {
            let config = build_config(&common, None, |c| {
                if let Some(p) = &preset {
                    c.synth.preset = p.clone();
                }
                if let Some(n) = count {
                    c.synth.count = n;
                }
            })?;
            synth_cmd(config, &common.out)
        }
    }
}

/// Config file (or defaults), then command-line overrides, then resolution.
fn build_config(
    common: &CommonArgs,
    corpus: Option<&CorpusArgs>,
    overrides: impl FnOnce(&mut RunConfig),
) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(corpus) = corpus {
        if !corpus.inputs.is_empty() {
            config.inputs = corpus.inputs.clone();
        }
        if corpus.mapping.is_some() {
            config.mapping = corpus.mapping.clone();
        }
        if corpus.tags.is_some() {
            config.tags = corpus.tags.clone();
        }
    }
    overrides(&mut config);
    config.resolve()
}

fn require_inputs(config: &RunConfig) -> Result<()> {
    if config.inputs.is_empty() {
        bail!(convshape::Error::InvalidConfig(
            "no input files (pass --input or list them in the config)".into()
        ));
    }
    Ok(())
}

fn mapping(run: &mut Run) -> Result<MappingConfig> {
    match run.config().mapping.clone() {
        Some(path) => {
            let bytes = run.read_input(&path)?;
            let text = String::from_utf8(bytes).context("mapping file is not UTF-8")?;
            Ok(MappingConfig::from_json(&text)?)
        }
        None => Ok(MappingConfig::canonical()),
    }
}

/// Dialogues from one file, with the run's mapping.
fn read_corpus(run: &mut Run, path: &Path, mapping: &MappingConfig) -> Result<Vec<Dialogue>> {
    let bytes = run.read_input(path)?;
    ingest(bytes.as_slice(), mapping).with_context(|| format!("ingesting {}", path.display()))
}

/// All configured inputs as one corpus, with tags applied.
fn read_corpora(run: &mut Run) -> Result<Vec<Dialogue>> {
    require_inputs(run.config())?;
    let mapping = mapping(run)?;
    let mut dialogues = Vec::new();
    for path in run.config().inputs.clone() {
        dialogues.extend(read_corpus(run, &path, &mapping)?);
    }
    if let Some(path) = run.config().tags.clone() {
        let bytes = run.read_input(&path)?;
        dialogues = import_tags(&dialogues, bytes.as_slice())
            .with_context(|| format!("applying tags from {}", path.display()))?;
    }
    Ok(dialogues)
}

/// A shape table (CSV or JSONL) or a corpus, which is shaped on the fly.
fn read_shapes(run: &mut Run, path: &Path, mapping: &MappingConfig) -> Result<Vec<ShapeVector>> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let bytes = run.read_input(path)?;
    let context = || format!("reading {}", path.display());
    if is_csv {
        return read_shapes_csv(bytes.as_slice()).with_context(context);
    }
    if looks_like_shape_table(&bytes) {
        return read_shapes_jsonl(bytes.as_slice()).with_context(context);
    }
    let dialogues = ingest(bytes.as_slice(), mapping).with_context(context)?;
    Ok(shape_corpus(&dialogues, &run.config().shape_config()))
}

/// True when the first data record of a JSONL file is a shape row.
fn looks_like_shape_table(bytes: &[u8]) -> bool {
    String::from_utf8_lossy(bytes)
        .lines()
        .filter_map(|l| serde_json::from_str::<Value>(l).ok())
        .find(|v| v.get("dialogue_id").is_some())
        .is_some_and(|v| v.get("n_utterances").is_some())
}

fn ingest_cmd(config: RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let mut run = Run::new("ingest", config);
    let dialogues = read_corpora(&mut run)?;
    run.add("corpus.jsonl", to_canonical_string(&dialogues));
    let doc = json!({ "meta": run.meta(), "stats": IngestStats::of(&dialogues) });
    run.add_json("ingest_stats.json", &doc);
    run.commit(out)
}

fn shape_cmd(config: RunConfig, format: Format, out: &Path) -> Result<Vec<PathBuf>> {
    let mut run = Run::new("shape", config);
    let dialogues = read_corpora(&mut run)?;
    let shapes = shape_corpus(&dialogues, &run.config().shape_config());
    match format {
        Format::Csv => {
            let mut bytes = run.csv_header().into_bytes();
            write_shapes_csv(&shapes, &mut bytes)?;
            run.add("shapes.csv", bytes);
        }
        Format::Json => {
            let mut bytes = serde_json::to_vec(&json!({ "meta": run.meta() }))?;
            bytes.push(b'\n');
            write_shapes_jsonl(&shapes, &mut bytes)?;
            run.add("shapes.jsonl", bytes);
        }
        Format::Md => bail!(convshape::Error::InvalidConfig(
            "shape tables are written as csv or json".into()
        )),
    }
    run.commit(out)
}

fn driver_name(d: Driver) -> &'static str {
    match d {
        Driver::AssistantDriven => "assistant-driven",
        Driver::SeekerDriven => "seeker-driven",
        Driver::Balanced => "balanced",
    }
}

fn topic_name(t: Topic) -> &'static str {
    match t {
        Topic::AssistantContributed => "assistant-contributed",
        Topic::SeekerContributed => "seeker-contributed",
        Topic::Balanced => "balanced",
    }
}

fn profile_cmd(
    config: RunConfig,
    format: Format,
    plot: Option<(ShapeField, ShapeField)>,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let mut run = Run::new("profile", config);
    require_inputs(run.config())?;
    let mapping = mapping(&mut run)?;
    let mut shapes = Vec::new();
    for path in run.config().inputs.clone() {
        shapes.extend(read_shapes(&mut run, &path, &mapping)?);
    }
    let profiles = profile_by_dataset(&shapes)?;
    let (band, axis) = (run.config().balance_band, run.config().topic_axis);
    let labels: Vec<_> = profiles
        .iter()
        .map(|p| classify_with_axis(p, band, axis))
        .collect();

    match format {
        Format::Csv => {
            let mut text = run.csv_header();
            text.push_str(&profiles_to_csv(&profiles)?);
            run.add("profile.csv", text);
            let mut quadrants = run.csv_header();
            quadrants.push_str("dataset,driver,topic\n");
            for (p, l) in profiles.iter().zip(&labels) {
                quadrants.push_str(&format!(
                    "{},{},{}\n",
                    p.dataset,
                    driver_name(l.driver),
                    topic_name(l.topic)
                ));
            }
            run.add("quadrants.csv", quadrants);
        }
        Format::Json => {
            let rows: Vec<Value> = profiles
                .iter()
                .zip(&labels)
                .map(|(p, l)| profile_json(p, driver_name(l.driver), topic_name(l.topic)))
                .collect();
            let doc = json!({
                "meta": run.meta(),
                "balance_band": band,
                "profiles": rows,
            });
            run.add_json("profile.json", &doc);
        }
        Format::Md => {
            let mut text = run.markdown_header();
            text.push_str(&profiles_to_markdown(&profiles));
            text.push_str(&format!("\nQuadrants (balance band {band}):\n\n"));
            for (p, l) in profiles.iter().zip(&labels) {
                text.push_str(&format!(
                    "- {}: {}, {}\n",
                    p.dataset,
                    driver_name(l.driver),
                    topic_name(l.topic)
                ));
            }
            run.add("profile.md", text);
        }
    }

    if let Some((x, y)) = plot {
        let points = scatter_points(&profiles, x.name(), y.name())?;
        let mut spec = scatter_plot_spec(&points, x, y);
        spec["usermeta"] = run.meta();
        run.add_json("profile.vl.json", &spec);
    }
    run.commit(out)
}

fn profile_json(p: &CorpusProfile, driver: &str, topic: &str) -> Value {
    let fields: serde_json::Map<String, Value> = ShapeField::SUMMARY
        .into_iter()
        .map(|f| {
            let s = p.stats(f);
            (
                f.name().to_string(),
                json!({ "mean": s.mean, "std": s.std }),
            )
        })
        .collect();
    json!({
        "dataset": p.dataset,
        "n_dialogues": p.n_dialogues,
        "fields": fields,
        "driver": driver,
        "topic": topic,
    })
}

/// `label=path` or a bare path labelled by its file stem.
fn labelled(input: &Path) -> (String, PathBuf) {
    let raw = input.to_string_lossy();
    if let Some((label, path)) = raw.split_once('=') {
        if !label.is_empty() && !path.is_empty() {
            return (label.to_string(), PathBuf::from(path));
        }
    }
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| raw.into_owned());
    (stem, input.to_path_buf())
}

fn diagnose_cmd(
    config: RunConfig,
    format: Format,
    emit_plot: bool,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let mut run = Run::new("diagnose", config);
    require_inputs(run.config())?;
    let Some(reference_input) = run.config().reference.clone() else {
        bail!(convshape::Error::InvalidConfig(
            "diagnose needs a reference corpus (--reference)".into()
        ));
    };
    let mapping = mapping(&mut run)?;
    let (reference_label, reference_path) = labelled(&reference_input);
    let reference_shapes = read_shapes(&mut run, &reference_path, &mapping)?;
    let reference =
        ReferenceDistribution::build(&reference_label, &reference_shapes, run.config().binning)?;

    let rules = run.config().rules;
    let mut reports: Vec<DiagnosticReport> = Vec::new();
    for input in run.config().inputs.clone() {
        let (label, path) = labelled(&input);
        let shapes = read_shapes(&mut run, &path, &mapping)?;
        reports.push(reference.diagnose(&label, &shapes, &rules)?);
    }
    let reports = rank(reports);

    match format {
        Format::Csv => {
            let mut text = run.csv_header();
            text.push_str(&reports_to_csv(&reports)?);
            run.add("diagnostics.csv", text);
        }
        Format::Json => {
            let doc = json!({ "meta": run.meta(), "reports": reports });
            run.add_json("diagnostics.json", &doc);
        }
        Format::Md => {
            let mut text = run.markdown_header();
            text.push_str(&format!(
                "Reference: {} ({} dialogues), cross-entropy in {}\n\n",
                reference.label, reference.n_dialogues, reference.log_base
            ));
            text.push_str(&reports_to_markdown(&reports));
            run.add("diagnostics.md", text);
        }
    }
    let doc = json!({ "meta": run.meta(), "reference": reference });
    run.add_json("reference.json", &doc);

    if emit_plot {
        let values: Vec<Value> = reports
            .iter()
            .map(|r| json!({ "model": r.model, "total": r.total, "label": r.label.as_str() }))
            .collect();
        let spec = json!({
            "$schema": "https://vega.github.io/schema/vega-lite/v5.json",
            "usermeta": run.meta(),
            "data": { "values": values },
            "mark": "bar",
            "encoding": {
                "y": { "field": "model", "type": "nominal", "sort": null },
                "x": { "field": "total", "type": "quantitative", "title": "mean cross-entropy (nats)" },
                "color": { "field": "label", "type": "nominal" }
            }
        });
        run.add_json("diagnostics.vl.json", &spec);
    }
    run.commit(out)
}

fn synth_cmd(config: RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = GeneratorSpec::preset(&config.synth.preset)?;
    let dialogues = generate(&spec, config.seed, config.synth.count)?;
    let mut run = Run::new("synth", config);
    run.add("corpus.jsonl", to_canonical_string(&dialogues));
    run.commit(out)
}
