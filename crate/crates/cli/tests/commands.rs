use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn convshape(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convshape"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CONVSHAPE_CONFIG")
        .output()
        .unwrap()
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn profile_of_a_single_dialogue_has_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(convshape(
        &["synth", "--count", "1", "--seed", "2", "--out", "syn"],
        d,
    ));
    ok(convshape(
        &["shape", "-i", "syn/corpus.jsonl", "--out", "sh"],
        d,
    ));
    ok(convshape(
        &[
            "profile",
            "-i",
            "sh/shapes.csv",
            "--format",
            "json",
            "--out",
            "pr",
        ],
        d,
    ));
    let doc: Value =
        serde_json::from_str(&fs::read_to_string(d.join("pr/profile.json")).unwrap()).unwrap();
    let fields = doc["profiles"][0]["fields"].as_object().unwrap();
    assert_eq!(fields.len(), 8);
    for stats in fields.values() {
        assert_eq!(stats["std"], 0.0);
    }
    assert_eq!(doc["profiles"][0]["n_dialogues"], 1);
}

#[test]
fn typical_model_outranks_an_interviewer() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (preset, seed, out) in [
        ("reference", "1", "ref"),
        ("reference", "2", "typ"),
        ("interviewer", "3", "int"),
    ] {
        ok(convshape(
            &[
                "synth", "--preset", preset, "--count", "400", "--seed", seed, "--out", out,
            ],
            d,
        ));
    }
    ok(convshape(
        &[
            "diagnose",
            "--reference",
            "human=ref/corpus.jsonl",
            "-i",
            "typical=typ/corpus.jsonl",
            "-i",
            "interviewer=int/corpus.jsonl",
            "--format",
            "csv",
            "--out",
            "diag",
        ],
        d,
    ));
    let text = fs::read_to_string(d.join("diag/diagnostics.csv")).unwrap();
    let rows = data_lines(&text);
    assert!(rows[0].starts_with("model,"));
    assert!(rows[1].starts_with("typical,"), "{text}");
    assert!(rows[1].contains(",Typical,"));
    assert!(rows[2].starts_with("interviewer,"));
    assert!(rows[2].contains(",Interviewer,"));
}

#[test]
fn every_output_carries_the_config_digest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(convshape(&["synth", "--count", "20", "--out", "syn"], d));
    ok(convshape(
        &[
            "shape",
            "-i",
            "syn/corpus.jsonl",
            "--format",
            "json",
            "--out",
            "sh",
        ],
        d,
    ));
    ok(convshape(
        &[
            "profile",
            "-i",
            "sh/shapes.jsonl",
            "--emit-plot",
            "--out",
            "pr",
        ],
        d,
    ));
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(d.join("pr/manifest.json")).unwrap()).unwrap();
    let digest = manifest["config_digest"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    for name in ["profile.md", "profile.vl.json"] {
        assert!(
            fs::read_to_string(d.join("pr").join(name))
                .unwrap()
                .contains(digest),
            "{name}"
        );
    }
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    assert_eq!(manifest["inputs"][0]["path"], "sh/shapes.jsonl");
    let first = fs::read_to_string(d.join("sh/shapes.jsonl")).unwrap();
    assert!(first.lines().next().unwrap().contains("config_digest"));
}

#[test]
fn failures_print_one_structured_line_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("bad.jsonl"),
        "{\"dialogue_id\":\"a\",\"dataset\":\"x\",\"turn\":0,\"role\":\"seeker\",\"text\":\"hi\"}\n{\"dialogue_id\":\"a\",\"dataset\":\"x\",\"turn\":1,\"role\":\"narrator\",\"text\":\"hm\"}\n",
    )
    .unwrap();
    let out = convshape(&["shape", "-i", "bad.jsonl", "--out", "sh"], d);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    let line: Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(line["status"], "error");
    assert_eq!(line["kind"], "unknown_speaker");
    assert!(line["message"].as_str().unwrap().contains("line 2"));
    assert!(!d.join("sh").exists());
}

#[test]
fn source_records_are_mapped_onto_the_canonical_form() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("src.jsonl"),
        "{\"conv\":7,\"who\":\"USER\",\"msg\":\"Any good sci-fi?\"}\n{\"conv\":7,\"who\":\"SYSTEM\",\"msg\":\"Try Solaris. Solaris is slow but great.\"}\n",
    )
    .unwrap();
    fs::write(
        d.join("map.json"),
        r#"{"id_field":"conv","role_field":"who","role_aliases":{"USER":"seeker","SYSTEM":"assistant"},"text_field":"msg","default_dataset":"movies"}"#,
    )
    .unwrap();
    ok(convshape(
        &[
            "ingest",
            "-i",
            "src.jsonl",
            "--mapping",
            "map.json",
            "--out",
            "canon",
        ],
        d,
    ));
    let corpus = fs::read_to_string(d.join("canon/corpus.jsonl")).unwrap();
    let first: Value = serde_json::from_str(corpus.lines().next().unwrap()).unwrap();
    assert_eq!(first["dialogue_id"], "7");
    assert_eq!(first["role"], "seeker");
    assert_eq!(first["dataset"], "movies");
    ok(convshape(
        &["shape", "-i", "canon/corpus.jsonl", "--out", "sh"],
        d,
    ));
    let shapes = fs::read_to_string(d.join("sh/shapes.csv")).unwrap();
    assert_eq!(data_lines(&shapes).len(), 2);
}

#[test]
fn config_path_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("run.json"),
        r#"{"seed": 42, "synth": {"preset": "parrot", "count": 3}}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_convshape"))
        .args(["synth", "--out", "syn"])
        .current_dir(d)
        .env("CONVSHAPE_CONFIG", "run.json")
        .output()
        .unwrap();
    ok(out);
    let corpus = fs::read_to_string(d.join("syn/corpus.jsonl")).unwrap();
    assert!(
        corpus.starts_with("{\"dialogue_id\":\"parrot-42-0\""),
        "{corpus}"
    );
}
