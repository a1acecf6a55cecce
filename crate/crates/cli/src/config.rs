use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use convshape::lexical::load_term_list;
use convshape::profile::{TopicAxis, DEFAULT_BALANCE_BAND};
use convshape::{Binning, DevianceRules, QuestionPolicy, ShapeConfig, TokenizerConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything a run depends on besides the bytes of its inputs.
///
/// Term-list files are folded into `tokenizer` when the config is resolved,
/// so a persisted config is self-contained and re-runs without them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tokenizer: TokenizerConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclude_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopwords_file: Option<PathBuf>,
    pub question_policy: QuestionPolicy,
    pub balance_band: f64,
    pub topic_axis: TopicAxis,
    pub rules: DevianceRules,
    pub binning: Binning,
    pub seed: u64,
    pub inputs: Vec<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub tags: Option<PathBuf>,
    /// Reference corpus for diagnostics.
    pub reference: Option<PathBuf>,
    pub synth: SynthSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSettings {
    pub preset: String,
    pub count: usize,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            preset: "reference".into(),
            count: 100,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tokenizer: TokenizerConfig::default(),
            exclude_file: None,
            stopwords_file: None,
            question_policy: QuestionPolicy::default(),
            balance_band: DEFAULT_BALANCE_BAND,
            topic_axis: TopicAxis::default(),
            rules: DevianceRules::default(),
            binning: Binning::default(),
            seed: 0,
            inputs: Vec::new(),
            mapping: None,
            tags: None,
            reference: None,
            synth: SynthSettings::default(),
        }
    }
}

impl RunConfig {
    /// Reads a config file; relative term-list paths are taken from the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for file in [&mut config.exclude_file, &mut config.stopwords_file]
            .into_iter()
            .flatten()
        {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
        Ok(config)
    }

    /// Folds term-list files into the tokenizer and checks every setting.
    pub fn resolve(mut self) -> Result<Self> {
        if let Some(path) = self.stopwords_file.take() {
            self.tokenizer.stopwords = read_terms(&path)?;
        }
        if let Some(path) = self.exclude_file.take() {
            self.tokenizer.exclude.extend(read_terms(&path)?);
        }
        self.binning.validate()?;
        self.rules.validate()?;
        if !(0.0..1.0).contains(&self.balance_band) {
            anyhow::bail!(convshape::Error::InvalidConfig(format!(
                "balance band must lie in [0, 1), got {}",
                self.balance_band
            )));
        }
        Ok(self)
    }

    pub fn shape_config(&self) -> ShapeConfig {
        ShapeConfig {
            tokenizer: self.tokenizer.clone(),
            question_policy: self.question_policy.clone(),
        }
    }

    pub fn canonical_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json()))
    }
}

fn read_terms(path: &Path) -> Result<std::collections::BTreeSet<String>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(load_term_list(BufReader::new(file))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default() {
        let c: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"bins": 3}"#).is_err());
    }

    #[test]
    fn persisted_config_reloads_to_the_same_digest() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("ex.txt"), "really\ngood\n").unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"exclude_file": "ex.txt", "seed": 4}"#).unwrap();
        let resolved = RunConfig::load(&path).unwrap().resolve().unwrap();
        assert!(resolved.tokenizer.exclude.contains("really"));
        assert!(resolved.exclude_file.is_none());

        let again = dir.path().join("again.json");
        std::fs::write(&again, resolved.canonical_json()).unwrap();
        let reloaded = RunConfig::load(&again).unwrap().resolve().unwrap();
        assert_eq!(reloaded.digest(), resolved.digest());
    }

    #[test]
    fn invalid_settings_fail_resolution() {
        let c = RunConfig {
            balance_band: 1.5,
            ..Default::default()
        };
        assert!(c.resolve().is_err());
    }
}
