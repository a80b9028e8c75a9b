//! Pipeline configuration, loaded from TOML. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conllu::ErrorMode;
use crate::features::{parse_channels, BinBoundaries, Channel, FeatureError, DEFAULT_BOUNDARIES};
use crate::pairs::ExtractionConfig;
use crate::trainer::Hyperparams;
use crate::vocab::DEFAULT_SMOOTHING;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphLayer {
    Basic,
    #[default]
    Enhanced,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MalformedSentences {
    Abort,
    #[default]
    Skip,
}

impl From<MalformedSentences> for ErrorMode {
    fn from(m: MalformedSentences) -> Self {
        match m {
            MalformedSentences::Abort => ErrorMode::Abort,
            MalformedSentences::Skip => ErrorMode::Skip,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub layer: GraphLayer,
    pub malformed: MalformedSentences,
    /// Sum duplicate pairs into weighted lines in the pair file.
    pub aggregate: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            layer: GraphLayer::Enhanced,
            malformed: MalformedSentences::Skip,
            aggregate: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabConfig {
    pub min_count_term: u64,
    pub min_count_context: u64,
    /// Exponent of the negative-sampling distribution.
    pub smoothing: f64,
}

impl Default for VocabConfig {
    fn default() -> Self {
        VocabConfig {
            min_count_term: 10,
            min_count_context: 10,
            smoothing: DEFAULT_SMOOTHING,
        }
    }
}

/// How pairs from several pair files are combined for training.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceOrder {
    /// Mix sources so each advances in proportion to its size.
    #[default]
    Interleave,
    Concatenate,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourcesConfig {
    pub order: SourceOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub boundaries: Vec<f64>,
    /// `all` or a comma-separated list such as `context:context,head:head`.
    pub channels: String,
    pub dense: bool,
    /// Channel and threshold used by `eval`.
    pub eval_channel: String,
    pub threshold: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            boundaries: DEFAULT_BOUNDARIES.to_vec(),
            channels: "all".to_owned(),
            dense: false,
            eval_channel: "context:context".to_owned(),
            threshold: 0.0,
        }
    }
}

impl FeatureConfig {
    pub fn boundaries(&self) -> Result<BinBoundaries, FeatureError> {
        BinBoundaries::new(self.boundaries.clone())
    }

    pub fn channels(&self) -> Result<Vec<Channel>, FeatureError> {
        parse_channels(&self.channels)
    }

    pub fn eval_channel(&self) -> Result<Channel, FeatureError> {
        self.eval_channel.parse()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub gazetteer: Option<PathBuf>,
    pub checkpoint_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: CorpusConfig,
    pub extraction: ExtractionConfig,
    pub vocab: VocabConfig,
    pub sources: SourcesConfig,
    pub training: Hyperparams,
    pub features: FeatureConfig,
    pub paths: PathsConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigFileError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },

    #[error("invalid config: {0}")]
    Invalid(String),
}

impl PipelineConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|source| ConfigFileError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks cross-field constraints of every section.
    pub fn validate(&self) -> Result<(), ConfigFileError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigFileError::Invalid(e.to_string());
        self.extraction.validate().map_err(|e| invalid(&e))?;
        self.training.validate().map_err(|e| invalid(&e))?;
        self.features.boundaries().map_err(|e| invalid(&e))?;
        self.features.channels().map_err(|e| invalid(&e))?;
        self.features.eval_channel().map_err(|e| invalid(&e))?;
        if self.vocab.smoothing.is_nan() || self.vocab.smoothing <= 0.0 {
            return Err(ConfigFileError::Invalid(
                "vocab.smoothing must be positive".into(),
            ));
        }
        Ok(())
    }
}
