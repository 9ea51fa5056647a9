//! Run configuration shared by every command. Stored as TOML, overridable
//! from the command line and copied verbatim into model archives.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{ColumnSpec, CorpusFormat, DEFAULT_MINORITY_THRESHOLD};
use crate::dat::{DatConfig, DEFAULT_MEMORY_CAPACITY, DEFAULT_REWARD_EPSILON};
use crate::error::{Error, Result};
use crate::features::{NGram, DEFAULT_EMBEDDING_DIM};
use crate::nn::{Activation, OptimizerConfig, OptimizerKind};
use crate::tagger::TaggerConfig;

pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.95;
pub const DEFAULT_UPDATES_SLOTS: usize = 16;
pub const DEFAULT_UPDATES_CONLL: usize = 10;
pub const DEFAULT_DAT_EPOCHS: usize = 3000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub format: CorpusFormat,
    pub token_col: usize,
    pub label_col: usize,
    pub minority_threshold: f64,

    pub embedding_dim: usize,
    /// Window of the augmented tagger's state vectors, and of the base
    /// tagger unless `base_ngram` is set.
    pub ngram: usize,
    pub base_ngram: Option<usize>,
    pub min_word_count: usize,
    pub base_hidden: Vec<usize>,
    pub base_epochs: usize,
    pub base_learning_rate: f64,
    pub base_batch_size: usize,

    pub gamma: f64,
    pub memory_capacity: usize,
    /// Replay updates per environment step; 16 for slot corpora and 10 for
    /// CoNLL corpora when unset.
    pub updates_per_step: Option<usize>,
    pub dat_epochs: usize,
    pub dat_hidden: Vec<usize>,
    pub dat_learning_rate: f64,
    pub max_steps: Option<usize>,
    pub exploration: f64,
    pub reward_epsilon: f64,
    pub confidence_threshold: f64,

    pub optimizer: OptimizerKind,
    pub activation: Activation,
    /// Seeds data shuffling, embedding and network initialisation, and
    /// initial-state sampling.
    pub init_seed: u64,
    /// Seeds replay-memory sampling.
    pub replay_seed: u64,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let columns = ColumnSpec::default();
        RunConfig {
            train: None,
            test: None,
            output_dir: None,
            format: CorpusFormat::Conll,
            token_col: columns.token_col,
            label_col: columns.label_col,
            minority_threshold: DEFAULT_MINORITY_THRESHOLD,
            embedding_dim: DEFAULT_EMBEDDING_DIM,
            ngram: 3,
            base_ngram: None,
            min_word_count: 1,
            base_hidden: vec![64],
            base_epochs: 20,
            base_learning_rate: 5e-3,
            base_batch_size: 16,
            gamma: 0.9,
            memory_capacity: DEFAULT_MEMORY_CAPACITY,
            updates_per_step: None,
            dat_epochs: DEFAULT_DAT_EPOCHS,
            dat_hidden: vec![100, 100],
            dat_learning_rate: 1e-3,
            max_steps: None,
            exploration: 0.0,
            reward_epsilon: DEFAULT_REWARD_EPSILON,
            confidence_threshold: DEFAULT_CONFIDENCE_THRESHOLD,
            optimizer: OptimizerKind::Adam,
            activation: Activation::Tanh,
            init_seed: 1,
            replay_seed: 2,
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn columns(&self) -> ColumnSpec {
        ColumnSpec {
            token_col: self.token_col,
            label_col: self.label_col,
        }
    }

    pub fn updates_per_step(&self) -> usize {
        self.updates_per_step.unwrap_or(match self.format {
            CorpusFormat::Slots => DEFAULT_UPDATES_SLOTS,
            CorpusFormat::Conll => DEFAULT_UPDATES_CONLL,
        })
    }

    pub fn tagger_config(&self) -> TaggerConfig {
        TaggerConfig {
            embedding_dim: self.embedding_dim,
            ngram: self.base_ngram.unwrap_or(self.ngram),
            hidden: self.base_hidden.clone(),
            activation: self.activation,
            epochs: self.base_epochs,
            optimizer: OptimizerConfig {
                kind: self.optimizer,
                learning_rate: self.base_learning_rate,
                batch_size: self.base_batch_size,
            },
            min_word_count: self.min_word_count,
            seed: self.init_seed,
        }
    }

    pub fn dat_config(&self) -> DatConfig {
        DatConfig {
            gamma: self.gamma,
            reward_epsilon: self.reward_epsilon,
            ngram: self.ngram,
            hidden: self.dat_hidden.clone(),
            activation: self.activation,
            optimizer: OptimizerConfig {
                kind: self.optimizer,
                learning_rate: self.dat_learning_rate,
                batch_size: self.updates_per_step(),
            },
            memory_capacity: self.memory_capacity,
            epochs: self.dat_epochs,
            max_steps: self.max_steps,
            exploration: self.exploration,
            init_seed: self.init_seed,
            replay_seed: self.replay_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.token_col == self.label_col {
            return bad("token and label columns must differ".into());
        }
        if !(self.minority_threshold > 0.0 && self.minority_threshold < 1.0) {
            return bad(format!("minority_threshold must lie in (0, 1), got {}", self.minority_threshold));
        }
        if self.embedding_dim == 0 {
            return bad("embedding_dim must be positive".into());
        }
        NGram::new(self.ngram)?;
        if let Some(n) = self.base_ngram {
            NGram::new(n)?;
        }
        if self.base_hidden.contains(&0) || self.dat_hidden.contains(&0) {
            return bad("hidden layer sizes must be positive".into());
        }
        if self.min_word_count == 0 {
            return bad("min_word_count must be at least 1".into());
        }
        // Zero is allowed: it disables the filter entirely.
        if !(0.0..=1.0).contains(&self.confidence_threshold) {
            return bad(format!(
                "confidence_threshold must lie in [0, 1], got {}",
                self.confidence_threshold
            ));
        }
        if self.updates_per_step == Some(0) {
            return bad("updates_per_step must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        self.tagger_config().optimizer.validate()?;
        self.dat_config().validate()
    }
}
