//! Command-line front end.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::archive::ModelArchive;
use crate::config::RunConfig;
use crate::corpus::{read_corpus, tag_statistics, CorpusFormat, TagInventory};
use crate::error::{Error, Result};
use crate::nn::{Activation, OptimizerKind};
use crate::pipeline::{eval_stage, infer_from_predictions, infer_stage, train_base_stage, train_dat_stage};
use crate::synthetic::{generate, to_conll, SyntheticConfig};
use crate::tagger::PredictionSet;

#[derive(Debug, Parser)]
#[command(name = "augtag", version, about = "Base tagger plus Q-learning relabelling of low-confidence tokens")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the base tagger and write a model archive.
    TrainBase {
        #[command(flatten)]
        config: ConfigArgs,
        /// Destination archive.
        #[arg(long)]
        output: PathBuf,
        /// Optional per-epoch loss log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Train the augmented tagger on top of an archived base tagger.
    TrainDat {
        #[command(flatten)]
        config: ConfigArgs,
        /// Archive holding the base tagger.
        #[arg(long)]
        archive: PathBuf,
        /// Base-tagger distributions for the training corpus, e.g. from an
        /// external tagger. Defaults to the archived tagger's output.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// Per-episode training log (iteration, loss, episode length, epsilon).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Tag a corpus, relabelling tokens below the confidence threshold.
    Infer {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        archive: PathBuf,
        /// Base-tagger distributions to use instead of the archived tagger.
        #[arg(long)]
        base_predictions: Option<PathBuf>,
        /// Prediction file to write.
        #[arg(long)]
        output: PathBuf,
        /// Key-value filter statistics file.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Score a prediction file against a gold corpus.
    Eval {
        #[command(flatten)]
        config: ConfigArgs,
        /// Gold corpus aligned with the prediction file.
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        /// Archive providing the training inventory and minority partition.
        #[arg(long, conflicts_with = "train", required_unless_present = "train")]
        archive: Option<PathBuf>,
        /// Human-readable report; printed to stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Machine-readable key-value report.
        #[arg(long)]
        kv: Option<PathBuf>,
    },
    /// Minority/majority tag statistics of a corpus.
    Stats {
        #[command(flatten)]
        config: ConfigArgs,
        /// Corpus to analyse; defaults to the configured training corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic train/test corpus pair in two-column CoNLL format.
    Synth {
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
        #[arg(long, default_value_t = 5000)]
        tokens: usize,
        #[arg(long, default_value_t = 2000)]
        test_tokens: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Configuration file plus per-field overrides.
#[derive(Debug, Default, Args)]
pub struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<CorpusFormat>,
    #[arg(long)]
    pub token_col: Option<usize>,
    #[arg(long)]
    pub label_col: Option<usize>,
    #[arg(long)]
    pub minority_threshold: Option<f64>,
    #[arg(long)]
    pub embedding_dim: Option<usize>,
    #[arg(long)]
    pub ngram: Option<usize>,
    #[arg(long)]
    pub base_ngram: Option<usize>,
    #[arg(long)]
    pub min_word_count: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub base_hidden: Option<Vec<usize>>,
    #[arg(long)]
    pub base_epochs: Option<usize>,
    #[arg(long)]
    pub base_learning_rate: Option<f64>,
    #[arg(long)]
    pub base_batch_size: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub memory_capacity: Option<usize>,
    /// Replay updates per environment step.
    #[arg(long)]
    pub updates_per_step: Option<usize>,
    #[arg(long)]
    pub dat_epochs: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub dat_hidden: Option<Vec<usize>>,
    #[arg(long)]
    pub dat_learning_rate: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub exploration: Option<f64>,
    #[arg(long)]
    pub reward_epsilon: Option<f64>,
    /// Confidence threshold below which tokens are relabelled.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_parser = parse_optimizer)]
    pub optimizer: Option<OptimizerKind>,
    #[arg(long, value_parser = parse_activation)]
    pub activation: Option<Activation>,
    #[arg(long)]
    pub init_seed: Option<u64>,
    #[arg(long)]
    pub replay_seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

fn parse_optimizer(s: &str) -> std::result::Result<OptimizerKind, String> {
    match s {
        "adam" => Ok(OptimizerKind::Adam),
        "sgd" => Ok(OptimizerKind::Sgd),
        _ => Err(format!("unknown optimizer `{s}` (adam, sgd)")),
    }
}

fn parse_activation(s: &str) -> std::result::Result<Activation, String> {
    match s {
        "tanh" => Ok(Activation::Tanh),
        "relu" => Ok(Activation::Relu),
        _ => Err(format!("unknown activation `{s}` (tanh, relu)")),
    }
}

impl ConfigArgs {
    /// `base` (e.g. an archive's configuration) is replaced by `--config`
    /// when given; flags then override single fields.
    pub fn resolve(&self, base: Option<&RunConfig>) -> Result<RunConfig> {
        let mut c = match (&self.config, base) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(b)) => b.clone(),
            (None, None) => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = &self.$field { c.$target = v.clone(); })*
            };
        }
        set!(
            format => format, token_col => token_col, label_col => label_col,
            minority_threshold => minority_threshold, embedding_dim => embedding_dim,
            ngram => ngram, min_word_count => min_word_count, base_hidden => base_hidden,
            base_epochs => base_epochs, base_learning_rate => base_learning_rate,
            base_batch_size => base_batch_size, gamma => gamma, memory_capacity => memory_capacity,
            dat_epochs => dat_epochs, dat_hidden => dat_hidden, dat_learning_rate => dat_learning_rate,
            exploration => exploration, reward_epsilon => reward_epsilon,
            threshold => confidence_threshold, optimizer => optimizer, activation => activation,
            init_seed => init_seed, replay_seed => replay_seed, workers => workers,
        );
        if self.train.is_some() {
            c.train = self.train.clone();
        }
        if self.test.is_some() {
            c.test = self.test.clone();
        }
        if self.updates_per_step.is_some() {
            c.updates_per_step = self.updates_per_step;
        }
        if self.max_steps.is_some() {
            c.max_steps = self.max_steps;
        }
        if self.base_ngram.is_some() {
            c.base_ngram = self.base_ngram;
        }
        c.validate()?;
        Ok(c)
    }
}

fn required<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::InvalidConfig(format!("no {what} corpus given (use --{what} or the config file)")))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn read_predictions(path: &Path) -> Result<PredictionSet> {
    PredictionSet::read(BufReader::new(File::open(path)?))
}

fn load_train(config: &RunConfig, inventory: Option<&TagInventory>) -> Result<crate::corpus::Corpus> {
    let mut corpus = read_corpus(required(&config.train, "train")?, config.format, config.columns(), inventory)?;
    corpus.inventory.set_minority_threshold(config.minority_threshold)?;
    Ok(corpus)
}

/// Runs one command, writing its summary to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::TrainBase { config, output, log } => {
            let config = config.resolve(None)?;
            let train = load_train(&config, None)?;
            let (archive, train_log) = train_base_stage(&config, &train)?;
            archive.save(&output)?;
            if let Some(path) = log {
                let mut f = create(&path)?;
                writeln!(f, "epoch\tloss")?;
                for (e, l) in train_log.epoch_losses.iter().enumerate() {
                    writeln!(f, "{}\t{l}", e + 1)?;
                }
                f.flush()?;
            }
            writeln!(out, "initial_loss={}", train_log.initial_loss)?;
            writeln!(out, "final_loss={}", train_log.final_loss)?;
            writeln!(out, "train_accuracy={}", train_log.train_accuracy)?;
            writeln!(out, "archive={}", output.display())?;
        }
        Command::TrainDat {
            config,
            archive,
            predictions,
            output,
            log,
        } => {
            let base = ModelArchive::load(&archive)?;
            let config = config.resolve(Some(&base.config))?;
            let train = load_train(&config, Some(&base.inventory))?;
            let external = predictions.as_deref().map(read_predictions).transpose()?;
            let (trained, train_log) = train_dat_stage(&base, &config, &train, external.as_ref())?;
            trained.save(&output)?;
            if let Some(path) = log {
                let mut f = create(&path)?;
                train_log.write(&mut f)?;
                f.flush()?;
            }
            let n = train_log.episodes.len();
            let q = n / 4;
            writeln!(out, "episodes={n}")?;
            if q > 0 {
                writeln!(out, "mean_length_first_quarter={}", train_log.mean_length(0..q))?;
                writeln!(out, "mean_length_last_quarter={}", train_log.mean_length(n - q..n))?;
            }
            writeln!(out, "archive={}", output.display())?;
        }
        Command::Infer {
            config,
            archive,
            base_predictions,
            output,
            stats,
        } => {
            let model = ModelArchive::load(&archive)?;
            let config = config.resolve(Some(&model.config))?;
            let test_path = required(&config.test, "test")?;
            let test = read_corpus(test_path, config.format, config.columns(), Some(&model.inventory))?;
            let outcome = match base_predictions {
                Some(path) => infer_from_predictions(
                    &model,
                    &test,
                    read_predictions(&path)?,
                    config.confidence_threshold,
                    config.workers,
                )?,
                None => infer_stage(&model, &test, config.confidence_threshold, config.workers)?,
            };
            let mut f = create(&output)?;
            outcome.predictions.write(&mut f)?;
            f.flush()?;
            if outcome.base_only {
                eprintln!("warning: archive has no augmented tagger; all labels come from the base tagger");
            }
            let mut summary = Vec::new();
            writeln!(summary, "threshold={}", config.confidence_threshold)?;
            writeln!(summary, "tokens={}", outcome.total)?;
            writeln!(summary, "filtered={}", outcome.filtered)?;
            writeln!(summary, "filtered_fraction={}", outcome.filtered_fraction())?;
            writeln!(summary, "base_only={}", outcome.base_only)?;
            out.write_all(&summary)?;
            if let Some(path) = stats {
                std::fs::write(path, &summary)?;
            }
        }
        Command::Eval {
            config,
            gold,
            predictions,
            archive,
            report,
            kv,
        } => {
            let model = archive.as_deref().map(ModelArchive::load).transpose()?;
            let config = config.resolve(model.as_ref().map(|m| &m.config))?;
            let mut inventory = match &model {
                Some(m) => m.inventory.clone(),
                None => load_train(&config, None)?.inventory,
            };
            inventory.set_minority_threshold(config.minority_threshold)?;
            let gold = read_corpus(&gold, config.format, config.columns(), Some(&inventory))?;
            let result = eval_stage(&gold, &read_predictions(&predictions)?, &inventory)?;
            match report {
                Some(path) => {
                    let mut f = create(&path)?;
                    result.write_text(&mut f)?;
                    f.flush()?;
                }
                None => result.write_text(&mut *out)?,
            }
            if let Some(path) = kv {
                let mut f = create(&path)?;
                result.write_key_values(&mut f)?;
                f.flush()?;
            }
            writeln!(out, "f1={}", result.chunks.f1)?;
        }
        Command::Stats {
            config,
            corpus,
            output,
        } => {
            let mut config = config.resolve(None)?;
            if corpus.is_some() {
                config.train = corpus;
            }
            let corpus = load_train(&config, None)?;
            let stats = tag_statistics(&corpus)?;
            match output {
                Some(path) => {
                    let mut f = create(&path)?;
                    stats.write_report(&corpus.inventory, &mut f)?;
                    f.flush()?;
                }
                None => stats.write_report(&corpus.inventory, &mut *out)?,
            }
        }
        Command::Synth {
            train_out,
            test_out,
            tokens,
            test_tokens,
            seed,
        } => {
            let train = SyntheticConfig {
                tokens,
                seed,
                ..SyntheticConfig::default()
            };
            let test = SyntheticConfig {
                tokens: test_tokens,
                seed: seed.wrapping_add(1_000_003),
                ..SyntheticConfig::default()
            };
            std::fs::write(&train_out, to_conll(&generate(&train)))?;
            std::fs::write(&test_out, to_conll(&generate(&test)))?;
            writeln!(out, "train={}", train_out.display())?;
            writeln!(out, "test={}", test_out.display())?;
        }
    }
    Ok(())
}
