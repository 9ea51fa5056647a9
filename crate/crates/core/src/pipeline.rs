//! End-to-end stages: base training, augmented-tagger training, filtered
//! inference and scoring. The command-line tool is a thin layer over these.

use crate::archive::ModelArchive;
use crate::config::RunConfig;
use crate::corpus::{Corpus, LabelId, TagInventory};
use crate::dat::{combine_outputs, relabel, train_dat, DatModel, DatTrainLog};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport};
use crate::features::EmbeddingTable;
use crate::tagger::{confidence_filter, train_base, BaseTrainLog, PredictionSet, TokenRef};

/// Trains the base tagger and packs it into an archive without an augmented
/// tagger.
pub fn train_base_stage(config: &RunConfig, train: &Corpus) -> Result<(ModelArchive, BaseTrainLog)> {
    config.validate()?;
    let (base, log) = train_base(train, &config.tagger_config())?;
    let mut inventory = train.inventory.clone();
    inventory.set_minority_threshold(config.minority_threshold)?;
    Ok((
        ModelArchive {
            config: config.clone(),
            inventory,
            base,
            dat: None,
        },
        log,
    ))
}

/// Trains an augmented tagger on `train` and returns a new archive holding
/// it. Base distributions come from `predictions` when given, otherwise from
/// the archived base tagger.
pub fn train_dat_stage(
    base: &ModelArchive,
    config: &RunConfig,
    train: &Corpus,
    predictions: Option<&PredictionSet>,
) -> Result<(ModelArchive, DatTrainLog)> {
    config.validate()?;
    if train.inventory.labels() != base.inventory.labels() {
        return Err(Error::InvalidConfig(
            "training corpus labels differ from the archived inventory".into(),
        ));
    }
    let owned;
    let predictions = match predictions {
        Some(p) => p,
        None => {
            owned = PredictionSet::from_tagger_parallel(&base.base, train, config.workers)?;
            &owned
        }
    };
    let dat_config = config.dat_config();
    let features = base.base.embeddings();
    let mut model = DatModel::new(features.dim(), base.inventory.len(), &dat_config)?;
    let log = train_dat(&mut model, train, predictions, features, &dat_config)?;
    let mut inventory = base.inventory.clone();
    inventory.set_minority_threshold(config.minority_threshold)?;
    Ok((
        ModelArchive {
            config: config.clone(),
            inventory,
            base: base.base.clone(),
            dat: Some(model),
        },
        log,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferOutcome {
    /// Base distributions with the final label and its source filled in.
    pub predictions: PredictionSet,
    pub filtered: usize,
    pub total: usize,
    /// True when the archive had no augmented tagger and every token kept
    /// its base label.
    pub base_only: bool,
}

impl InferOutcome {
    pub fn filtered_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.filtered as f64 / self.total as f64
        }
    }
}

fn relabel_parallel(
    model: &DatModel,
    corpus: &Corpus,
    filtered: &[(TokenRef, LabelId)],
    features: &EmbeddingTable,
    workers: usize,
) -> Result<Vec<(TokenRef, LabelId)>> {
    if workers <= 1 || filtered.len() < 2 {
        return relabel(model, &corpus.sentences, filtered, features);
    }
    let chunk = filtered.len().div_ceil(workers);
    let parts: Vec<Result<Vec<_>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = filtered
            .chunks(chunk)
            .map(|part| scope.spawn(move || relabel(model, &corpus.sentences, part, features)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(filtered.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Base tagging, confidence filtering at `threshold`, relabelling of the
/// filtered tokens and merging.
pub fn infer_stage(archive: &ModelArchive, test: &Corpus, threshold: f64, workers: usize) -> Result<InferOutcome> {
    let predictions = PredictionSet::from_tagger_parallel(&archive.base, test, workers.max(1))?;
    infer_from_predictions(archive, test, predictions, threshold, workers)
}

/// As [`infer_stage`], with base distributions supplied by the caller.
pub fn infer_from_predictions(
    archive: &ModelArchive,
    test: &Corpus,
    mut predictions: PredictionSet,
    threshold: f64,
    workers: usize,
) -> Result<InferOutcome> {
    predictions.check_labels(&archive.inventory)?;
    let lengths: Vec<usize> = test.sentences.iter().map(|s| s.len()).collect();
    let predicted_lengths: Vec<usize> = predictions.sentences.iter().map(Vec::len).collect();
    if lengths != predicted_lengths {
        return Err(Error::LengthMismatch(
            "predictions do not align with the corpus".into(),
        ));
    }
    let filter = confidence_filter(&predictions, threshold)?;
    let (confident, relabeled, base_only) = match &archive.dat {
        Some(dat) => {
            let relabeled = relabel_parallel(dat, test, &filter.filtered, archive.base.embeddings(), workers)?;
            (filter.confident.clone(), relabeled, false)
        }
        None => {
            let mut all = filter.confident.clone();
            all.extend_from_slice(&filter.filtered);
            (all, Vec::new(), true)
        }
    };
    let merged = combine_outputs(&lengths, &confident, &relabeled)?;
    for (sentence, labels) in predictions.sentences.iter_mut().zip(merged) {
        for (t, (label, source)) in sentence.iter_mut().zip(labels) {
            t.predicted = Some(label);
            t.source = Some(source);
        }
    }
    Ok(InferOutcome {
        predictions,
        filtered: filter.filtered.len(),
        total: filter.total(),
        base_only,
    })
}

/// Scores final labels in `predictions` against the gold labels of `gold`.
/// Label names are matched by name, so the prediction header may list them
/// in any order.
pub fn eval_stage(gold: &Corpus, predictions: &PredictionSet, inventory: &TagInventory) -> Result<EvalReport> {
    let map: Vec<Option<LabelId>> = predictions.labels.iter().map(|l| inventory.id(l)).collect();
    if predictions.sentences.len() != gold.sentences.len() {
        return Err(Error::LengthMismatch(format!(
            "gold has {} sentences, predictions have {}",
            gold.sentences.len(),
            predictions.sentences.len()
        )));
    }
    let mut gold_ids = Vec::with_capacity(gold.sentences.len());
    let mut pred_ids = Vec::with_capacity(gold.sentences.len());
    for (s, (g, p)) in gold.sentences.iter().zip(&predictions.sentences).enumerate() {
        if g.len() != p.len() {
            return Err(Error::LengthMismatch(format!(
                "sentence {s}: gold has {} tokens, predictions have {}",
                g.len(),
                p.len()
            )));
        }
        let mut row = Vec::with_capacity(p.len());
        for (i, (gt, pt)) in g.tokens().iter().zip(p).enumerate() {
            if gt.surface != pt.surface {
                return Err(Error::LengthMismatch(format!(
                    "sentence {s} token {i}: gold word `{}`, prediction word `{}`",
                    gt.surface, pt.surface
                )));
            }
            let name = &predictions.labels[pt.label().index()];
            row.push(map[pt.label().index()].ok_or_else(|| Error::UnknownLabel {
                label: name.clone(),
                line: 0,
            })?);
        }
        gold_ids.push(g.gold_labels().collect::<Vec<_>>());
        pred_ids.push(row);
    }
    evaluate(&gold_ids, &pred_ids, inventory)
}
