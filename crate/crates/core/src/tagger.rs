//! Base taggers emitting per-token label distributions, the prediction file
//! exchanged with external taggers, and the confidence filter that decides
//! which tokens are handed to the augmented tagger.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, LabelId, Sentence, TagInventory};
use crate::error::{Error, Result};
use crate::features::{EmbeddingTable, NGram};
use crate::nn::{self, Activation, DenseNet, Gradients, Optimizer, OptimizerConfig};

/// Tolerance used when validating that a vector is a probability distribution.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-6;

pub trait BaseTagger {
    fn num_labels(&self) -> usize;

    /// One probability vector of length [`BaseTagger::num_labels`] per token.
    fn predict_distribution(&self, sentence: &Sentence) -> Result<Vec<Vec<f64>>>;
}

pub fn check_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidDistribution(
            "entries must be finite and non-negative".into(),
        ));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaggerConfig {
    pub embedding_dim: usize,
    pub ngram: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub optimizer: OptimizerConfig,
    pub min_word_count: usize,
    pub seed: u64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            embedding_dim: crate::features::DEFAULT_EMBEDDING_DIM,
            ngram: 3,
            hidden: vec![64],
            activation: Activation::Tanh,
            epochs: 20,
            optimizer: OptimizerConfig {
                learning_rate: 5e-3,
                ..OptimizerConfig::default()
            },
            min_word_count: 1,
            seed: 1,
        }
    }
}

/// Softmax classifier over the n-gram averaged embedding of each token.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSoftmaxTagger {
    embeddings: EmbeddingTable,
    ngram: NGram,
    classifier: DenseNet,
    trained: bool,
}

impl WindowSoftmaxTagger {
    pub fn untrained(
        embeddings: EmbeddingTable,
        ngram: NGram,
        hidden: &[usize],
        activation: Activation,
        num_labels: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let mut sizes = vec![embeddings.dim()];
        sizes.extend_from_slice(hidden);
        sizes.push(num_labels);
        let classifier = DenseNet::new(&sizes, activation, rng)?;
        Ok(WindowSoftmaxTagger {
            embeddings,
            ngram,
            classifier,
            trained: false,
        })
    }

    /// Reassembles a trained tagger, e.g. from an archive.
    pub fn from_parts(embeddings: EmbeddingTable, ngram: NGram, classifier: DenseNet) -> Result<Self> {
        if classifier.input_size() != embeddings.dim() {
            return Err(Error::DimensionMismatch {
                expected: embeddings.dim(),
                got: classifier.input_size(),
            });
        }
        Ok(WindowSoftmaxTagger {
            embeddings,
            ngram,
            classifier,
            trained: true,
        })
    }

    pub fn embeddings(&self) -> &EmbeddingTable {
        &self.embeddings
    }

    pub fn ngram(&self) -> NGram {
        self.ngram
    }

    pub fn classifier(&self) -> &DenseNet {
        &self.classifier
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    fn distribution_at(&self, sentence: &Sentence, i: usize) -> Result<Vec<f64>> {
        let v = self.embeddings.ngram_average(sentence, i, self.ngram)?;
        Ok(nn::softmax(&self.classifier.forward(&v)?))
    }

    fn mean_loss_and_accuracy(&self, corpus: &Corpus) -> Result<(f64, f64)> {
        let (mut loss, mut correct, mut n) = (0.0, 0usize, 0usize);
        for s in &corpus.sentences {
            for (i, t) in s.tokens().iter().enumerate() {
                let p = self.distribution_at(s, i)?;
                loss += nn::cross_entropy(&p, t.gold.index()).0;
                correct += usize::from(nn::argmax(&p) == t.gold.index());
                n += 1;
            }
        }
        Ok((loss / n as f64, correct as f64 / n as f64))
    }
}

impl BaseTagger for WindowSoftmaxTagger {
    fn num_labels(&self) -> usize {
        self.classifier.output_size()
    }

    fn predict_distribution(&self, sentence: &Sentence) -> Result<Vec<Vec<f64>>> {
        if !self.trained {
            return Err(Error::Untrained);
        }
        (0..sentence.len())
            .map(|i| self.distribution_at(sentence, i))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseTrainLog {
    pub initial_loss: f64,
    /// Running mean cross-entropy observed during each epoch.
    pub epoch_losses: Vec<f64>,
    pub final_loss: f64,
    pub train_accuracy: f64,
}

/// Trains the classifier and the embedding table jointly with mini-batch
/// cross-entropy. Token order is reshuffled every epoch from `config.seed`.
pub fn train_base(corpus: &Corpus, config: &TaggerConfig) -> Result<(WindowSoftmaxTagger, BaseTrainLog)> {
    if corpus.num_tokens() == 0 {
        return Err(Error::Empty("training corpus has no tokens".into()));
    }
    config.optimizer.validate()?;
    let ngram = NGram::new(config.ngram)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let embeddings = EmbeddingTable::for_corpus(corpus, config.embedding_dim, config.min_word_count, config.seed)?;
    let mut tagger = WindowSoftmaxTagger::untrained(
        embeddings,
        ngram,
        &config.hidden,
        config.activation,
        corpus.inventory.len(),
        &mut rng,
    )?;
    tagger.trained = true;
    let (initial_loss, _) = tagger.mean_loss_and_accuracy(corpus)?;

    let mut positions: Vec<(usize, usize)> = corpus
        .sentences
        .iter()
        .enumerate()
        .flat_map(|(s, sent)| (0..sent.len()).map(move |i| (s, i)))
        .collect();
    let dim = tagger.embeddings.dim();
    let mut net_opt = Optimizer::new(config.optimizer)?;
    let mut emb_opt = Optimizer::new(config.optimizer)?;
    let mut emb_grad = vec![0.0; tagger.embeddings.raw().len()];
    let mut touched: Vec<usize> = Vec::new();
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        positions.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in positions.chunks(config.optimizer.batch_size) {
            let mut grads = Gradients::zeros_like(&tagger.classifier);
            for &(s, i) in batch {
                let sentence = &corpus.sentences[s];
                let rows = tagger.embeddings.window_rows(sentence, i, ngram)?;
                let v = tagger.embeddings.ngram_average(sentence, i, ngram)?;
                let trace = tagger.classifier.forward_trace(&v)?;
                let probs = nn::softmax(trace.output());
                let (loss, dlogits) = nn::cross_entropy(&probs, sentence.tokens()[i].gold.index());
                epoch_loss += loss;
                let g = tagger.classifier.backward(&trace, &dlogits)?;
                let share = 1.0 / rows.len() as f64;
                for &r in &rows {
                    let dst = &mut emb_grad[r * dim..(r + 1) * dim];
                    dst.iter_mut().zip(&g.input).for_each(|(d, x)| *d += share * x);
                    touched.push(r);
                }
                grads.accumulate(&g);
            }
            let scale = 1.0 / batch.len() as f64;
            grads.scale(scale);
            net_opt.step(&mut tagger.classifier, &grads)?;
            emb_grad.iter_mut().for_each(|x| *x *= scale);
            emb_opt.step_slice(tagger.embeddings.raw_mut(), &emb_grad)?;
            for r in touched.drain(..) {
                emb_grad[r * dim..(r + 1) * dim].iter_mut().for_each(|x| *x = 0.0);
            }
        }
        epoch_losses.push(epoch_loss / positions.len() as f64);
    }

    let (final_loss, train_accuracy) = tagger.mean_loss_and_accuracy(corpus)?;
    Ok((
        tagger,
        BaseTrainLog {
            initial_loss,
            epoch_losses,
            final_loss,
            train_accuracy,
        },
    ))
}

/// Which model produced a final label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Base,
    Dat,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Base => "dnn",
            Source::Dat => "dat",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenPrediction {
    pub surface: String,
    pub gold: Option<LabelId>,
    pub probs: Vec<f64>,
    pub predicted: Option<LabelId>,
    pub source: Option<Source>,
}

impl TokenPrediction {
    /// Final label if one was recorded, otherwise the most probable label.
    pub fn label(&self) -> LabelId {
        self.predicted
            .unwrap_or_else(|| LabelId::from(nn::argmax(&self.probs)))
    }

    pub fn max_probability(&self) -> f64 {
        self.probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Per-token distributions for a whole corpus.
///
/// On disk the set is a tab-separated text file:
///
/// ```text
/// #labels<TAB>O<TAB>B-PER<TAB>...
/// <sentence><TAB><token><TAB><surface><TAB><gold><TAB><predicted><TAB><source><TAB><p_1>...<p_w>
/// ```
///
/// `gold`, `predicted` and `source` may be `-`. Sentence and token indices are
/// zero-based and must appear in order.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub labels: Vec<String>,
    pub sentences: Vec<Vec<TokenPrediction>>,
}

impl PredictionSet {
    pub fn from_tagger<T: BaseTagger + ?Sized>(tagger: &T, corpus: &Corpus) -> Result<Self> {
        if tagger.num_labels() != corpus.inventory.len() {
            return Err(Error::DimensionMismatch {
                expected: corpus.inventory.len(),
                got: tagger.num_labels(),
            });
        }
        let sentences = corpus
            .sentences
            .iter()
            .map(|s| predict_sentence(tagger, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(PredictionSet {
            labels: corpus.inventory.labels().to_vec(),
            sentences,
        })
    }

    /// Same as [`PredictionSet::from_tagger`], spreading sentences over
    /// `workers` threads. Output is independent of the worker count.
    pub fn from_tagger_parallel<T: BaseTagger + Sync + ?Sized>(
        tagger: &T,
        corpus: &Corpus,
        workers: usize,
    ) -> Result<Self> {
        if workers <= 1 || corpus.sentences.len() < 2 {
            return Self::from_tagger(tagger, corpus);
        }
        if tagger.num_labels() != corpus.inventory.len() {
            return Err(Error::DimensionMismatch {
                expected: corpus.inventory.len(),
                got: tagger.num_labels(),
            });
        }
        let chunk = corpus.sentences.len().div_ceil(workers);
        let parts: Vec<Result<Vec<Vec<TokenPrediction>>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = corpus
                .sentences
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|s| predict_sentence(tagger, s))
                            .collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let mut sentences = Vec::with_capacity(corpus.sentences.len());
        for p in parts {
            sentences.extend(p?);
        }
        Ok(PredictionSet {
            labels: corpus.inventory.labels().to_vec(),
            sentences,
        })
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn get(&self, sentence: usize, token: usize) -> Option<&TokenPrediction> {
        self.sentences.get(sentence).and_then(|s| s.get(token))
    }

    /// Fails unless the label header matches `inventory` exactly.
    pub fn check_labels(&self, inventory: &TagInventory) -> Result<()> {
        if self.labels != inventory.labels() {
            return Err(Error::LengthMismatch(
                "prediction label header differs from the model inventory".into(),
            ));
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "#labels")?;
        for l in &self.labels {
            write!(out, "\t{l}")?;
        }
        writeln!(out)?;
        for (s, sentence) in self.sentences.iter().enumerate() {
            for (i, t) in sentence.iter().enumerate() {
                let name = |l: Option<LabelId>| l.map_or("-", |l| self.labels[l.index()].as_str());
                write!(
                    out,
                    "{s}\t{i}\t{}\t{}\t{}\t{}",
                    t.surface,
                    name(t.gold),
                    name(t.predicted),
                    t.source.map_or("-", Source::as_str)
                )?;
                for p in &t.probs {
                    write!(out, "\t{p}")?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(source: R) -> Result<Self> {
        let mut lines = source.lines().enumerate();
        let header = match lines.next() {
            Some((_, l)) => l?,
            None => return Err(Error::Empty("prediction file is empty".into())),
        };
        let mut fields = header.split('\t');
        if fields.next() != Some("#labels") {
            return Err(Error::parse(1, "expected `#labels` header"));
        }
        let labels: Vec<String> = fields.map(str::to_string).collect();
        if labels.is_empty() {
            return Err(Error::parse(1, "header lists no labels"));
        }
        let lookup = |name: &str, line: usize| -> Result<Option<LabelId>> {
            if name == "-" {
                return Ok(None);
            }
            labels
                .iter()
                .position(|l| l == name)
                .map(|i| Some(LabelId::from(i)))
                .ok_or_else(|| Error::parse(line, format!("label `{name}` not in header")))
        };
        let w = labels.len();
        let mut sentences: Vec<Vec<TokenPrediction>> = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let lineno = i + 1;
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 6 + w {
                return Err(Error::parse(
                    lineno,
                    format!("expected {} fields, found {}", 6 + w, f.len()),
                ));
            }
            let idx = |k: usize| {
                f[k].parse::<usize>()
                    .map_err(|_| Error::parse(lineno, format!("bad index `{}`", f[k])))
            };
            let (s, t) = (idx(0)?, idx(1)?);
            if s == sentences.len() {
                sentences.push(Vec::new());
            }
            if s + 1 != sentences.len() || t != sentences[s].len() {
                return Err(Error::parse(
                    lineno,
                    format!("record {s}:{t} out of order"),
                ));
            }
            let probs = f[6..]
                .iter()
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| Error::parse(lineno, format!("bad probability `{x}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            check_distribution(&probs).map_err(|e| Error::parse(lineno, e.to_string()))?;
            let source = match f[5] {
                "-" => None,
                "dnn" => Some(Source::Base),
                "dat" => Some(Source::Dat),
                other => return Err(Error::parse(lineno, format!("unknown source `{other}`"))),
            };
            sentences[s].push(TokenPrediction {
                surface: f[2].to_string(),
                gold: lookup(f[3], lineno)?,
                predicted: lookup(f[4], lineno)?,
                source,
                probs,
            });
        }
        Ok(PredictionSet { labels, sentences })
    }
}

fn predict_sentence<T: BaseTagger + ?Sized>(tagger: &T, s: &Sentence) -> Result<Vec<TokenPrediction>> {
    let dists = tagger.predict_distribution(s)?;
    Ok(s.tokens()
        .iter()
        .zip(dists)
        .map(|(t, probs)| TokenPrediction {
            surface: t.surface.clone(),
            gold: Some(t.gold),
            probs,
            predicted: None,
            source: None,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenRef {
    pub sentence: usize,
    pub token: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    /// Tokens the base tagger keeps, with its argmax label.
    pub confident: Vec<(TokenRef, LabelId)>,
    /// Tokens routed to the augmented tagger, with the base argmax as a
    /// starting label.
    pub filtered: Vec<(TokenRef, LabelId)>,
}

impl FilterOutcome {
    pub fn total(&self) -> usize {
        self.confident.len() + self.filtered.len()
    }

    pub fn filtered_fraction(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.filtered.len() as f64 / self.total() as f64
        }
    }
}

/// Routes every token whose maximum base probability is below `threshold` to
/// the filtered set. `threshold` must lie in `[0, 1]`.
pub fn confidence_filter(predictions: &PredictionSet, threshold: f64) -> Result<FilterOutcome> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidConfig(format!(
            "confidence threshold must lie in [0, 1], got {threshold}"
        )));
    }
    let mut out = FilterOutcome {
        confident: Vec::new(),
        filtered: Vec::new(),
    };
    for (s, sentence) in predictions.sentences.iter().enumerate() {
        for (i, t) in sentence.iter().enumerate() {
            let r = TokenRef { sentence: s, token: i };
            let label = LabelId::from(nn::argmax(&t.probs));
            if t.max_probability() < threshold {
                out.filtered.push((r, label));
            } else {
                out.confident.push((r, label));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_conll, ColumnSpec};
    use proptest::prelude::*;

    fn corpus(src: &str) -> Corpus {
        parse_conll(
            src.as_bytes(),
            ColumnSpec {
                token_col: 0,
                label_col: 1,
            },
        )
        .unwrap()
    }

    fn small_config() -> TaggerConfig {
        TaggerConfig {
            embedding_dim: 8,
            hidden: vec![6],
            epochs: 5,
            ..TaggerConfig::default()
        }
    }

    fn prediction_set(dists: Vec<Vec<Vec<f64>>>) -> PredictionSet {
        let w = dists[0][0].len();
        PredictionSet {
            labels: (0..w).map(|i| format!("L{i}")).collect(),
            sentences: dists
                .into_iter()
                .map(|s| {
                    s.into_iter()
                        .map(|probs| TokenPrediction {
                            surface: "x".into(),
                            gold: None,
                            probs,
                            predicted: None,
                            source: None,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn untrained_tagger_refuses_to_predict() {
        let c = corpus("a O\nb B-X\n");
        let emb = EmbeddingTable::for_corpus(&c, 4, 1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = WindowSoftmaxTagger::untrained(emb, NGram::default(), &[], Activation::Tanh, 2, &mut rng).unwrap();
        assert!(matches!(t.predict_distribution(&c.sentences[0]), Err(Error::Untrained)));
    }

    #[test]
    fn single_label_corpus_is_learned_exactly() {
        let c = corpus("a O\nb O\nc O\n\nd O\ne O\n");
        let (t, log) = train_base(&c, &small_config()).unwrap();
        assert_eq!(log.train_accuracy, 1.0);
        for s in &c.sentences {
            for p in t.predict_distribution(s).unwrap() {
                assert_eq!(p.len(), 1);
                assert!((p[0] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let mut src = String::new();
        for k in 0..30 {
            src.push_str(&format!("the O\nman{} B-PER\nran O\n\n", k % 4));
        }
        let c = corpus(&src);
        let (a, log) = train_base(&c, &small_config()).unwrap();
        let (b, _) = train_base(&c, &small_config()).unwrap();
        assert!(log.final_loss < log.initial_loss);
        assert_eq!(a, b);
    }

    #[test]
    fn distributions_sum_to_one() {
        let c = corpus("the O\nman B-PER\n\nsaw O\nthe O\ndog O\n");
        let (t, _) = train_base(&c, &small_config()).unwrap();
        let set = PredictionSet::from_tagger(&t, &c).unwrap();
        for s in &set.sentences {
            for tok in s {
                assert!((tok.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
        let par = PredictionSet::from_tagger_parallel(&t, &c, 3).unwrap();
        assert_eq!(par, set);
    }

    #[test]
    fn filter_rule() {
        let set = prediction_set(vec![vec![vec![0.97, 0.03], vec![0.6, 0.4]]]);
        let f = confidence_filter(&set, 0.95).unwrap();
        assert_eq!(f.confident.len(), 1);
        assert_eq!(f.confident[0].0, TokenRef { sentence: 0, token: 0 });
        assert_eq!(f.filtered[0].0, TokenRef { sentence: 0, token: 1 });

        let all = confidence_filter(&set, 1.0).unwrap();
        assert_eq!(all.filtered.len(), 2);
        let none = confidence_filter(&set, 0.0).unwrap();
        assert!(none.filtered.is_empty());
        assert!(confidence_filter(&set, 1.5).is_err());
    }

    #[test]
    fn prediction_file_round_trip() {
        let mut set = prediction_set(vec![
            vec![vec![0.25, 0.75], vec![1.0, 0.0]],
            vec![vec![0.1, 0.9]],
        ]);
        set.sentences[0][0].gold = Some(LabelId(1));
        set.sentences[0][1].predicted = Some(LabelId(0));
        set.sentences[0][1].source = Some(Source::Dat);
        let mut buf = Vec::new();
        set.write(&mut buf).unwrap();
        let back = PredictionSet::read(buf.as_slice()).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn prediction_file_errors() {
        let bad_sum = "#labels\tA\tB\n0\t0\tx\t-\t-\t-\t0.5\t0.6\n";
        assert!(matches!(PredictionSet::read(bad_sum.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let gap = "#labels\tA\tB\n0\t0\tx\t-\t-\t-\t0.5\t0.5\n0\t2\tx\t-\t-\t-\t0.5\t0.5\n";
        assert!(matches!(PredictionSet::read(gap.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let short = "#labels\tA\tB\n0\t0\tx\t-\t-\t-\t1\n";
        assert!(PredictionSet::read(short.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn filter_partitions_and_is_monotone(
            raw in proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, 3), 1..30),
            t1 in 0.0f64..=1.0,
            t2 in 0.0f64..=1.0,
        ) {
            let dists: Vec<Vec<f64>> = raw.into_iter().map(|v| {
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect()
            }).collect();
            let n = dists.len();
            let set = prediction_set(vec![dists]);
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = confidence_filter(&set, lo).unwrap();
            let b = confidence_filter(&set, hi).unwrap();
            prop_assert_eq!(a.total(), n);
            prop_assert_eq!(b.total(), n);
            let fa: std::collections::BTreeSet<_> = a.filtered.iter().map(|x| x.0).collect();
            let fb: std::collections::BTreeSet<_> = b.filtered.iter().map(|x| x.0).collect();
            prop_assert!(fa.is_subset(&fb));
            let ca: std::collections::BTreeSet<_> = a.confident.iter().map(|x| x.0).collect();
            prop_assert!(ca.is_disjoint(&fa));
        }
    }
}
