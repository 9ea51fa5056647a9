use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::replay::{Experience, ReplayMemory};
use super::reward::reward_for_labels;
use super::state::DatState;
use super::{DatConfig, DatModel};
use crate::corpus::{Corpus, LabelId};
use crate::error::{Error, Result};
use crate::features::EmbeddingTable;
use crate::tagger::{check_distribution, PredictionSet};

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    /// Mean TD loss over the episode's replay updates (0 when it had none).
    pub loss: f64,
    pub length: usize,
    pub exploration: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatTrainLog {
    pub episodes: Vec<EpisodeRecord>,
}

impl DatTrainLog {
    /// Tab-separated, one line per episode after a header.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration\tloss\tepisode_length\tepsilon")?;
        for e in &self.episodes {
            writeln!(out, "{}\t{}\t{}\t{}", e.episode, e.loss, e.length, e.exploration)?;
        }
        Ok(())
    }

    pub fn mean_length(&self, range: std::ops::Range<usize>) -> f64 {
        let slice = &self.episodes[range];
        if slice.is_empty() {
            return 0.0;
        }
        slice.iter().map(|e| e.length as f64).sum::<f64>() / slice.len() as f64
    }
}

struct TokenSample {
    context: Vec<f64>,
    probs: Vec<f64>,
    gold: LabelId,
}

fn collect_samples(
    model: &DatModel,
    corpus: &Corpus,
    predictions: &PredictionSet,
    features: &EmbeddingTable,
) -> Result<Vec<TokenSample>> {
    predictions.check_labels(&corpus.inventory)?;
    if features.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: features.dim(),
        });
    }
    let mut out = Vec::with_capacity(corpus.num_tokens());
    for (s, sentence) in corpus.sentences.iter().enumerate() {
        for (i, token) in sentence.tokens().iter().enumerate() {
            let p = predictions
                .get(s, i)
                .ok_or(Error::MissingPrediction { sentence: s, token: i })?;
            check_distribution(&p.probs)?;
            out.push(TokenSample {
                context: features.ngram_average(sentence, i, model.ngram())?,
                probs: p.probs.clone(),
                gold: token.gold,
            });
        }
    }
    if out.is_empty() {
        return Err(Error::Empty("training corpus has no tokens".into()));
    }
    Ok(out)
}

/// Experience-replay Q-learning over the training tokens.
///
/// Each episode samples a token and a uniformly random starting label, then
/// follows the policy until the label equals the gold label or the step
/// budget runs out. Every step pushes one transition, rewarded at the state
/// the action leads to, and performs `optimizer.batch_size` single-transition
/// updates drawn uniformly from replay memory.
pub fn train_dat(
    model: &mut DatModel,
    corpus: &Corpus,
    predictions: &PredictionSet,
    features: &EmbeddingTable,
    config: &DatConfig,
) -> Result<DatTrainLog> {
    config.validate()?;
    if corpus.inventory.len() != model.num_labels() {
        return Err(Error::DimensionMismatch {
            expected: model.num_labels(),
            got: corpus.inventory.len(),
        });
    }
    let samples = collect_samples(model, corpus, predictions, features)?;
    let w = model.num_labels();
    let max_steps = model.max_steps();
    let updates = config.optimizer.batch_size;
    let mut rng = ChaCha8Rng::seed_from_u64(config.init_seed);
    rng.set_stream(1);
    let mut replay_rng = ChaCha8Rng::seed_from_u64(config.replay_seed);
    let mut memory = ReplayMemory::new(config.memory_capacity)?;
    let mut optimizer = crate::nn::Optimizer::new(config.optimizer)?;
    let mut log = DatTrainLog::default();

    for episode in 0..config.epochs {
        let sample = &samples[rng.random_range(0..samples.len())];
        let mut state = DatState::new(&sample.context, LabelId::from(rng.random_range(0..w)), w)?;
        let mut steps = 0;
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        while state.label() != sample.gold && steps < max_steps {
            let action = model.select_action_exploring(&state, config.exploration, &mut rng)?;
            let next = state.with_label(action)?;
            let reward = reward_for_labels(sample.gold, action, &sample.probs, model.reward_epsilon())?;
            steps += 1;
            memory.push(Experience {
                state,
                reward,
                action,
                next: next.clone(),
                terminal: action == sample.gold || steps == max_steps,
            })?;
            for _ in 0..updates {
                let e = memory.sample(&mut replay_rng).expect("memory is non-empty");
                let td = model.td_loss(e)?;
                let grads = model.qnet().backward(&td.trace, &td.output_grad)?;
                optimizer.step(model.qnet_mut(), &grads)?;
                loss_sum += td.loss;
                loss_count += 1;
            }
            state = next;
        }
        log.episodes.push(EpisodeRecord {
            episode,
            loss: if loss_count == 0 { 0.0 } else { loss_sum / loss_count as f64 },
            length: steps,
            exploration: config.exploration,
        });
    }
    Ok(log)
}
