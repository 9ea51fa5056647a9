//! Deep Q-learning augmented tagger.
//!
//! A state pairs a token's n-gram averaged context vector with a candidate
//! label. Every label is an action; taking it swaps the state's label and
//! keeps the context. The Q-network maps an encoded state to one value per
//! action, and the greedy policy walks a token from its base label towards
//! the label the network scores highest.

mod infer;
mod replay;
mod reward;
mod state;
mod train;

pub use infer::{combine_outputs, relabel, relabel_token};
pub use replay::{Experience, ReplayMemory, DEFAULT_MEMORY_CAPACITY};
pub use reward::{one_hot, reward, reward_for_labels, DEFAULT_REWARD_EPSILON};
pub use state::{make_state, DatState};
pub use train::{train_dat, DatTrainLog, EpisodeRecord};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{Reader, Writer};
use crate::corpus::LabelId;
use crate::error::{Error, Result};
use crate::features::NGram;
use crate::nn::{self, Activation, DenseNet, ForwardTrace, OptimizerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatConfig {
    pub gamma: f64,
    pub reward_epsilon: f64,
    pub ngram: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    /// `batch_size` is the number of replay updates per environment step.
    pub optimizer: OptimizerConfig,
    pub memory_capacity: usize,
    /// Number of sampled episodes.
    pub epochs: usize,
    /// Step budget per episode and per relabelling walk; defaults to twice
    /// the label count.
    pub max_steps: Option<usize>,
    /// Probability of a uniformly random action during training.
    pub exploration: f64,
    pub init_seed: u64,
    pub replay_seed: u64,
}

impl Default for DatConfig {
    fn default() -> Self {
        DatConfig {
            gamma: 0.9,
            reward_epsilon: DEFAULT_REWARD_EPSILON,
            ngram: 3,
            hidden: vec![100, 100],
            activation: Activation::Tanh,
            optimizer: OptimizerConfig::default(),
            memory_capacity: DEFAULT_MEMORY_CAPACITY,
            epochs: 5000,
            max_steps: None,
            exploration: 0.0,
            init_seed: 1,
            replay_seed: 2,
        }
    }
}

impl DatConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.reward_epsilon > 0.0 && self.reward_epsilon.is_finite()) {
            return Err(Error::InvalidConfig("reward epsilon must be positive".into()));
        }
        NGram::new(self.ngram)?;
        self.optimizer.validate()?;
        if self.memory_capacity == 0 {
            return Err(Error::InvalidConfig("replay memory capacity must be positive".into()));
        }
        if self.max_steps == Some(0) {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.exploration) {
            return Err(Error::InvalidConfig(format!(
                "exploration rate must lie in [0, 1], got {}",
                self.exploration
            )));
        }
        if self.hidden.contains(&0) {
            return Err(Error::InvalidConfig("hidden layer sizes must be positive".into()));
        }
        Ok(())
    }
}

/// Q-network plus the constants that shape its targets and walks.
#[derive(Debug, Clone, PartialEq)]
pub struct DatModel {
    qnet: DenseNet,
    gamma: f64,
    reward_epsilon: f64,
    ngram: NGram,
    dim: usize,
    num_labels: usize,
    max_steps: usize,
}

#[derive(Debug, Clone)]
pub struct TdLoss {
    pub loss: f64,
    pub target: f64,
    pub estimate: f64,
    pub trace: ForwardTrace,
    /// `dL/dQ(s, ·)`; only the taken action's entry is non-zero.
    pub output_grad: Vec<f64>,
}

/// Bootstrap target; terminal transitions keep only the reward.
pub fn td_target(reward: f64, gamma: f64, next_max: f64, terminal: bool) -> f64 {
    if terminal {
        reward
    } else {
        reward + gamma * next_max
    }
}

impl DatModel {
    pub fn new(dim: usize, num_labels: usize, config: &DatConfig) -> Result<Self> {
        config.validate()?;
        if num_labels == 0 {
            return Err(Error::InvalidConfig("label inventory is empty".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.init_seed);
        let mut sizes = vec![dim + num_labels];
        sizes.extend_from_slice(&config.hidden);
        sizes.push(num_labels);
        let qnet = DenseNet::new(&sizes, config.activation, &mut rng)?;
        Self::from_parts(
            qnet,
            config.gamma,
            config.reward_epsilon,
            NGram::new(config.ngram)?,
            dim,
            config.max_steps.unwrap_or(2 * num_labels),
        )
    }

    pub fn from_parts(
        qnet: DenseNet,
        gamma: f64,
        reward_epsilon: f64,
        ngram: NGram,
        dim: usize,
        max_steps: usize,
    ) -> Result<Self> {
        let num_labels = qnet.output_size();
        if qnet.input_size() != dim + num_labels {
            return Err(Error::DimensionMismatch {
                expected: dim + num_labels,
                got: qnet.input_size(),
            });
        }
        if max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(DatModel {
            qnet,
            gamma,
            reward_epsilon,
            ngram,
            dim,
            num_labels,
            max_steps,
        })
    }

    pub fn qnet(&self) -> &DenseNet {
        &self.qnet
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn reward_epsilon(&self) -> f64 {
        self.reward_epsilon
    }

    pub fn ngram(&self) -> NGram {
        self.ngram
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn set_max_steps(&mut self, max_steps: usize) -> Result<()> {
        if max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        self.max_steps = max_steps;
        Ok(())
    }

    pub fn q_values(&self, state: &DatState) -> Result<Vec<f64>> {
        self.qnet.forward(state.encoded())
    }

    /// Greedy action; ties go to the lowest label id.
    pub fn select_action(&self, state: &DatState) -> Result<LabelId> {
        Ok(LabelId::from(nn::argmax(&self.q_values(state)?)))
    }

    pub(crate) fn select_action_exploring<R: Rng>(
        &self,
        state: &DatState,
        exploration: f64,
        rng: &mut R,
    ) -> Result<LabelId> {
        if exploration > 0.0 && rng.random::<f64>() < exploration {
            return Ok(LabelId::from(rng.random_range(0..self.num_labels)));
        }
        self.select_action(state)
    }

    /// Squared TD error of one transition, with the target held constant.
    pub fn td_loss(&self, e: &Experience) -> Result<TdLoss> {
        let next_max = if e.terminal {
            0.0
        } else {
            self.q_values(&e.next)?
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let target = td_target(e.reward, self.gamma, next_max, e.terminal);
        let trace = self.qnet.forward_trace(e.state.encoded())?;
        let estimate = trace.output()[e.action.index()];
        let diff = estimate - target;
        let mut output_grad = vec![0.0; self.num_labels];
        output_grad[e.action.index()] = 2.0 * diff;
        Ok(TdLoss {
            loss: diff * diff,
            target,
            estimate,
            trace,
            output_grad,
        })
    }

    pub(crate) fn qnet_mut(&mut self) -> &mut DenseNet {
        &mut self.qnet
    }

    pub fn encode(&self, w: &mut Writer) {
        w.f64(self.gamma);
        w.f64(self.reward_epsilon);
        w.u32(self.ngram.get() as u32);
        w.u32(self.dim as u32);
        w.u32(self.max_steps as u32);
        self.qnet.encode(w);
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let gamma = r.f64()?;
        let reward_epsilon = r.f64()?;
        let ngram = NGram::new(r.u32()? as usize)?;
        let dim = r.u32()? as usize;
        let max_steps = r.u32()? as usize;
        let qnet = DenseNet::decode(r)?;
        Self::from_parts(qnet, gamma, reward_epsilon, ngram, dim, max_steps)
    }
}
