use std::collections::VecDeque;

use rand::Rng;

use super::state::DatState;
use crate::corpus::LabelId;
use crate::error::{Error, Result};

pub const DEFAULT_MEMORY_CAPACITY: usize = 5000;

/// One transition `(s_t, r_t, a_t, s_{t+1})`. `terminal` marks the last
/// transition of an episode; its TD target carries no bootstrap term.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: DatState,
    pub reward: f64,
    pub action: LabelId,
    pub next: DatState,
    pub terminal: bool,
}

impl Experience {
    pub fn validate(&self) -> Result<()> {
        if self.next.label() != self.action {
            return Err(Error::InvalidExperience(format!(
                "next state label {} differs from action {}",
                self.next.label(),
                self.action
            )));
        }
        if self.next.context() != self.state.context() {
            return Err(Error::InvalidExperience("action changed the context vector".into()));
        }
        if !(-1.0..=1.0).contains(&self.reward) {
            return Err(Error::InvalidExperience(format!("reward {} outside [-1, 1]", self.reward)));
        }
        Ok(())
    }
}

/// Bounded FIFO of experiences.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    queue: VecDeque<Experience>,
    capacity: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("replay memory capacity must be positive".into()));
        }
        Ok(ReplayMemory {
            queue: VecDeque::with_capacity(capacity.min(1 << 16)),
            capacity,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn push(&mut self, e: Experience) -> Result<()> {
        e.validate()?;
        if self.queue.len() == self.capacity {
            self.queue.pop_front();
        }
        self.queue.push_back(e);
        Ok(())
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.queue.iter()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&Experience> {
        if self.queue.is_empty() {
            return None;
        }
        self.queue.get(rng.random_range(0..self.queue.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(tag: f64) -> Experience {
        let s = DatState::new(&[tag], LabelId(0), 2).unwrap();
        Experience {
            next: s.with_label(LabelId(1)).unwrap(),
            state: s,
            reward: 0.0,
            action: LabelId(1),
            terminal: false,
        }
    }

    #[test]
    fn fifo_eviction() {
        let mut m = ReplayMemory::new(2).unwrap();
        m.push(exp(1.0)).unwrap();
        assert_eq!(m.len(), 1);
        m.push(exp(2.0)).unwrap();
        m.push(exp(3.0)).unwrap();
        let tags: Vec<f64> = m.iter().map(|e| e.state.context()[0]).collect();
        assert_eq!(tags, vec![2.0, 3.0]);
    }

    #[test]
    fn rejects_inconsistent_experience() {
        let mut m = ReplayMemory::new(4).unwrap();
        let mut e = exp(1.0);
        e.action = LabelId(0);
        assert!(m.push(e).is_err());
        let mut e = exp(1.0);
        e.reward = 1.5;
        assert!(m.push(e).is_err());
        let mut e = exp(1.0);
        e.next = DatState::new(&[9.0], LabelId(1), 2).unwrap();
        assert!(m.push(e).is_err());
        assert!(m.is_empty());
        assert!(ReplayMemory::new(0).is_err());
    }

    #[test]
    fn default_capacity() {
        assert_eq!(DEFAULT_MEMORY_CAPACITY, 5000);
    }
}
