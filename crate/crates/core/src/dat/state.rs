use crate::corpus::{LabelId, Sentence};
use crate::error::{Error, Result};
use crate::features::{EmbeddingTable, NGram};

/// Context vector of a token paired with a candidate label, stored in the
/// encoded form `[v ‖ one_hot(label)]` the Q-network consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct DatState {
    encoded: Vec<f64>,
    dim: usize,
    label: LabelId,
}

impl DatState {
    pub fn new(context: &[f64], label: LabelId, num_labels: usize) -> Result<Self> {
        if label.index() >= num_labels {
            return Err(Error::IndexOutOfRange {
                index: label.index(),
                len: num_labels,
            });
        }
        let mut encoded = Vec::with_capacity(context.len() + num_labels);
        encoded.extend_from_slice(context);
        encoded.resize(context.len() + num_labels, 0.0);
        encoded[context.len() + label.index()] = 1.0;
        Ok(DatState {
            encoded,
            dim: context.len(),
            label,
        })
    }

    pub fn label(&self) -> LabelId {
        self.label
    }

    pub fn context(&self) -> &[f64] {
        &self.encoded[..self.dim]
    }

    pub fn one_hot(&self) -> &[f64] {
        &self.encoded[self.dim..]
    }

    pub fn encoded(&self) -> &[f64] {
        &self.encoded
    }

    pub fn num_labels(&self) -> usize {
        self.encoded.len() - self.dim
    }

    /// State reached by taking `action`: same context, label replaced.
    pub fn with_label(&self, action: LabelId) -> Result<Self> {
        let w = self.num_labels();
        if action.index() >= w {
            return Err(Error::IndexOutOfRange {
                index: action.index(),
                len: w,
            });
        }
        let mut next = self.clone();
        next.encoded[self.dim + self.label.index()] = 0.0;
        next.encoded[self.dim + action.index()] = 1.0;
        next.label = action;
        Ok(next)
    }
}

pub fn make_state(
    features: &EmbeddingTable,
    sentence: &Sentence,
    i: usize,
    label: LabelId,
    ngram: NGram,
    num_labels: usize,
) -> Result<DatState> {
    let v = features.ngram_average(sentence, i, ngram)?;
    DatState::new(&v, label, num_labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;

    fn setup() -> (EmbeddingTable, Sentence) {
        let table = EmbeddingTable::from_parts(
            2,
            vec!["a".into(), "b".into()],
            vec![0.0, 0.0, 1.0, 2.0, 3.0, 4.0],
            0,
        )
        .unwrap();
        let s = Sentence::new(
            ["a", "b"]
                .iter()
                .map(|w| Token {
                    surface: w.to_string(),
                    gold: LabelId(0),
                })
                .collect(),
        )
        .unwrap();
        (table, s)
    }

    #[test]
    fn unigram_state_is_word_vector_and_one_hot() {
        let (t, s) = setup();
        let st = make_state(&t, &s, 1, LabelId(1), NGram::new(1).unwrap(), 3).unwrap();
        assert_eq!(st.encoded(), &[3.0, 4.0, 0.0, 1.0, 0.0]);
        assert_eq!(st.encoded().len(), 5);
    }

    #[test]
    fn labels_change_only_the_one_hot_segment() {
        let (t, s) = setup();
        let a = make_state(&t, &s, 0, LabelId(0), NGram::default(), 3).unwrap();
        let b = make_state(&t, &s, 0, LabelId(2), NGram::default(), 3).unwrap();
        assert_eq!(a.context(), b.context());
        assert_ne!(a.one_hot(), b.one_hot());
        assert_eq!(a.with_label(LabelId(2)).unwrap(), b);
        assert_eq!(b.one_hot().iter().filter(|&&x| x == 1.0).count(), 1);
    }

    #[test]
    fn errors_propagate() {
        let (t, s) = setup();
        assert!(make_state(&t, &s, 5, LabelId(0), NGram::default(), 3).is_err());
        assert!(make_state(&t, &s, 0, LabelId(3), NGram::default(), 3).is_err());
    }
}
