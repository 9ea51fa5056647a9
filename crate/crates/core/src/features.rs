//! Word vectors and the n-gram averaged context vector.

use std::collections::{BTreeSet, HashMap};
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{Corpus, Sentence};
use crate::error::{Error, Result};

pub const DEFAULT_EMBEDDING_DIM: usize = 128;

/// Odd context width centred on the current token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NGram(usize);

impl NGram {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "n-gram width must be a positive odd integer, got {n}"
            )));
        }
        Ok(NGram(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Token positions covered by the window around `i`, clipped to the sentence.
    pub fn window(self, i: usize, len: usize) -> Range<usize> {
        let half = (self.0 - 1) / 2;
        i.saturating_sub(half)..(i + half + 1).min(len)
    }
}

impl Default for NGram {
    fn default() -> Self {
        NGram(3)
    }
}

/// Row 0 holds the unknown-word vector; rows `1..` follow the sorted vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
    seed: u64,
}

impl EmbeddingTable {
    /// Random-normal table over `words` (already lowercased keys). Scale 1/sqrt(dim).
    pub fn random<I, S>(words: I, dim: usize, seed: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be positive".into()));
        }
        let sorted: BTreeSet<String> = words.into_iter().map(Into::into).collect();
        let words: Vec<String> = sorted.into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0 / (dim as f64).sqrt()).expect("valid std");
        let vectors = (0..(words.len() + 1) * dim)
            .map(|_| normal.sample(&mut rng))
            .collect();
        Self::from_parts(dim, words, vectors, seed)
    }

    /// Vocabulary of training words seen at least `min_count` times.
    pub fn for_corpus(corpus: &Corpus, dim: usize, min_count: usize, seed: u64) -> Result<Self> {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for s in &corpus.sentences {
            for t in s.tokens() {
                *counts.entry(t.vocab_key()).or_default() += 1;
            }
        }
        let words = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count.max(1))
            .map(|(w, _)| w);
        Self::random(words, dim, seed)
    }

    pub fn from_parts(dim: usize, words: Vec<String>, vectors: Vec<f64>, seed: u64) -> Result<Self> {
        let expected = (words.len() + 1) * dim;
        if vectors.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: vectors.len(),
            });
        }
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i + 1))
            .collect();
        Ok(EmbeddingTable {
            dim,
            words,
            index,
            vectors,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    pub fn raw(&self) -> &[f64] {
        &self.vectors
    }

    pub fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.vectors
    }

    /// Row for a word, with case folded. 0 means unknown.
    pub fn row_of(&self, word: &str) -> usize {
        match self.index.get(word) {
            Some(&r) => r,
            None => self.index.get(&word.to_lowercase()).copied().unwrap_or(0),
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.vectors[r * self.dim..(r + 1) * self.dim]
    }

    pub fn unk_vector(&self) -> &[f64] {
        self.row(0)
    }

    pub fn embed(&self, word: &str) -> &[f64] {
        self.row(self.row_of(word))
    }

    /// Mean of the word vectors in the (boundary-clipped) window around token `i`.
    pub fn ngram_average(&self, sentence: &Sentence, i: usize, n: NGram) -> Result<Vec<f64>> {
        let rows = self.window_rows(sentence, i, n)?;
        let mut out = vec![0.0; self.dim];
        for &r in &rows {
            for (o, x) in out.iter_mut().zip(self.row(r)) {
                *o += x;
            }
        }
        let k = rows.len() as f64;
        out.iter_mut().for_each(|o| *o /= k);
        Ok(out)
    }

    /// Embedding rows averaged for token `i`.
    pub fn window_rows(&self, sentence: &Sentence, i: usize, n: NGram) -> Result<Vec<usize>> {
        if i >= sentence.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: sentence.len(),
            });
        }
        let tokens = sentence.tokens();
        Ok(n.window(i, tokens.len())
            .map(|j| self.row_of(&tokens[j].surface))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelId, Token};
    use proptest::prelude::*;

    fn sentence(words: &[&str]) -> Sentence {
        Sentence::new(
            words
                .iter()
                .map(|w| Token {
                    surface: w.to_string(),
                    gold: LabelId(0),
                })
                .collect(),
        )
        .unwrap()
    }

    fn table_2d() -> EmbeddingTable {
        // words sorted: a, b, c
        EmbeddingTable::from_parts(
            2,
            vec!["a".into(), "b".into(), "c".into()],
            vec![9.0, 9.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            0,
        )
        .unwrap()
    }

    #[test]
    fn ngram_must_be_odd() {
        assert!(NGram::new(0).is_err());
        assert!(NGram::new(2).is_err());
        assert_eq!(NGram::new(3).unwrap().get(), 3);
    }

    #[test]
    fn embed_known_unknown_and_case() {
        let t = EmbeddingTable::random(["paris", "rome"], 128, 7).unwrap();
        assert_eq!(t.embed("paris").len(), 128);
        assert_eq!(t.embed("Paris"), t.embed("paris"));
        assert_eq!(t.embed("london"), t.unk_vector());
        assert_eq!(t.embed("rome"), t.embed("rome"));
        assert_ne!(t.embed("rome"), t.embed("paris"));
    }

    #[test]
    fn interior_trigram_mean() {
        let t = table_2d();
        let s = sentence(&["a", "b", "c"]);
        let v = t.ngram_average(&s, 1, NGram::new(3).unwrap()).unwrap();
        // (1,0) + (0,1) + (1,1) = (2,2), divided by 3
        assert!((v[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((v[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_divides_by_in_bounds_count() {
        let t = table_2d();
        let s = sentence(&["a", "b", "c", "a", "b"]);
        let v = t.ngram_average(&s, 0, NGram::new(3).unwrap()).unwrap();
        assert_eq!(v, vec![0.5, 0.5]);
        assert_eq!(NGram::new(3).unwrap().window(4, 5), 3..5);
    }

    #[test]
    fn unigram_is_word_vector() {
        let t = table_2d();
        let s = sentence(&["a", "zzz", "c"]);
        let n1 = NGram::new(1).unwrap();
        for (i, w) in ["a", "zzz", "c"].iter().enumerate() {
            assert_eq!(t.ngram_average(&s, i, n1).unwrap(), t.embed(w));
        }
    }

    #[test]
    fn index_out_of_range() {
        let t = table_2d();
        let s = sentence(&["a"]);
        assert!(matches!(
            t.ngram_average(&s, 1, NGram::default()),
            Err(Error::IndexOutOfRange { index: 1, len: 1 })
        ));
    }

    proptest! {
        #[test]
        fn average_is_componentwise_bounded(len in 1usize..12, half in 0usize..4, seed in 0u64..1000) {
            let words: Vec<String> = (0..len).map(|i| format!("w{}", i % 5)).collect();
            let t = EmbeddingTable::random(words.iter().cloned(), 4, seed).unwrap();
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            let s = sentence(&refs);
            let n = NGram::new(2 * half + 1).unwrap();
            for i in 0..len {
                let v = t.ngram_average(&s, i, n).unwrap();
                for d in 0..4 {
                    let comps: Vec<f64> = n.window(i, len).map(|j| t.embed(&words[j])[d]).collect();
                    let lo = comps.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = comps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(v[d] >= lo - 1e-12 && v[d] <= hi + 1e-12);
                }
            }
        }

        #[test]
        fn identical_vectors_average_to_themselves(len in 1usize..10, half in 0usize..4) {
            let t = EmbeddingTable::random(["same"], 3, 11).unwrap();
            let words = vec!["same"; len];
            let s = sentence(&words);
            let n = NGram::new(2 * half + 1).unwrap();
            for i in 0..len {
                let v = t.ngram_average(&s, i, n).unwrap();
                for (a, b) in v.iter().zip(t.embed("same")) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn interior_window_depends_only_on_multiset(perm in Just(vec![0usize, 1, 2]).prop_shuffle()) {
            let t = table_2d();
            let base = ["a", "b", "c"];
            let shuffled: Vec<&str> = perm.iter().map(|&k| base[k]).collect();
            let mut w1 = vec!["c"]; w1.extend(&base); w1.push("a");
            let mut w2 = vec!["c"]; w2.extend(&shuffled); w2.push("a");
            let v1 = t.ngram_average(&sentence(&w1), 2, NGram::new(3).unwrap()).unwrap();
            let v2 = t.ngram_average(&sentence(&w2), 2, NGram::new(3).unwrap()).unwrap();
            for (a, b) in v1.iter().zip(&v2) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
