//! Seeded generator for small imbalanced NER-style corpora.
//!
//! Sentences mix filler words with cue-bracketed entity mentions: locations
//! (`B-LOC`), two-token person names (`B-PER I-PER`) and two-token
//! organisation names (`B-ORG I-ORG`). Each entity type has its own left and
//! right cue words, all labelled `O`. A handful of ambiguous words can head
//! any of the three entity types, so only the cues tell them apart. With the
//! default rates `O` and `B-LOC` cover about 95% of tokens.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FILLER: &[&str] = &[
    "the", "a", "report", "on", "monday", "officials", "were", "that", "talks", "will", "resume", "after",
    "new", "plans", "for", "trade", "have", "been", "announced", "by", "its", "this", "week", "while",
    "prices", "rose", "sharply", "and", "markets", "closed", "higher", "than", "expected", "as", "investors",
    "watched", "closely", "before", "final", "results", "came", "out", "late", "again",
];
const LOC_LEFT: &[&str] = &["in", "to", "from", "near"];
const LOC_RIGHT: &[&str] = &["city", "province", "region"];
const PER_LEFT: &[&str] = &["mr", "mrs", "dr"];
const PER_RIGHT: &[&str] = &["said", "told", "added"];
const ORG_LEFT: &[&str] = &["joined", "rival"];
const ORG_RIGHT: &[&str] = &["shares", "stock"];
const CITIES: &[&str] = &[
    "berlin", "madrid", "lisbon", "oslo", "cairo", "lima", "quito", "dublin", "vienna", "prague", "rome",
    "athens", "warsaw", "tokyo", "seoul", "hanoi", "delhi", "nairobi", "dakar", "havana",
];
const FIRST: &[&str] = &["anna", "boris", "carla", "dmitri", "elena", "felix", "greta", "hugo", "ines", "jonas"];
const LAST: &[&str] = &["smith", "novak", "garcia", "kowalski", "rossi", "meyer", "silva", "larsen", "dubois", "costa"];
const ORG_HEAD: &[&str] = &["acme", "globex", "initech", "umbrella", "vertex", "nordic", "atlas", "zenith"];
const ORG_TAIL: &[&str] = &["corp", "group", "bank", "holdings"];
/// Words used as city, first name and organisation head alike.
const AMBIGUOUS: &[&str] = &["jordan", "victoria", "florence", "sydney", "chester", "austin"];

pub const LABELS: &[&str] = &["O", "B-LOC", "B-PER", "I-PER", "B-ORG", "I-ORG"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    /// Sentences are generated until at least this many tokens exist.
    pub tokens: usize,
    /// Per-step probability of a location mention.
    pub location_rate: f64,
    /// Per-step probability of a person name, and separately of an
    /// organisation name.
    pub name_rate: f64,
    /// Probability that an entity's head word is drawn from the ambiguous list.
    pub ambiguity: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            tokens: 5000,
            location_rate: 0.12,
            name_rate: 0.012,
            ambiguity: 0.35,
            min_len: 8,
            max_len: 16,
            seed: 1,
        }
    }
}

pub type LabelledSentence = Vec<(String, &'static str)>;

fn pick(rng: &mut ChaCha8Rng, pool: &[&str]) -> String {
    pool.choose(rng).expect("non-empty pool").to_string()
}

pub fn generate(config: &SyntheticConfig) -> Vec<LabelledSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::new();
    let mut total = 0;
    let min_len = config.min_len.max(1);
    let max_len = config.max_len.max(min_len);
    while total < config.tokens {
        let target = rng.random_range(min_len..=max_len);
        let mut sentence: LabelledSentence = Vec::with_capacity(target + 4);
        while sentence.len() < target {
            let u = rng.random::<f64>();
            let (left, heads, head_label, tail, right): (_, _, _, Option<(&[&str], &'static str)>, _) =
                if u < config.location_rate {
                    (LOC_LEFT, CITIES, "B-LOC", None, LOC_RIGHT)
                } else if u < config.location_rate + config.name_rate {
                    (PER_LEFT, FIRST, "B-PER", Some((LAST, "I-PER")), PER_RIGHT)
                } else if u < config.location_rate + 2.0 * config.name_rate {
                    (ORG_LEFT, ORG_HEAD, "B-ORG", Some((ORG_TAIL, "I-ORG")), ORG_RIGHT)
                } else {
                    sentence.push((pick(&mut rng, FILLER), "O"));
                    continue;
                };
            sentence.push((pick(&mut rng, left), "O"));
            let head = if rng.random::<f64>() < config.ambiguity {
                pick(&mut rng, AMBIGUOUS)
            } else {
                pick(&mut rng, heads)
            };
            sentence.push((head, head_label));
            if let Some((pool, label)) = tail {
                sentence.push((pick(&mut rng, pool), label));
            }
            sentence.push((pick(&mut rng, right), "O"));
        }
        total += sentence.len();
        out.push(sentence);
    }
    out
}

/// Two-column CoNLL text (word, label) with blank lines between sentences.
pub fn to_conll(sentences: &[LabelledSentence]) -> String {
    let mut s = String::new();
    for sentence in sentences {
        for (word, label) in sentence {
            writeln!(s, "{word} {label}").unwrap();
        }
        s.push('\n');
    }
    s
}
