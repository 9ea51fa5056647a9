//! Chunk-level scoring with conlleval semantics, token accuracy and the
//! minority/majority split of wrongly labelled tokens.

use std::collections::HashSet;
use std::io::Write;

use crate::corpus::{LabelId, TagInventory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chunk {
    pub kind: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Prefix {
    B,
    I,
    O,
}

fn split_label(label: &str) -> Result<(Prefix, &str)> {
    if label == "O" {
        return Ok((Prefix::O, ""));
    }
    match label.split_once('-') {
        Some(("B", kind)) if !kind.is_empty() => Ok((Prefix::B, kind)),
        Some(("I", kind)) if !kind.is_empty() => Ok((Prefix::I, kind)),
        _ => Err(Error::InvalidBioLabel(label.to_string())),
    }
}

/// Maximal chunks of a BIO2 sequence. An `I-` tag that does not continue a
/// chunk of its own type opens a new one, as conlleval does.
pub fn extract_chunks<S: AsRef<str>>(labels: &[S]) -> Result<Vec<Chunk>> {
    let mut chunks = Vec::new();
    let mut open: Option<(&str, usize)> = None;
    for (i, label) in labels.iter().enumerate() {
        let (prefix, kind) = split_label(label.as_ref())?;
        let continues = matches!((prefix, open), (Prefix::I, Some((k, _))) if k == kind);
        if continues {
            continue;
        }
        if let Some((k, start)) = open.take() {
            chunks.push(Chunk {
                kind: k.to_string(),
                start,
                end: i,
            });
        }
        if prefix != Prefix::O {
            open = Some((kind, i));
        }
    }
    if let Some((k, start)) = open {
        chunks.push(Chunk {
            kind: k.to_string(),
            start,
            end: labels.len(),
        });
    }
    Ok(chunks)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChunkScore {
    pub gold_chunks: usize,
    pub predicted_chunks: usize,
    pub correct_chunks: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ChunkScore {
    pub fn from_counts(gold_chunks: usize, predicted_chunks: usize, correct_chunks: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(correct_chunks, predicted_chunks);
        let recall = ratio(correct_chunks, gold_chunks);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ChunkScore {
            gold_chunks,
            predicted_chunks,
            correct_chunks,
            precision,
            recall,
            f1,
        }
    }
}

/// Precision/recall/F1 over exactly matching `(type, start, end)` chunks.
/// When neither side has a chunk, precision, recall and F1 are all 0.
pub fn chunk_f1<S: AsRef<str>, T: AsRef<str>>(gold: &[Vec<S>], predicted: &[Vec<T>]) -> Result<ChunkScore> {
    if gold.len() != predicted.len() {
        return Err(Error::LengthMismatch(format!(
            "{} gold sentences, {} predicted",
            gold.len(),
            predicted.len()
        )));
    }
    let (mut n_gold, mut n_pred, mut n_correct) = (0, 0, 0);
    for (s, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(Error::LengthMismatch(format!(
                "sentence {s}: {} gold tokens, {} predicted",
                g.len(),
                p.len()
            )));
        }
        let gc = extract_chunks(g)?;
        let pc: HashSet<Chunk> = extract_chunks(p)?.into_iter().collect();
        n_gold += gc.len();
        n_pred += pc.len();
        n_correct += gc.iter().filter(|c| pc.contains(c)).count();
    }
    Ok(ChunkScore::from_counts(n_gold, n_pred, n_correct))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorDistribution {
    pub total_errors: usize,
    pub minority_errors: usize,
    pub majority_errors: usize,
    /// Fractions of `total_errors`; both 0 when there are no errors.
    pub minority_share: f64,
    pub majority_share: f64,
}

/// Groups wrongly labelled tokens by whether their gold label is a minority
/// label of `inventory`.
pub fn error_distribution(
    gold: &[Vec<LabelId>],
    predicted: &[Vec<LabelId>],
    inventory: &TagInventory,
) -> Result<ErrorDistribution> {
    check_shapes(gold, predicted)?;
    let (mut minority, mut majority) = (0, 0);
    for (g, p) in gold.iter().zip(predicted) {
        for (&gl, &pl) in g.iter().zip(p) {
            if gl != pl {
                if inventory.is_minority(gl) {
                    minority += 1;
                } else {
                    majority += 1;
                }
            }
        }
    }
    let total = minority + majority;
    let share = |k: usize| if total == 0 { 0.0 } else { k as f64 / total as f64 };
    Ok(ErrorDistribution {
        total_errors: total,
        minority_errors: minority,
        majority_errors: majority,
        minority_share: share(minority),
        majority_share: share(majority),
    })
}

fn check_shapes(gold: &[Vec<LabelId>], predicted: &[Vec<LabelId>]) -> Result<()> {
    if gold.len() != predicted.len() {
        return Err(Error::LengthMismatch(format!(
            "{} gold sentences, {} predicted",
            gold.len(),
            predicted.len()
        )));
    }
    for (s, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(Error::LengthMismatch(format!("sentence {s} differs in length")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupAccuracy {
    pub tokens: usize,
    pub correct: usize,
}

impl GroupAccuracy {
    pub fn accuracy(&self) -> f64 {
        if self.tokens == 0 {
            0.0
        } else {
            self.correct as f64 / self.tokens as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub chunks: ChunkScore,
    pub overall: GroupAccuracy,
    pub minority: GroupAccuracy,
    pub majority: GroupAccuracy,
    pub errors: ErrorDistribution,
}

pub fn evaluate(gold: &[Vec<LabelId>], predicted: &[Vec<LabelId>], inventory: &TagInventory) -> Result<EvalReport> {
    check_shapes(gold, predicted)?;
    let names = |seq: &[Vec<LabelId>]| -> Vec<Vec<&str>> {
        seq.iter()
            .map(|s| s.iter().map(|&l| inventory.name(l)).collect())
            .collect()
    };
    let chunks = chunk_f1(&names(gold), &names(predicted))?;
    let mut overall = GroupAccuracy { tokens: 0, correct: 0 };
    let mut minority = overall;
    let mut majority = overall;
    for (g, p) in gold.iter().zip(predicted) {
        for (&gl, &pl) in g.iter().zip(p) {
            let hit = usize::from(gl == pl);
            let group = if inventory.is_minority(gl) {
                &mut minority
            } else {
                &mut majority
            };
            group.tokens += 1;
            group.correct += hit;
            overall.tokens += 1;
            overall.correct += hit;
        }
    }
    Ok(EvalReport {
        chunks,
        overall,
        minority,
        majority,
        errors: error_distribution(gold, predicted, inventory)?,
    })
}

impl EvalReport {
    pub fn write_key_values<W: Write>(&self, mut out: W) -> Result<()> {
        let c = &self.chunks;
        writeln!(out, "metric=chunk_f1")?;
        writeln!(out, "precision={}", c.precision)?;
        writeln!(out, "recall={}", c.recall)?;
        writeln!(out, "f1={}", c.f1)?;
        writeln!(out, "gold_chunks={}", c.gold_chunks)?;
        writeln!(out, "predicted_chunks={}", c.predicted_chunks)?;
        writeln!(out, "correct_chunks={}", c.correct_chunks)?;
        writeln!(out, "tokens={}", self.overall.tokens)?;
        writeln!(out, "token_accuracy={}", self.overall.accuracy())?;
        writeln!(out, "minority_tokens={}", self.minority.tokens)?;
        writeln!(out, "minority_accuracy={}", self.minority.accuracy())?;
        writeln!(out, "majority_tokens={}", self.majority.tokens)?;
        writeln!(out, "majority_accuracy={}", self.majority.accuracy())?;
        writeln!(out, "wrong_total={}", self.errors.total_errors)?;
        writeln!(out, "wrong_minority={}", self.errors.minority_errors)?;
        writeln!(out, "wrong_majority={}", self.errors.majority_errors)?;
        writeln!(out, "wrong_minority_share={}", self.errors.minority_share)?;
        writeln!(out, "wrong_majority_share={}", self.errors.majority_share)?;
        Ok(())
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let c = &self.chunks;
        writeln!(out, "Chunk-level evaluation (exact type and span match, BIO2)")?;
        writeln!(
            out,
            "  chunks: gold {}, predicted {}, correct {}",
            c.gold_chunks, c.predicted_chunks, c.correct_chunks
        )?;
        writeln!(
            out,
            "  precision {:6.2}%  recall {:6.2}%  F1 {:6.2}%",
            100.0 * c.precision,
            100.0 * c.recall,
            100.0 * c.f1
        )?;
        writeln!(
            out,
            "  token accuracy {:6.2}% over {} tokens",
            100.0 * self.overall.accuracy(),
            self.overall.tokens
        )?;
        writeln!(out, "Wrongly labelled tokens by gold tag group")?;
        writeln!(
            out,
            "  minority tags: {:5} ({:5.1}%)   accuracy {:6.2}% over {} tokens",
            self.errors.minority_errors,
            100.0 * self.errors.minority_share,
            100.0 * self.minority.accuracy(),
            self.minority.tokens
        )?;
        writeln!(
            out,
            "  majority tags: {:5} ({:5.1}%)   accuracy {:6.2}% over {} tokens",
            self.errors.majority_errors,
            100.0 * self.errors.majority_share,
            100.0 * self.majority.accuracy(),
            self.majority.tokens
        )?;
        writeln!(out, "  total:         {:5}", self.errors.total_errors)?;
        Ok(())
    }
}
