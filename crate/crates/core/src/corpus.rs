//! Tagged corpora: CoNLL column files and paired token/label slot files.
//!
//! Two on-disk formats are understood.
//!
//! * CoNLL columns: one token per line, whitespace-delimited columns, blank
//!   lines between sentences. `-DOCSTART-` lines are skipped. Every line must
//!   carry the same number of columns as the first token line.
//! * Slot records: one utterance per line, `w1 w2 .. wn<TAB>l1 l2 .. ln`.
//!   When the words are wrapped in `BOS` / `EOS` markers the first and last
//!   pairs are dropped, which also discards the trailing intent label used by
//!   the common ATIS distribution.
//!
//! A training corpus builds its own [`TagInventory`] in first-seen label
//! order. Test corpora are parsed against the training inventory and any label
//! the training split never produced is rejected.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MINORITY_THRESHOLD: f64 = 0.01;

/// Index of a label in a [`TagInventory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub u32);

impl LabelId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for LabelId {
    fn from(i: usize) -> Self {
        LabelId(i as u32)
    }
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub gold: LabelId,
}

impl Token {
    /// Key used for vocabulary lookups. The surface form is kept untouched.
    pub fn vocab_key(&self) -> String {
        self.surface.to_lowercase()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Empty("sentence has no tokens".into()));
        }
        Ok(Sentence { tokens })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn gold_labels(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.tokens.iter().map(|t| t.gold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Label names, their training-token counts and the minority cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct TagInventory {
    labels: Vec<String>,
    counts: Vec<u64>,
    minority_threshold: f64,
    index: HashMap<String, LabelId>,
}

impl TagInventory {
    pub fn new(labels: Vec<String>, counts: Vec<u64>, minority_threshold: f64) -> Result<Self> {
        if labels.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: counts.len(),
            });
        }
        check_threshold(minority_threshold)?;
        let mut index = HashMap::with_capacity(labels.len());
        for (i, name) in labels.iter().enumerate() {
            if index.insert(name.clone(), LabelId::from(i)).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate label `{name}`")));
            }
        }
        Ok(TagInventory {
            labels,
            counts,
            minority_threshold,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn id(&self, name: &str) -> Option<LabelId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: LabelId) -> &str {
        &self.labels[id.index()]
    }

    pub fn minority_threshold(&self) -> f64 {
        self.minority_threshold
    }

    pub fn set_minority_threshold(&mut self, threshold: f64) -> Result<()> {
        check_threshold(threshold)?;
        self.minority_threshold = threshold;
        Ok(())
    }

    /// A label is minority when it holds strictly less than the threshold
    /// fraction of training tokens.
    pub fn is_minority(&self, id: LabelId) -> bool {
        let total = self.total();
        if total == 0 {
            return false;
        }
        (self.counts[id.index()] as f64) / (total as f64) < self.minority_threshold
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "minority threshold must lie in (0, 1], got {t}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub inventory: TagInventory,
    pub split: Split,
}

impl Corpus {
    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Gold label names per sentence.
    pub fn gold_names(&self) -> Vec<Vec<&str>> {
        self.sentences
            .iter()
            .map(|s| s.gold_labels().map(|l| self.inventory.name(l)).collect())
            .collect()
    }

    pub fn write_conll<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, sentence) in self.sentences.iter().enumerate() {
            if i > 0 {
                writeln!(out)?;
            }
            for token in sentence.tokens() {
                writeln!(out, "{} {}", token.surface, self.inventory.name(token.gold))?;
            }
        }
        Ok(())
    }

    pub fn write_slots<W: Write>(&self, mut out: W) -> Result<()> {
        for sentence in &self.sentences {
            let words: Vec<&str> = sentence.tokens().iter().map(|t| t.surface.as_str()).collect();
            let labels: Vec<&str> = sentence.gold_labels().map(|l| self.inventory.name(l)).collect();
            writeln!(out, "{}\t{}", words.join(" "), labels.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Conll,
    Slots,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conll" => Ok(CorpusFormat::Conll),
            "slots" => Ok(CorpusFormat::Slots),
            other => Err(Error::InvalidConfig(format!("unknown corpus format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub token_col: usize,
    pub label_col: usize,
}

impl Default for ColumnSpec {
    /// First column holds the word, last column of a 4-column CoNLL-2003 file
    /// holds the NER tag.
    fn default() -> Self {
        ColumnSpec {
            token_col: 0,
            label_col: 3,
        }
    }
}

enum Labels<'a> {
    Build {
        names: Vec<String>,
        counts: Vec<u64>,
        index: HashMap<String, LabelId>,
    },
    Fixed(&'a TagInventory),
}

impl<'a> Labels<'a> {
    fn new(fixed: Option<&'a TagInventory>) -> Self {
        match fixed {
            Some(inv) => Labels::Fixed(inv),
            None => Labels::Build {
                names: Vec::new(),
                counts: Vec::new(),
                index: HashMap::new(),
            },
        }
    }

    fn intern(&mut self, name: &str, line: usize) -> Result<LabelId> {
        match self {
            Labels::Fixed(inv) => inv.id(name).ok_or_else(|| Error::UnknownLabel {
                label: name.to_string(),
                line,
            }),
            Labels::Build {
                names,
                counts,
                index,
            } => {
                let id = *index.entry(name.to_string()).or_insert_with(|| {
                    names.push(name.to_string());
                    counts.push(0);
                    LabelId::from(names.len() - 1)
                });
                counts[id.index()] += 1;
                Ok(id)
            }
        }
    }

    fn finish(self, threshold: f64) -> Result<(TagInventory, Split)> {
        match self {
            Labels::Fixed(inv) => Ok((inv.clone(), Split::Test)),
            Labels::Build { names, counts, .. } => {
                Ok((TagInventory::new(names, counts, threshold)?, Split::Train))
            }
        }
    }
}

/// Parses a CoNLL column file into a training corpus with a fresh inventory.
pub fn parse_conll<R: BufRead>(source: R, columns: ColumnSpec) -> Result<Corpus> {
    read_conll(source, columns, None, DEFAULT_MINORITY_THRESHOLD)
}

/// Parses a CoNLL column file against an existing training inventory.
pub fn parse_conll_with_inventory<R: BufRead>(
    source: R,
    columns: ColumnSpec,
    inventory: &TagInventory,
) -> Result<Corpus> {
    read_conll(source, columns, Some(inventory), inventory.minority_threshold())
}

fn read_conll<R: BufRead>(
    source: R,
    columns: ColumnSpec,
    fixed: Option<&TagInventory>,
    threshold: f64,
) -> Result<Corpus> {
    let needed = columns.token_col.max(columns.label_col) + 1;
    let mut labels = Labels::new(fixed);
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut width: Option<usize> = None;

    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            if !current.is_empty() {
                sentences.push(Sentence::new(std::mem::take(&mut current))?);
            }
            continue;
        }
        if fields[0] == "-DOCSTART-" {
            continue;
        }
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(Error::parse(
                lineno,
                format!("expected {expected} columns, found {}", fields.len()),
            ));
        }
        if fields.len() < needed {
            return Err(Error::parse(
                lineno,
                format!("need at least {needed} columns, found {}", fields.len()),
            ));
        }
        let gold = labels.intern(fields[columns.label_col], lineno)?;
        current.push(Token {
            surface: fields[columns.token_col].to_string(),
            gold,
        });
    }
    if !current.is_empty() {
        sentences.push(Sentence::new(current)?);
    }
    if sentences.is_empty() {
        return Err(Error::Empty("CoNLL stream contains no sentences".into()));
    }
    let (inventory, split) = labels.finish(threshold)?;
    Ok(Corpus {
        sentences,
        inventory,
        split,
    })
}

/// Parses a slot-record file into a training corpus with a fresh inventory.
pub fn parse_slot_corpus<R: BufRead>(source: R) -> Result<Corpus> {
    read_slots(source, None, DEFAULT_MINORITY_THRESHOLD)
}

pub fn parse_slot_corpus_with_inventory<R: BufRead>(
    source: R,
    inventory: &TagInventory,
) -> Result<Corpus> {
    read_slots(source, Some(inventory), inventory.minority_threshold())
}

fn read_slots<R: BufRead>(
    source: R,
    fixed: Option<&TagInventory>,
    threshold: f64,
) -> Result<Corpus> {
    let mut labels = Labels::new(fixed);
    let mut sentences = Vec::new();
    let mut record = 0;

    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        record += 1;
        let record_err = |message: String| Error::Record {
            record,
            line: lineno,
            message,
        };
        let (left, right) = line
            .split_once('\t')
            .ok_or_else(|| record_err("missing TAB between words and labels".into()))?;
        let mut words: Vec<&str> = left.split_whitespace().collect();
        let mut tags: Vec<&str> = right.split_whitespace().collect();
        if words.len() != tags.len() {
            return Err(record_err(format!(
                "{} words but {} labels",
                words.len(),
                tags.len()
            )));
        }
        if words.len() >= 2 && words[0] == "BOS" && words[words.len() - 1] == "EOS" {
            words = words[1..words.len() - 1].to_vec();
            tags = tags[1..tags.len() - 1].to_vec();
        }
        if words.is_empty() {
            return Err(record_err("utterance has no words".into()));
        }
        let mut tokens = Vec::with_capacity(words.len());
        for (w, t) in words.iter().zip(&tags) {
            tokens.push(Token {
                surface: (*w).to_string(),
                gold: labels.intern(t, lineno)?,
            });
        }
        sentences.push(Sentence::new(tokens)?);
    }
    if sentences.is_empty() {
        return Err(Error::Empty("slot stream contains no utterances".into()));
    }
    let (inventory, split) = labels.finish(threshold)?;
    Ok(Corpus {
        sentences,
        inventory,
        split,
    })
}

/// Opens and parses a corpus file. With `inventory`, labels are resolved
/// against it and unknown labels are rejected.
pub fn read_corpus(
    path: &std::path::Path,
    format: CorpusFormat,
    columns: ColumnSpec,
    inventory: Option<&TagInventory>,
) -> Result<Corpus> {
    let source = std::io::BufReader::new(std::fs::File::open(path)?);
    match (format, inventory) {
        (CorpusFormat::Conll, None) => parse_conll(source, columns),
        (CorpusFormat::Conll, Some(inv)) => parse_conll_with_inventory(source, columns, inv),
        (CorpusFormat::Slots, None) => parse_slot_corpus(source),
        (CorpusFormat::Slots, Some(inv)) => parse_slot_corpus_with_inventory(source, inv),
    }
}

/// Minority/majority partition of the inventory by training-token share.
#[derive(Debug, Clone, PartialEq)]
pub struct TagStatistics {
    pub threshold: f64,
    pub minority: Vec<LabelId>,
    pub majority: Vec<LabelId>,
    pub minority_tokens: u64,
    pub majority_tokens: u64,
    pub total_tokens: u64,
}

pub fn tag_statistics(corpus: &Corpus) -> Result<TagStatistics> {
    if corpus.sentences.is_empty() {
        return Err(Error::Empty("corpus has no sentences".into()));
    }
    let inv = &corpus.inventory;
    let mut stats = TagStatistics {
        threshold: inv.minority_threshold(),
        minority: Vec::new(),
        majority: Vec::new(),
        minority_tokens: 0,
        majority_tokens: 0,
        total_tokens: inv.total(),
    };
    for (i, &count) in inv.counts().iter().enumerate() {
        let id = LabelId::from(i);
        if inv.is_minority(id) {
            stats.minority.push(id);
            stats.minority_tokens += count;
        } else {
            stats.majority.push(id);
            stats.majority_tokens += count;
        }
    }
    Ok(stats)
}

impl TagStatistics {
    /// Key-value report, one `key=value` per line.
    pub fn write_report<W: Write>(&self, inventory: &TagInventory, mut out: W) -> Result<()> {
        writeln!(out, "minority_threshold={}", self.threshold)?;
        writeln!(out, "minority_tag_types={}", self.minority.len())?;
        writeln!(out, "minority_tokens={}", self.minority_tokens)?;
        writeln!(out, "majority_tag_types={}", self.majority.len())?;
        writeln!(out, "majority_tokens={}", self.majority_tokens)?;
        writeln!(out, "total_tag_types={}", self.minority.len() + self.majority.len())?;
        writeln!(out, "total_tokens={}", self.total_tokens)?;
        let names = |ids: &[LabelId]| {
            ids.iter()
                .map(|&l| inventory.name(l))
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(out, "minority_labels={}", names(&self.minority))?;
        writeln!(out, "majority_labels={}", names(&self.majority))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_SENTENCES: &str = "John B-PER\nSmith I-PER\nran O\n\nMary B-PER\nsat O\n";

    fn conll2(src: &str) -> Result<Corpus> {
        parse_conll(
            src.as_bytes(),
            ColumnSpec {
                token_col: 0,
                label_col: 1,
            },
        )
    }

    #[test]
    fn two_sentence_fixture() {
        let c = conll2(TWO_SENTENCES).unwrap();
        assert_eq!(c.sentences.len(), 2);
        assert_eq!(c.inventory.labels(), &["B-PER", "I-PER", "O"]);
        assert_eq!(c.inventory.counts(), &[2, 1, 2]);
        assert_eq!(c.num_tokens(), 5);
        assert_eq!(c.split, Split::Train);
        assert_eq!(c.sentences[1].tokens()[0].surface, "Mary");
    }

    #[test]
    fn one_column_line_in_second_sentence_is_rejected() {
        let src = "John B-PER\nran O\n\nMary\nsat O\n";
        match conll2(src) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_stream_is_an_error() {
        assert!(matches!(conll2(""), Err(Error::Empty(_))));
        assert!(matches!(conll2("\n\n-DOCSTART- -X- O O\n\n"), Err(Error::Empty(_))));
    }

    #[test]
    fn docstart_and_extra_blank_lines_are_skipped() {
        let src = "-DOCSTART- -X- -X- O\n\nEU NNP B-NP B-ORG\nrejects VBZ B-VP O\n\n\n\nPeter NNP B-NP B-PER\n";
        let c = parse_conll(src.as_bytes(), ColumnSpec::default()).unwrap();
        assert_eq!(c.sentences.len(), 2);
        assert_eq!(c.inventory.labels(), &["B-ORG", "O", "B-PER"]);
    }

    #[test]
    fn test_split_rejects_unknown_labels() {
        let train = conll2(TWO_SENTENCES).unwrap();
        let spec = ColumnSpec {
            token_col: 0,
            label_col: 1,
        };
        let ok = parse_conll_with_inventory("Bob B-PER\n".as_bytes(), spec, &train.inventory).unwrap();
        assert_eq!(ok.split, Split::Test);
        assert_eq!(ok.inventory.counts(), train.inventory.counts());
        let err = parse_conll_with_inventory("Paris B-LOC\n".as_bytes(), spec, &train.inventory);
        assert!(matches!(err, Err(Error::UnknownLabel { line: 1, .. })));
    }

    #[test]
    fn slot_records() {
        let c = parse_slot_corpus("show flights to boston today\tO O O B-toloc B-date\n".as_bytes())
            .unwrap();
        assert_eq!(c.sentences.len(), 1);
        assert_eq!(c.sentences[0].len(), 5);

        let err = parse_slot_corpus("a b\tO O\nshow flights to boston today\tO O O B-toloc\n".as_bytes());
        match err {
            Err(Error::Record { record, line, .. }) => assert_eq!((record, line), (2, 2)),
            other => panic!("expected record error, got {other:?}"),
        }
    }

    #[test]
    fn slot_bos_eos_markers_and_intent_are_dropped() {
        let src = "BOS i want to fly EOS\tO O O O O atis_flight\n";
        let c = parse_slot_corpus(src.as_bytes()).unwrap();
        assert_eq!(c.sentences[0].len(), 4);
        assert_eq!(c.inventory.labels(), &["O"]);
    }

    #[test]
    fn single_label_corpus_is_all_majority() {
        let c = conll2("a O\nb O\n").unwrap();
        let s = tag_statistics(&c).unwrap();
        assert!(s.minority.is_empty());
        assert_eq!(s.majority, vec![LabelId(0)]);
        assert_eq!(s.majority_tokens, 2);
    }

    #[test]
    fn minority_cutoff_is_strict() {
        // 1 of 100 tokens is exactly 1%, which is not below the threshold.
        let mut src = String::from("x B-PER\n");
        for _ in 0..99 {
            src.push_str("y O\n");
        }
        let c = conll2(&src).unwrap();
        let s = tag_statistics(&c).unwrap();
        assert!(s.minority.is_empty());
        src.push_str("z O\n");
        let s = tag_statistics(&conll2(&src).unwrap()).unwrap();
        assert_eq!(s.minority, vec![LabelId(0)]);
        assert_eq!(s.minority_tokens + s.majority_tokens, 101);
    }

    #[test]
    fn report_keys() {
        let c = conll2(TWO_SENTENCES).unwrap();
        let s = tag_statistics(&c).unwrap();
        let mut buf = Vec::new();
        s.write_report(&c.inventory, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("total_tokens=5\n"));
        assert!(text.contains("total_tag_types=3\n"));
    }

    #[test]
    fn vocab_key_lowercases_only_for_lookup() {
        let c = conll2(TWO_SENTENCES).unwrap();
        let t = &c.sentences[0].tokens()[0];
        assert_eq!(t.vocab_key(), "john");
        assert_eq!(t.surface, "John");
    }
}
