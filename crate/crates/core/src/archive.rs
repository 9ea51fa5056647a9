//! Versioned binary model archive.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes  "AUGTAGMA"
//! version    u32
//! config     u64 length + UTF-8 TOML of the run configuration
//! inventory  u32 label count, per label: string name + u64 count,
//!            then f64 minority threshold
//! embeddings u32 dim, u64 seed, u32 word count, strings,
//!            then (words + 1) * dim f64 values, row 0 = unknown word
//! base       u32 n-gram width, dense network
//! dat        u8 flag, followed by the augmented tagger when the flag is 1
//! ```
//!
//! A dense network is stored as an activation code, the layer count, the
//! layer sizes and then each layer's row-major weights followed by its biases.

use std::path::Path;

use crate::codec::{Reader, Writer};
use crate::config::RunConfig;
use crate::corpus::TagInventory;
use crate::dat::DatModel;
use crate::error::{Error, Result};
use crate::features::{EmbeddingTable, NGram};
use crate::nn::DenseNet;
use crate::tagger::WindowSoftmaxTagger;

pub const MAGIC: &[u8; 8] = b"AUGTAGMA";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelArchive {
    pub config: RunConfig,
    pub inventory: TagInventory,
    pub base: WindowSoftmaxTagger,
    pub dat: Option<DatModel>,
}

fn len_u32(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Archive(format!("{what} too large: {n}")))
}

impl ModelArchive {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = Writer::default();
        w.raw(MAGIC);
        w.u32(FORMAT_VERSION);
        w.str(&self.config.to_toml()?);

        let inv = &self.inventory;
        w.u32(len_u32(inv.len(), "label inventory")?);
        for (name, &count) in inv.labels().iter().zip(inv.counts()) {
            w.str(name);
            w.u64(count);
        }
        w.f64(inv.minority_threshold());

        let emb = self.base.embeddings();
        w.u32(len_u32(emb.dim(), "embedding dimension")?);
        w.u64(emb.seed());
        w.u32(len_u32(emb.vocab_size(), "vocabulary")?);
        for word in emb.words() {
            w.str(word);
        }
        w.f64s(emb.raw());

        w.u32(self.base.ngram().get() as u32);
        self.base.classifier().encode(&mut w);

        match &self.dat {
            Some(dat) => {
                w.u8(1);
                dat.encode(&mut w);
            }
            None => w.u8(0),
        }
        Ok(w.into_bytes())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(MAGIC.len()).ok() != Some(&MAGIC[..]) {
            return Err(Error::Archive("not a model archive".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Archive(format!(
                "archive format version {version}, expected {FORMAT_VERSION}"
            )));
        }
        let config = RunConfig::from_toml(&r.string()?)?;

        let n = r.u32()? as usize;
        let mut labels = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        for _ in 0..n {
            labels.push(r.string()?);
            counts.push(r.u64()?);
        }
        let inventory = TagInventory::new(labels, counts, r.f64()?)?;

        let dim = r.u32()? as usize;
        let seed = r.u64()?;
        let vocab = r.u32()? as usize;
        let words = (0..vocab).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
        let values = (vocab + 1)
            .checked_mul(dim)
            .ok_or_else(|| Error::Archive("embedding table size overflows".into()))?;
        let vectors = r.f64s(values)?;
        let embeddings = EmbeddingTable::from_parts(dim, words, vectors, seed)?;

        let ngram = NGram::new(r.u32()? as usize)?;
        let classifier = DenseNet::decode(&mut r)?;
        if classifier.output_size() != inventory.len() {
            return Err(Error::Archive(format!(
                "base classifier has {} outputs for {} labels",
                classifier.output_size(),
                inventory.len()
            )));
        }
        let base = WindowSoftmaxTagger::from_parts(embeddings, ngram, classifier)?;

        let dat = match r.u8()? {
            0 => None,
            1 => {
                let dat = DatModel::decode(&mut r)?;
                if dat.num_labels() != inventory.len() || dat.dim() != dim {
                    return Err(Error::Archive("augmented tagger does not match the base model".into()));
                }
                Some(dat)
            }
            flag => return Err(Error::Archive(format!("invalid augmented-tagger flag {flag}"))),
        };
        if !r.is_at_end() {
            return Err(Error::Archive("trailing bytes after archive".into()));
        }
        Ok(ModelArchive {
            config,
            inventory,
            base,
            dat,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
