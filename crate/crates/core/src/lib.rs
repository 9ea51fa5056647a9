//! Two-stage sequence tagging: a base tagger that emits per-token label
//! distributions and a Q-learning augmented tagger that relabels the tokens
//! the base tagger is unsure about.

pub mod archive;
pub mod cli;
pub mod codec;
pub mod config;
pub mod corpus;
pub mod dat;
pub mod error;
pub mod eval;
pub mod features;
pub mod nn;
pub mod pipeline;
pub mod synthetic;
pub mod tagger;

pub use archive::ModelArchive;
pub use config::RunConfig;
pub use corpus::{Corpus, LabelId, Sentence, TagInventory, Token};
pub use error::{Error, Result};
