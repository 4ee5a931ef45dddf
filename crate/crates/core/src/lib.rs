//! Subword vocabulary engineering for transfer learning in machine translation.
//!
//! The crate is organized by task:
//!
//! * [`corpus`] loads, samples and cleans line-aligned corpora.
//! * [`subword`] trains and applies BPE merge tables and greedy
//!   longest-match (wordpiece style) vocabularies, with byte escaping of
//!   characters the vocabulary cannot represent.
//! * [`transfer`] turns a parent vocabulary into a child-ready one
//!   (cold start) or builds joint merged/balanced vocabularies (warm start).
//! * [`analysis`] measures how a vocabulary fits a corpus.
//! * [`synth`] corrupts corpora in controlled ways: character substitution
//!   at a chosen relatedness and word-order damage.
//! * [`eval`] holds corpus BLEU, paired bootstrap resampling and the
//!   learning-curve stopping rule.
//! * [`substring`] builds substring-based word representations.
//!
//! Everything randomized takes an explicit seed and is reproducible
//! regardless of the rayon thread count.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod rng;
pub mod substring;
pub mod subword;
pub mod synth;
pub mod transfer;

pub use corpus::{CleaningConfig, CleaningStats, MonoCorpus, ParallelCorpus};
pub use error::{Error, Result};
pub use eval::{BleuReport, LearningCurve, SignificanceResult, StopDecision};
pub use subword::{BoundaryConvention, BpeModel, MergeTable, Segmentation, Vocabulary};
pub use transfer::{MappingKind, TransformStrategy, VocabMapping};

