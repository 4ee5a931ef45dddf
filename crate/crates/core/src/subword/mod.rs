//! Subword segmentation: BPE merge tables and greedy longest-match
//! vocabularies.

mod bpe;
pub mod escape;
mod greedy;
mod vocab;

use std::fmt;

use rayon::prelude::*;

use crate::corpus::MonoCorpus;
use crate::error::Result;

pub use bpe::{train_bpe, BpeModel, MergeTable, END_OF_WORD};
pub use escape::{escape_bytes, unescape};
pub use greedy::{segment_greedy, train_greedy_vocab, GreedyTrainer, DEFAULT_BATCH, DEFAULT_TOLERANCE};
pub use vocab::{BoundaryConvention, Vocabulary};

/// Segmented line: tokens carrying boundary marks, joined by single spaces
/// when written out.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Segmentation {
    pub tokens: Vec<String>,
}

impl Segmentation {
    pub fn new(tokens: Vec<String>) -> Self {
        Self { tokens }
    }

    /// Parses a segmented line (tokens separated by single spaces).
    pub fn parse(line: &str) -> Self {
        Self {
            tokens: line
                .split(' ')
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for Segmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

/// Anything that turns a line into subword tokens.
pub trait Segmenter: Sync {
    fn vocabulary(&self) -> &Vocabulary;

    /// Appends the marked pieces of one whitespace-free word.
    fn segment_word(&self, word: &str, out: &mut Vec<String>);

    fn convention(&self) -> BoundaryConvention {
        self.vocabulary().convention()
    }

    fn segment(&self, line: &str) -> Segmentation {
        let mut tokens = Vec::new();
        for word in escape::split_words(line) {
            self.segment_word(word, &mut tokens);
        }
        Segmentation { tokens }
    }

    /// Segments every line; output order follows input order.
    fn segment_corpus(&self, corpus: &MonoCorpus) -> Vec<Segmentation> {
        corpus.sentences.par_iter().map(|l| self.segment(l)).collect()
    }
}

/// Attaches boundary marks to the pieces of one word.
pub(crate) fn mark_pieces(pieces: Vec<String>, convention: BoundaryConvention, out: &mut Vec<String>) {
    let n = pieces.len();
    for (i, mut piece) in pieces.into_iter().enumerate() {
        let last = i + 1 == n;
        match convention {
            BoundaryConvention::ContinuationSuffix if !last => {
                piece.push_str(BoundaryConvention::CONTINUATION)
            }
            BoundaryConvention::WordEnd if last => piece.push(BoundaryConvention::WORD_END),
            _ => {}
        }
        out.push(piece);
    }
}

/// Inverse of segmentation: rebuilds the original line, decoding escapes.
pub fn detokenize(seg: &Segmentation, convention: BoundaryConvention) -> Result<String> {
    let mut joined = String::new();
    match convention {
        BoundaryConvention::ContinuationSuffix => {
            let mut open = false;
            for tok in &seg.tokens {
                if !open && !joined.is_empty() {
                    joined.push(' ');
                }
                match tok.strip_suffix(BoundaryConvention::CONTINUATION) {
                    Some(stem) => {
                        joined.push_str(stem);
                        open = true;
                    }
                    None => {
                        joined.push_str(tok);
                        open = false;
                    }
                }
            }
        }
        BoundaryConvention::WordEnd => {
            let concat: String = seg.tokens.concat();
            let mut words: Vec<&str> = concat.split(BoundaryConvention::WORD_END).collect();
            if words.last() == Some(&"") {
                words.pop();
            }
            joined = words.join(" ");
        }
    }
    unescape(&joined)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(s: &str) -> Segmentation {
        Segmentation::parse(s)
    }

    #[test]
    fn detok_continuation() {
        let out = detokenize(&seg("n@@ e@@ we@@ st"), BoundaryConvention::ContinuationSuffix).unwrap();
        assert_eq!(out, "newest");
        let out = detokenize(&seg("a@@ b c"), BoundaryConvention::ContinuationSuffix).unwrap();
        assert_eq!(out, "ab c");
    }

    #[test]
    fn detok_word_end() {
        assert_eq!(detokenize(&seg("me_"), BoundaryConvention::WordEnd).unwrap(), "me");
        assert_eq!(
            detokenize(&seg("0_ v \\ 1 9 5 ; \\ 1 7 3 ; k end u_"), BoundaryConvention::WordEnd).unwrap(),
            "0 víkendu"
        );
    }

    #[test]
    fn detok_reports_bad_escape() {
        assert!(detokenize(&seg("\\ 9 x_"), BoundaryConvention::WordEnd).is_err());
    }

    #[test]
    fn empty_segmentation() {
        assert_eq!(detokenize(&Segmentation::default(), BoundaryConvention::WordEnd).unwrap(), "");
        assert_eq!(
            detokenize(&Segmentation::default(), BoundaryConvention::ContinuationSuffix).unwrap(),
            ""
        );
    }
}
