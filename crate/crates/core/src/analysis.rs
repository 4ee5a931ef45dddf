//! How well a vocabulary fits a corpus.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::MonoCorpus;
use crate::error::{Error, Result};
use crate::subword::Segmenter;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegRateReport {
    pub tokens_per_word: f64,
    pub total_words: usize,
    pub total_subword_tokens: usize,
}

/// Average number of subword tokens per whitespace word.
pub fn segmentation_rate<S: Segmenter + ?Sized>(segmenter: &S, corpus: &MonoCorpus) -> Result<SegRateReport> {
    let (words, tokens) = corpus
        .sentences
        .par_iter()
        .map(|line| {
            let mut buf = Vec::new();
            let mut words = 0usize;
            for w in line.split_whitespace() {
                words += 1;
                segmenter.segment_word(w, &mut buf);
            }
            (words, buf.len())
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if words == 0 {
        return Err(Error::Empty("segmentation-rate corpus"));
    }
    Ok(SegRateReport {
        tokens_per_word: tokens as f64 / words as f64,
        total_words: words,
        total_subword_tokens: tokens,
    })
}

/// Occurrence count of every vocabulary entry in the segmented corpus.
/// Pieces with no entry (unknown single characters) are not counted.
pub fn token_frequencies<S: Segmenter + ?Sized>(segmenter: &S, corpus: &MonoCorpus) -> Vec<u64> {
    let vocab = segmenter.vocabulary();
    corpus
        .sentences
        .par_iter()
        .fold(
            || vec![0u64; vocab.len()],
            |mut acc, line| {
                let mut buf = Vec::new();
                for w in line.split_whitespace() {
                    buf.clear();
                    segmenter.segment_word(w, &mut buf);
                    for tok in &buf {
                        if let Some(id) = vocab.entry_of(tok) {
                            acc[id] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; vocab.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Percentage of vocabulary entries used at least `min_count` times.
pub fn vocab_coverage<S: Segmenter + ?Sized>(segmenter: &S, corpus: &MonoCorpus, min_count: u64) -> Result<f64> {
    let vocab = segmenter.vocabulary();
    if vocab.is_empty() {
        return Err(Error::Empty("vocabulary"));
    }
    let freqs = token_frequencies(segmenter, corpus);
    let used = freqs.iter().filter(|&&c| c >= min_count.max(1)).count();
    Ok(100.0 * used as f64 / vocab.len() as f64)
}

/// Rounds a percentage to two decimals, halves away from zero.
pub fn round_pct(value: f64) -> f64 {
    let scaled = value * 100.0;
    // Shave representation error so 12.345 rounds up as written.
    let nudged = scaled + scaled.signum() * 1e-9;
    nudged.round() / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageClass {
    /// Languages in which the entries of this class are used, sorted.
    pub languages: Vec<String>,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageBreakdown {
    /// Non-empty language subsets, ordered by subset size then name.
    pub classes: Vec<UsageClass>,
    pub reused_parent_pct: f64,
    pub unused_pct: f64,
    pub min_count: u64,
    pub vocab_size: usize,
}

impl UsageBreakdown {
    pub fn class_pct(&self, languages: &[&str]) -> f64 {
        let mut key: Vec<&str> = languages.to_vec();
        key.sort_unstable();
        self.classes
            .iter()
            .find(|c| c.languages.iter().map(String::as_str).eq(key.iter().copied()))
            .map_or(0.0, |c| c.percent)
    }

    /// One row per class, then `reused_parent` and `unused` rows.
    /// Percentages rounded to two decimals.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("class\tcount\tpercent\n");
        for c in &self.classes {
            out.push_str(&format!("{}\t{}\t{:.2}\n", c.languages.join("+"), c.count, round_pct(c.percent)));
        }
        out.push_str(&format!("reused_parent\t\t{:.2}\n", round_pct(self.reused_parent_pct)));
        out.push_str(&format!("unused\t\t{:.2}\n", round_pct(self.unused_pct)));
        out
    }
}

/// Classifies every vocabulary entry by the set of languages whose corpus
/// uses it at least `min_count` times (threshold applied per language).
///
/// An entry counts as reused-parent when it is used by at least one
/// parent-side language and at least one child-side language.
pub fn usage_breakdown<S: Segmenter + ?Sized>(
    segmenter: &S,
    corpora: &BTreeMap<String, MonoCorpus>,
    parent_langs: &BTreeSet<String>,
    child_langs: &BTreeSet<String>,
    min_count: u64,
) -> Result<UsageBreakdown> {
    for lang in parent_langs.iter().chain(child_langs) {
        if !corpora.contains_key(lang) {
            return Err(Error::UnknownLanguage(lang.clone()));
        }
    }
    let vocab = segmenter.vocabulary();
    if vocab.is_empty() {
        return Err(Error::Empty("vocabulary"));
    }
    let langs: Vec<&String> = corpora.keys().collect();
    let usage: Vec<Vec<u64>> = corpora.values().map(|c| token_frequencies(segmenter, c)).collect();
    let threshold = min_count.max(1);

    let mut classes: BTreeMap<(usize, Vec<String>), usize> = BTreeMap::new();
    let (mut unused, mut reused) = (0usize, 0usize);
    for id in 0..vocab.len() {
        let used_in: Vec<String> = langs
            .iter()
            .zip(&usage)
            .filter(|(_, u)| u[id] >= threshold)
            .map(|(l, _)| (*l).clone())
            .collect();
        if used_in.is_empty() {
            unused += 1;
            continue;
        }
        let in_parent = used_in.iter().any(|l| parent_langs.contains(l));
        let in_child = used_in.iter().any(|l| child_langs.contains(l));
        if in_parent && in_child {
            reused += 1;
        }
        *classes.entry((used_in.len(), used_in)).or_default() += 1;
    }
    let pct = |n: usize| 100.0 * n as f64 / vocab.len() as f64;
    Ok(UsageBreakdown {
        classes: classes
            .into_iter()
            .map(|((_, languages), count)| UsageClass {
                languages,
                count,
                percent: pct(count),
            })
            .collect(),
        reused_parent_pct: pct(reused),
        unused_pct: pct(unused),
        min_count,
        vocab_size: vocab.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subword::{BoundaryConvention, Vocabulary};

    fn v(tokens: &[&str]) -> Vocabulary {
        Vocabulary::from_strs(tokens, BoundaryConvention::WordEnd).unwrap()
    }

    fn mono(lines: &[&str]) -> MonoCorpus {
        MonoCorpus::from_lines(lines.iter().copied())
    }

    fn langs(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn whole_word_vocab_rate_is_one() {
        let r = segmentation_rate(&v(&["cat_", "dog_"]), &mono(&["cat dog", "dog"])).unwrap();
        assert_eq!(r.tokens_per_word, 1.0);
        assert_eq!((r.total_words, r.total_subword_tokens), (3, 3));
    }

    #[test]
    fn character_vocab_rate() {
        let r = segmentation_rate(&v(&["a", "b", "c", "d"]), &mono(&["ab cd"])).unwrap();
        assert_eq!(r.tokens_per_word, 2.0);
    }

    #[test]
    fn empty_corpus_rate_errors() {
        assert!(segmentation_rate(&v(&["a"]), &mono(&["", " "])).is_err());
    }

    #[test]
    fn coverage_cases() {
        let vocab = v(&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
        assert_eq!(vocab_coverage(&vocab, &mono(&["abcdefghij"]), 1).unwrap(), 100.0);
        // "abc" emits a, b, c_ -> three distinct entries out of ten.
        assert_eq!(vocab_coverage(&vocab, &mono(&["abc"]), 1).unwrap(), 30.0);
        assert_eq!(vocab_coverage(&vocab, &mono(&["abc"]), 2).unwrap(), 0.0);
    }

    #[test]
    fn three_token_breakdown() {
        let vocab = v(&["a", "b", "c"]);
        let corpora: BTreeMap<String, MonoCorpus> =
            [("L1".to_string(), mono(&["a b"])), ("L2".to_string(), mono(&["b c"]))].into();
        let b = usage_breakdown(&vocab, &corpora, &langs(&["L1"]), &langs(&["L2"]), 1).unwrap();
        let third = 100.0 / 3.0;
        assert!((b.class_pct(&["L1"]) - third).abs() < 1e-9);
        assert!((b.class_pct(&["L1", "L2"]) - third).abs() < 1e-9);
        assert!((b.class_pct(&["L2"]) - third).abs() < 1e-9);
        assert!((b.reused_parent_pct - third).abs() < 1e-9);
        assert_eq!(b.unused_pct, 0.0);
    }

    #[test]
    fn min_count_drops_rare_tokens() {
        let vocab = v(&["p", "q"]);
        let line = ["p"; 10].join(" ") + " " + &["q"; 9].join(" ");
        let corpora: BTreeMap<String, MonoCorpus> = [("en".to_string(), mono(&[&line]))].into();
        let b = usage_breakdown(&vocab, &corpora, &langs(&["en"]), &langs(&["en"]), 10).unwrap();
        assert_eq!(b.unused_pct, 50.0);
        assert_eq!(b.reused_parent_pct, 50.0);
    }

    #[test]
    fn unknown_language() {
        let corpora: BTreeMap<String, MonoCorpus> = [("en".to_string(), mono(&["a"]))].into();
        assert!(matches!(
            usage_breakdown(&v(&["a"]), &corpora, &langs(&["xx"]), &langs(&["en"]), 1),
            Err(Error::UnknownLanguage(_))
        ));
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_pct(33.33333), 33.33);
        assert_eq!(round_pct(12.345), 12.35);
        assert_eq!(round_pct(0.005), 0.01);
    }
}
