//! Line-aligned monolingual and parallel corpora.

use std::fs;
use std::path::Path;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// One sentence per entry. Sentences never contain line breaks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonoCorpus {
    pub sentences: Vec<String>,
    pub language_tag: Option<String>,
}

impl MonoCorpus {
    pub fn new(sentences: Vec<String>) -> Self {
        Self {
            sentences,
            language_tag: None,
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.language_tag = Some(tag.into());
        self
    }

    pub fn from_lines<I, S>(lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(lines.into_iter().map(Into::into).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::new(read_lines(path.as_ref())?))
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().map(String::as_str)
    }

    /// Concatenation of several corpora, e.g. for joint vocabularies.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a MonoCorpus>) -> Self {
        Self::new(
            parts
                .into_iter()
                .flat_map(|c| c.sentences.iter().cloned())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pairs: Vec<(String, String)>,
}

impl ParallelCorpus {
    pub fn from_pairs(pairs: Vec<(String, String)>) -> Self {
        Self { pairs }
    }

    /// Zips two sides; fails when their lengths differ.
    pub fn from_sides(source: Vec<String>, target: Vec<String>) -> Result<Self> {
        if source.len() != target.len() {
            return Err(Error::Alignment {
                source_lines: source.len(),
                target_lines: target.len(),
            });
        }
        Ok(Self {
            pairs: source.into_iter().zip(target).collect(),
        })
    }

    /// Loads two line-aligned files.
    pub fn load(source_path: impl AsRef<Path>, target_path: impl AsRef<Path>) -> Result<Self> {
        let source = read_lines(source_path.as_ref())?;
        let target = read_lines(target_path.as_ref())?;
        Self::from_sides(source, target)
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<(String, String)> {
        self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn source(&self) -> MonoCorpus {
        MonoCorpus::new(self.pairs.iter().map(|(s, _)| s.clone()).collect())
    }

    pub fn target(&self) -> MonoCorpus {
        MonoCorpus::new(self.pairs.iter().map(|(_, t)| t.clone()).collect())
    }

    pub fn write(&self, source_path: impl AsRef<Path>, target_path: impl AsRef<Path>) -> Result<()> {
        write_lines(source_path.as_ref(), self.pairs.iter().map(|(s, _)| s.as_str()))?;
        write_lines(target_path.as_ref(), self.pairs.iter().map(|(_, t)| t.as_str()))
    }
}

/// Reads a UTF-8 file as lines. `\r\n` endings are normalized and
/// trailing empty lines at end of file are dropped.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    Ok(split_lines(&text))
}

pub(crate) fn split_lines(text: &str) -> Vec<String> {
    let mut lines: Vec<String> = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines
}

pub fn write_lines<'a>(path: &Path, lines: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut out = String::new();
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Whitespace tokens: maximal runs of non-whitespace characters.
pub fn token_count(sentence: &str) -> usize {
    sentence.split_whitespace().count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleaningConfig {
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub max_length_ratio: f64,
    pub strip_control_chars: bool,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        Self {
            min_tokens: 5,
            max_tokens: 100,
            max_length_ratio: 9.0,
            strip_control_chars: true,
        }
    }
}

impl CleaningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_tokens < 1 {
            return Err(Error::Config("min_tokens must be at least 1".into()));
        }
        if self.max_tokens <= self.min_tokens {
            return Err(Error::Config(format!(
                "max_tokens ({}) must exceed min_tokens ({})",
                self.max_tokens, self.min_tokens
            )));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.max_length_ratio >= 1.0) {
            return Err(Error::Config(format!(
                "max_length_ratio must be >= 1, got {}",
                self.max_length_ratio
            )));
        }
        Ok(())
    }
}

/// Why a pair was dropped. Rules are checked in declaration order and the
/// first failing rule is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalReason {
    Control,
    TooShort,
    TooLong,
    Ratio,
    Predicate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningStats {
    pub kept: usize,
    pub removed_too_short: usize,
    pub removed_too_long: usize,
    pub removed_ratio: usize,
    pub removed_control: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub removed_predicate: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

impl CleaningStats {
    fn record(&mut self, outcome: Option<RemovalReason>) {
        match outcome {
            None => self.kept += 1,
            Some(RemovalReason::Control) => self.removed_control += 1,
            Some(RemovalReason::TooShort) => self.removed_too_short += 1,
            Some(RemovalReason::TooLong) => self.removed_too_long += 1,
            Some(RemovalReason::Ratio) => self.removed_ratio += 1,
            Some(RemovalReason::Predicate) => self.removed_predicate += 1,
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.kept += other.kept;
        self.removed_too_short += other.removed_too_short;
        self.removed_too_long += other.removed_too_long;
        self.removed_ratio += other.removed_ratio;
        self.removed_control += other.removed_control;
        self.removed_predicate += other.removed_predicate;
        self
    }

    pub fn total(&self) -> usize {
        self.kept
            + self.removed_too_short
            + self.removed_too_long
            + self.removed_ratio
            + self.removed_control
            + self.removed_predicate
    }
}

/// Removes C0 control characters except tab.
pub fn strip_controls(text: &str) -> String {
    text.chars()
        .filter(|&c| c == '\t' || (c as u32) >= 0x20)
        .collect()
}

fn check_pair(source: &str, target: &str, cfg: &CleaningConfig) -> Option<RemovalReason> {
    let (s, t) = (token_count(source), token_count(target));
    if s < cfg.min_tokens || t < cfg.min_tokens {
        return Some(RemovalReason::TooShort);
    }
    if s > cfg.max_tokens || t > cfg.max_tokens {
        return Some(RemovalReason::TooLong);
    }
    let ratio = s.max(t) as f64 / s.min(t) as f64;
    if ratio > cfg.max_length_ratio {
        return Some(RemovalReason::Ratio);
    }
    None
}

/// Filters a parallel corpus by token-count and length-ratio rules.
pub fn clean_corpus(corpus: &ParallelCorpus, cfg: &CleaningConfig) -> Result<(ParallelCorpus, CleaningStats)> {
    clean_corpus_with(corpus, cfg, |_, _| true)
}

type Outcome = (Option<(String, String)>, Option<RemovalReason>);

/// Like [`clean_corpus`] with an extra keep-predicate over the cleaned pair,
/// e.g. a language-identification check. It runs after the built-in rules.
pub fn clean_corpus_with<F>(
    corpus: &ParallelCorpus,
    cfg: &CleaningConfig,
    keep: F,
) -> Result<(ParallelCorpus, CleaningStats)>
where
    F: Fn(&str, &str) -> bool + Sync,
{
    cfg.validate()?;
    let outcomes: Vec<Outcome> = corpus
        .pairs
        .par_iter()
        .map(|(source, target)| {
            let (s, t) = if cfg.strip_control_chars {
                (strip_controls(source), strip_controls(target))
            } else {
                (source.clone(), target.clone())
            };
            let emptied = |before: &str, after: &str| {
                token_count(after) == 0 && token_count(before) > 0
            };
            let reason = if emptied(source, &s) || emptied(target, &t) {
                Some(RemovalReason::Control)
            } else {
                check_pair(&s, &t, cfg)
            };
            let reason = reason.or_else(|| (!keep(&s, &t)).then_some(RemovalReason::Predicate));
            match reason {
                None => (Some((s, t)), None),
                r => (None, r),
            }
        })
        .collect();

    let stats = outcomes
        .par_iter()
        .fold(CleaningStats::default, |mut acc, (_, r)| {
            acc.record(*r);
            acc
        })
        .reduce(CleaningStats::default, CleaningStats::merge);
    let pairs = outcomes.into_iter().filter_map(|(p, _)| p).collect();
    Ok((ParallelCorpus { pairs }, stats))
}

/// Uniform sample of `n` pairs without replacement, in original order.
pub fn sample_pairs(corpus: &ParallelCorpus, n: usize, seed: u64) -> Result<ParallelCorpus> {
    let picked = sample_indices(corpus.len(), n, seed)?;
    Ok(ParallelCorpus {
        pairs: picked.into_iter().map(|i| corpus.pairs[i].clone()).collect(),
    })
}

/// Sorted sample of `n` distinct indices out of `len`.
pub fn sample_indices(len: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n > len {
        return Err(Error::SampleSize {
            requested: n,
            available: len,
        });
    }
    let mut rng = rng::stream(seed, 0);
    let mut picked = index::sample(&mut rng, len, n).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pc(pairs: &[(&str, &str)]) -> ParallelCorpus {
        ParallelCorpus::from_pairs(
            pairs
                .iter()
                .map(|(s, t)| (s.to_string(), t.to_string()))
                .collect(),
        )
    }

    #[test]
    fn load_single_pair() {
        let dir = tempfile::tempdir().unwrap();
        let (s, t) = (dir.path().join("s"), dir.path().join("t"));
        fs::write(&s, "a b c\n").unwrap();
        fs::write(&t, "x y\n\n").unwrap();
        let corpus = ParallelCorpus::load(&s, &t).unwrap();
        assert_eq!(corpus.pairs(), &[("a b c".to_string(), "x y".to_string())]);
    }

    #[test]
    fn load_mismatch_names_counts() {
        let dir = tempfile::tempdir().unwrap();
        let (s, t) = (dir.path().join("s"), dir.path().join("t"));
        fs::write(&s, "1\n2\n3\n").unwrap();
        fs::write(&t, "1\n2\n").unwrap();
        match ParallelCorpus::load(&s, &t) {
            Err(Error::Alignment {
                source_lines: 3,
                target_lines: 2,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        let (s, t) = (dir.path().join("s"), dir.path().join("t"));
        fs::write(&s, "").unwrap();
        fs::write(&t, "").unwrap();
        assert!(ParallelCorpus::load(&s, &t).unwrap().is_empty());
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad");
        fs::write(&p, b"abc\xffdef").unwrap();
        match MonoCorpus::load(&p) {
            Err(Error::Decode { offset: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn crlf_is_normalized() {
        assert_eq!(split_lines("a\r\nb\r\n\r\n"), vec!["a", "b"]);
    }

    #[test]
    fn too_short_pair_removed() {
        let (out, stats) = clean_corpus(&pc(&[("a b c", "x y z")]), &CleaningConfig::default()).unwrap();
        assert!(out.is_empty());
        assert_eq!(stats.removed_too_short, 1);
    }

    #[test]
    fn too_long_pair_removed() {
        let long = vec!["w"; 200].join(" ");
        let cfg = CleaningConfig {
            max_tokens: 150,
            ..Default::default()
        };
        let (out, stats) = clean_corpus(&pc(&[(&long, &long)]), &cfg).unwrap();
        assert!(out.is_empty());
        assert_eq!(stats.removed_too_long, 1);
    }

    #[test]
    fn in_bounds_pair_kept() {
        let corpus = pc(&[("a b c d e", "v w x y z")]);
        let (out, stats) = clean_corpus(&corpus, &CleaningConfig::default()).unwrap();
        assert_eq!(out, corpus);
        assert_eq!(stats.kept, 1);
    }

    #[test]
    fn ratio_rule() {
        let cfg = CleaningConfig {
            min_tokens: 1,
            max_tokens: 100,
            max_length_ratio: 2.0,
            strip_control_chars: true,
        };
        let (out, stats) = clean_corpus(&pc(&[("a", "a b c"), ("a b", "a b c d")]), &cfg).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(stats.removed_ratio, 1);
    }

    #[test]
    fn control_characters() {
        assert_eq!(strip_controls("a\u{1}b\tc\u{7}"), "ab\tc");
        let cfg = CleaningConfig {
            min_tokens: 1,
            ..Default::default()
        };
        let (out, stats) = clean_corpus(&pc(&[("\u{2}\u{3}", "x"), ("a\u{1}b", "c")]), &cfg).unwrap();
        assert_eq!(stats.removed_control, 1);
        assert_eq!(out.pairs(), &[("ab".to_string(), "c".to_string())]);
    }

    #[test]
    fn predicate_hook() {
        let cfg = CleaningConfig {
            min_tokens: 1,
            ..Default::default()
        };
        let (out, stats) =
            clean_corpus_with(&pc(&[("a", "b"), ("c", "d")]), &cfg, |s, _| s != "c").unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(stats.removed_predicate, 1);
    }

    #[test]
    fn invalid_config() {
        let bad = CleaningConfig {
            min_tokens: 5,
            max_tokens: 5,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = CleaningConfig {
            max_length_ratio: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn stats_json_shape() {
        let json = serde_json::to_value(CleaningStats::default()).unwrap();
        let keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        assert_eq!(
            keys,
            ["kept", "removed_control", "removed_ratio", "removed_too_long", "removed_too_short"]
        );
    }

    #[test]
    fn sample_edges() {
        let corpus = pc(&[("a", "1"), ("b", "2"), ("c", "3")]);
        assert_eq!(sample_pairs(&corpus, 3, 7).unwrap(), corpus);
        assert!(sample_pairs(&corpus, 0, 7).unwrap().is_empty());
        assert_eq!(sample_pairs(&corpus, 2, 7).unwrap(), sample_pairs(&corpus, 2, 7).unwrap());
        assert!(matches!(
            sample_pairs(&corpus, 4, 7),
            Err(Error::SampleSize { requested: 4, available: 3 })
        ));
    }
}
