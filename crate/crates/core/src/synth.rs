//! Controlled corpus corruptions.
//!
//! [`apply_relatedness`] builds an artificially related language by
//! rewriting the letters of a chosen share of word types through a fixed
//! substitution key; [`corrupt_word_order`] breaks word order or sentence
//! alignment.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{split_lines, ParallelCorpus};
use crate::error::{Error, Result};
use crate::rng;

/// Letter permutation over a lowercase alphabet, applied case-preservingly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionKey {
    forward: BTreeMap<char, char>,
    pub seed: u64,
}

fn single(mut it: impl Iterator<Item = char>) -> Option<char> {
    let c = it.next()?;
    it.next().is_none().then_some(c)
}

/// Lowercase letters whose case mapping is one character each way, so
/// substitution can keep capitalization and stay invertible.
pub fn is_keyable(c: char) -> bool {
    c.is_lowercase()
        && c.is_alphabetic()
        && single(c.to_uppercase()).is_some_and(|u| u != c && single(u.to_lowercase()) == Some(c))
}

/// Keyable letters used anywhere in the texts, folded to lowercase.
pub fn corpus_alphabet<'a>(texts: impl IntoIterator<Item = &'a str>) -> BTreeSet<char> {
    texts
        .into_iter()
        .flat_map(str::chars)
        .filter_map(|c| if c.is_uppercase() { single(c.to_lowercase()) } else { Some(c) })
        .filter(|&c| is_keyable(c))
        .collect()
}

impl SubstitutionKey {
    /// Seeded key over `alphabet`. With two or more letters the permutation
    /// is a derangement, drawn uniformly by rejection, so every substituted
    /// word differs from its source.
    pub fn generate(alphabet: &BTreeSet<char>, seed: u64) -> Result<Self> {
        let letters: Vec<char> = alphabet.iter().copied().filter(|&c| is_keyable(c)).collect();
        if letters.is_empty() {
            return Err(Error::Empty("substitution alphabet"));
        }
        let mut rng = rng::stream(seed, 0);
        let mut image = letters.clone();
        if letters.len() > 1 {
            loop {
                image.shuffle(&mut rng);
                if image.iter().zip(&letters).all(|(a, b)| a != b) {
                    break;
                }
            }
        }
        Ok(Self {
            forward: letters.into_iter().zip(image).collect(),
            seed,
        })
    }

    pub fn identity(alphabet: &BTreeSet<char>) -> Self {
        Self {
            forward: alphabet.iter().filter(|&&c| is_keyable(c)).map(|&c| (c, c)).collect(),
            seed: 0,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (char, char)>) -> Result<Self> {
        let forward: BTreeMap<char, char> = pairs.into_iter().collect();
        let image: BTreeSet<char> = forward.values().copied().collect();
        let domain: BTreeSet<char> = forward.keys().copied().collect();
        if image != domain {
            return Err(Error::Config("substitution key is not a permutation of its alphabet".into()));
        }
        if let Some(bad) = domain.iter().find(|&&c| !is_keyable(c)) {
            return Err(Error::Config(format!("{bad:?} is not a lowercase letter with simple case mapping")));
        }
        Ok(Self { forward, seed: 0 })
    }

    pub fn inverse(&self) -> Self {
        Self {
            forward: self.forward.iter().map(|(&a, &b)| (b, a)).collect(),
            seed: self.seed,
        }
    }

    pub fn alphabet(&self) -> impl Iterator<Item = char> + '_ {
        self.forward.keys().copied()
    }

    /// Whether the key rewrites this character (in either case).
    pub fn covers(&self, c: char) -> bool {
        self.forward.contains_key(&c) || (c.is_uppercase() && single(c.to_lowercase()).is_some_and(|l| self.forward.contains_key(&l)))
    }

    pub fn map_char(&self, c: char) -> char {
        if let Some(&m) = self.forward.get(&c) {
            return m;
        }
        if c.is_uppercase() {
            if let Some(m) = single(c.to_lowercase()).and_then(|l| self.forward.get(&l)) {
                return single(m.to_uppercase()).unwrap_or(*m);
            }
        }
        c
    }

    pub fn map_word(&self, word: &str) -> String {
        word.chars().map(|c| self.map_char(c)).collect()
    }

    /// Two columns per line: `from to`, one line per lowercase letter.
    pub fn to_text(&self) -> String {
        self.forward.iter().map(|(a, b)| format!("{a} {b}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in split_lines(text).iter().enumerate() {
            let cols: Vec<&str> = line.split_whitespace().collect();
            let pair = match cols.as_slice() {
                [a, b] => single(a.chars()).zip(single(b.chars())),
                _ => None,
            };
            let (a, b) = pair.ok_or_else(|| Error::Parse {
                line: i + 1,
                reason: format!("expected `from to`, got {line:?}"),
            })?;
            pairs.push((a, b));
        }
        Self::from_pairs(pairs)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelatednessConfig {
    /// Share of word types left unchanged.
    pub keep_ratio: f64,
    pub seed: u64,
}

impl RelatednessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.keep_ratio) {
            return Err(Error::Config(format!("keep_ratio must be in [0, 1], got {}", self.keep_ratio)));
        }
        Ok(())
    }
}

/// Word-type bookkeeping for one corpus side.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SideReport {
    /// Types containing at least one letter the key rewrites.
    pub eligible_types: usize,
    pub kept_types: BTreeSet<String>,
    /// Substituted types whose image equals a kept type; restoring those
    /// occurrences is ambiguous.
    pub ambiguous_types: usize,
}

impl SideReport {
    pub fn kept_fraction(&self) -> f64 {
        if self.eligible_types == 0 {
            return 1.0;
        }
        self.kept_types.len() as f64 / self.eligible_types as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelatednessOutput {
    pub corpus: ParallelCorpus,
    pub source: SideReport,
    pub target: SideReport,
}

/// Rewrites whitespace tokens while keeping the original spacing.
fn map_tokens(line: &str, mut f: impl FnMut(&str) -> Option<String>) -> String {
    let mut out = String::with_capacity(line.len());
    let mut rest = line;
    while !rest.is_empty() {
        let ws = rest.len() - rest.trim_start().len();
        out.push_str(&rest[..ws]);
        rest = &rest[ws..];
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        if end > 0 {
            let tok = &rest[..end];
            match f(tok) {
                Some(m) => out.push_str(&m),
                None => out.push_str(tok),
            }
        }
        rest = &rest[end..];
    }
    out
}

fn relate_side(lines: &[&str], key: &SubstitutionKey, keep_ratio: f64, seed: u64, side: u64) -> (Vec<String>, SideReport) {
    let types: BTreeSet<&str> = lines
        .iter()
        .flat_map(|l| l.split_whitespace())
        .filter(|t| t.chars().any(|c| key.covers(c)))
        .collect();
    let mut order: Vec<&str> = types.iter().copied().collect();
    order.shuffle(&mut rng::stream(seed, side));
    let keep = ((keep_ratio * order.len() as f64).round() as usize).min(order.len());
    let kept: BTreeSet<&str> = order[..keep].iter().copied().collect();

    let mapped: HashMap<&str, String> = order[keep..].iter().map(|&t| (t, key.map_word(t))).collect();
    let ambiguous = mapped.values().filter(|m| kept.contains(m.as_str())).count();
    let out = lines
        .par_iter()
        .map(|l| map_tokens(l, |t| mapped.get(t).cloned()))
        .collect();
    let report = SideReport {
        eligible_types: types.len(),
        kept_types: kept.into_iter().map(str::to_string).collect(),
        ambiguous_types: ambiguous,
    };
    (out, report)
}

/// Substitutes letters in all but `keep_ratio` of the word types on each
/// side. Every occurrence of a type gets the same replacement; characters
/// the key does not cover, spacing, and capitalization are left as is.
pub fn apply_relatedness(
    corpus: &ParallelCorpus,
    key: &SubstitutionKey,
    cfg: &RelatednessConfig,
) -> Result<RelatednessOutput> {
    cfg.validate()?;
    let src: Vec<&str> = corpus.pairs().iter().map(|(s, _)| s.as_str()).collect();
    let tgt: Vec<&str> = corpus.pairs().iter().map(|(_, t)| t.as_str()).collect();
    let (src_out, source) = relate_side(&src, key, cfg.keep_ratio, cfg.seed, 0);
    let (tgt_out, target) = relate_side(&tgt, key, cfg.keep_ratio, cfg.seed, 1);
    Ok(RelatednessOutput {
        corpus: ParallelCorpus::from_sides(src_out, tgt_out)?,
        source,
        target,
    })
}

/// Undoes [`apply_relatedness`] given the key and the kept-type sets.
pub fn restore_relatedness(
    corpus: &ParallelCorpus,
    key: &SubstitutionKey,
    kept_source: &BTreeSet<String>,
    kept_target: &BTreeSet<String>,
) -> Result<ParallelCorpus> {
    let inverse = key.inverse();
    let restore = |line: &str, kept: &BTreeSet<String>| {
        map_tokens(line, |t| {
            if kept.contains(t) || !t.chars().any(|c| inverse.covers(c)) {
                None
            } else {
                Some(inverse.map_word(t))
            }
        })
    };
    let pairs = corpus
        .pairs()
        .par_iter()
        .map(|(s, t)| (restore(s, kept_source), restore(t, kept_target)))
        .collect();
    Ok(ParallelCorpus::from_pairs(pairs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionMode {
    ShuffleSource,
    ShuffleTarget,
    ShuffleBoth,
    SortTarget,
    ShuffleSentencePairs,
}

impl CorruptionMode {
    pub const ALL: [CorruptionMode; 5] = [
        CorruptionMode::ShuffleSource,
        CorruptionMode::ShuffleTarget,
        CorruptionMode::ShuffleBoth,
        CorruptionMode::SortTarget,
        CorruptionMode::ShuffleSentencePairs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorruptionMode::ShuffleSource => "shuffle-source",
            CorruptionMode::ShuffleTarget => "shuffle-target",
            CorruptionMode::ShuffleBoth => "shuffle-both",
            CorruptionMode::SortTarget => "sort-target",
            CorruptionMode::ShuffleSentencePairs => "shuffle-sentence-pairs",
        }
    }
}

impl fmt::Display for CorruptionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorruptionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorruptionMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown corruption mode `{s}`")))
    }
}

fn shuffle_words(line: &str, seed: u64, stream: u64) -> String {
    let mut words: Vec<&str> = line.split_whitespace().collect();
    words.shuffle(&mut rng::stream(seed, stream));
    words.join(" ")
}

fn sort_words(line: &str) -> String {
    let mut words: Vec<&str> = line.split_whitespace().collect();
    words.sort_unstable();
    words.join(" ")
}

/// Damages word order (per sentence, whitespace tokens re-joined by single
/// spaces) or sentence alignment (target lines permuted).
pub fn corrupt_word_order(corpus: &ParallelCorpus, mode: CorruptionMode, seed: u64) -> ParallelCorpus {
    let pairs = corpus.pairs();
    let n = pairs.len() as u64;
    let out: Vec<(String, String)> = match mode {
        CorruptionMode::ShuffleSentencePairs => {
            let mut targets: Vec<&String> = pairs.iter().map(|(_, t)| t).collect();
            targets.shuffle(&mut rng::stream(seed, 0));
            pairs.iter().zip(targets).map(|((s, _), t)| (s.clone(), t.clone())).collect()
        }
        _ => pairs
            .par_iter()
            .enumerate()
            .map(|(i, (s, t))| {
                let i = i as u64;
                match mode {
                    CorruptionMode::ShuffleSource => (shuffle_words(s, seed, i), t.clone()),
                    CorruptionMode::ShuffleTarget => (s.clone(), shuffle_words(t, seed, i)),
                    CorruptionMode::ShuffleBoth => (shuffle_words(s, seed, i), shuffle_words(t, seed, n + i)),
                    CorruptionMode::SortTarget => (s.clone(), sort_words(t)),
                    CorruptionMode::ShuffleSentencePairs => unreachable!(),
                }
            })
            .collect(),
    };
    ParallelCorpus::from_pairs(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> BTreeSet<char> {
        ('a'..='z').collect()
    }

    fn pc(pairs: &[(&str, &str)]) -> ParallelCorpus {
        ParallelCorpus::from_pairs(pairs.iter().map(|(s, t)| (s.to_string(), t.to_string())).collect())
    }

    #[test]
    fn key_is_deterministic_derangement() {
        let a = SubstitutionKey::generate(&abc(), 5).unwrap();
        assert_eq!(a, SubstitutionKey::generate(&abc(), 5).unwrap());
        assert!(a.alphabet().all(|c| a.map_char(c) != c));
        let inv = a.inverse();
        for c in 'a'..='z' {
            assert_eq!(inv.map_char(a.map_char(c)), c);
        }
    }

    #[test]
    fn identity_key() {
        let k = SubstitutionKey::identity(&abc());
        assert_eq!(k.map_word("Hello, World!"), "Hello, World!");
    }

    #[test]
    fn case_and_punctuation_survive() {
        let k = SubstitutionKey::generate(&abc(), 1).unwrap();
        let out = k.map_word("Pardon?");
        assert_eq!(out.chars().count(), 7);
        assert!(out.starts_with(char::is_uppercase));
        assert!(out[1..].chars().take(5).all(char::is_lowercase));
        assert!(out.ends_with('?'));
        assert!(out.chars().zip("Pardon".chars()).all(|(a, b)| a != b));
    }

    #[test]
    fn keep_all_is_identity() {
        let corpus = pc(&[("Pardon? Have you", "seen this cat?")]);
        let k = SubstitutionKey::generate(&abc(), 1).unwrap();
        let out = apply_relatedness(&corpus, &k, &RelatednessConfig { keep_ratio: 1.0, seed: 3 }).unwrap();
        assert_eq!(out.corpus, corpus);
    }

    #[test]
    fn type_consistent_replacement() {
        let corpus = pc(&[("cat cat x", "y"), ("cat", "z"), ("the cat", "w")]);
        let k = SubstitutionKey::generate(&abc(), 1).unwrap();
        let out = apply_relatedness(&corpus, &k, &RelatednessConfig { keep_ratio: 0.0, seed: 3 }).unwrap();
        let cat = k.map_word("cat");
        let n: usize = out.corpus.pairs().iter().map(|(s, _)| s.split(' ').filter(|w| *w == cat).count()).sum();
        assert_eq!(n, 4);
    }

    #[test]
    fn key_file_round_trip() {
        let k = SubstitutionKey::generate(&abc(), 2).unwrap();
        assert_eq!(SubstitutionKey::parse(&k.to_text()).unwrap().forward, k.forward);
        assert!(SubstitutionKey::parse("a b\nb b\n").is_err());
    }

    #[test]
    fn alphabet_skips_unsafe_letters() {
        assert!(!is_keyable('ß'));
        assert!(!is_keyable('ı'));
        assert!(is_keyable('č'));
        assert_eq!(corpus_alphabet(["Ab1 č"]), ['a', 'b', 'č'].into_iter().collect());
    }

    #[test]
    fn sort_target() {
        let out = corrupt_word_order(&pc(&[("x", "my cat likes")]), CorruptionMode::SortTarget, 0);
        assert_eq!(out.pairs()[0].1, "cat likes my");
    }

    #[test]
    fn shuffle_keeps_multiset() {
        let corpus = pc(&[("a b c d e f", "1 2 3")]);
        let out = corrupt_word_order(&corpus, CorruptionMode::ShuffleSource, 11);
        let mut got: Vec<&str> = out.pairs()[0].0.split(' ').collect();
        got.sort();
        assert_eq!(got, ["a", "b", "c", "d", "e", "f"]);
        assert_eq!(out.pairs()[0].1, "1 2 3");
    }

    #[test]
    fn sentence_pair_shuffle_swaps_targets() {
        let corpus = pc(&[("s1", "t1"), ("s2", "t2")]);
        let seed = (0..100)
            .find(|&s| corrupt_word_order(&corpus, CorruptionMode::ShuffleSentencePairs, s).pairs()[0].1 == "t2")
            .expect("some seed swaps two items");
        let out = corrupt_word_order(&corpus, CorruptionMode::ShuffleSentencePairs, seed);
        assert_eq!(out, pc(&[("s1", "t2"), ("s2", "t1")]));
    }

    #[test]
    fn mode_names() {
        for m in CorruptionMode::ALL {
            assert_eq!(m.name().parse::<CorruptionMode>().unwrap(), m);
        }
    }
}
