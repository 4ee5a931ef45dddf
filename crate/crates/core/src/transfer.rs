//! Child-ready vocabularies built from a parent vocabulary.
//!
//! Cold start keeps the parent's slot count and rewrites the slots the
//! child does not need ([`transform_vocabulary`]). Warm start trains a joint
//! vocabulary before the parent model exists, either by concatenating two
//! separately trained vocabularies ([`build_merged_vocabulary`]) or by
//! training once on an equal-sized sample of both corpora
//! ([`build_balanced_vocabulary`]).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{sample_pairs, MonoCorpus, ParallelCorpus};
use crate::error::{Error, Result};
use crate::rng;
use crate::subword::{GreedyTrainer, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingKind {
    Shared,
    Replaced,
    RetainedParentOnly,
}

/// How slot `index` of the parent vocabulary was filled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub index: usize,
    pub original: String,
    pub assigned: String,
    pub kind: MappingKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VocabMapping {
    pub entries: Vec<MappingEntry>,
}

impl VocabMapping {
    pub fn count(&self, kind: MappingKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    /// One JSON object per line: `{index, original, assigned, kind}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n").map_err(|e| Error::io("<mapping output>", e))?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    FrequencyBased,
    EverythingRandom,
    UnmatchedRandom,
    LevenshteinNearest,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::FrequencyBased,
        StrategyKind::EverythingRandom,
        StrategyKind::UnmatchedRandom,
        StrategyKind::LevenshteinNearest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::FrequencyBased => "frequency",
            StrategyKind::EverythingRandom => "everything-random",
            StrategyKind::UnmatchedRandom => "unmatched-random",
            StrategyKind::LevenshteinNearest => "levenshtein",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown transform strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransformStrategy {
    pub kind: StrategyKind,
    /// Used by the random variants only.
    pub seed: u64,
}

impl TransformStrategy {
    pub fn new(kind: StrategyKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

/// Trains the child vocabulary (at most `|parent|` entries) from the child
/// corpora and transforms the parent vocabulary with it.
pub fn transform_vocabulary(
    parent: &Vocabulary,
    child_corpora: &[&MonoCorpus],
    strategy: TransformStrategy,
) -> Result<(Vocabulary, VocabMapping)> {
    if parent.is_empty() {
        return Err(Error::Empty("parent vocabulary"));
    }
    let joint = MonoCorpus::concat(child_corpora.iter().copied());
    let child = GreedyTrainer::new(parent.len()).train_capped(&joint)?;
    transform_with_child(parent, &child, strategy)
}

/// Transforms `parent` given an already built child vocabulary whose order
/// is its frequency order.
pub fn transform_with_child(
    parent: &Vocabulary,
    child: &Vocabulary,
    strategy: TransformStrategy,
) -> Result<(Vocabulary, VocabMapping)> {
    if parent.is_empty() {
        return Err(Error::Empty("parent vocabulary"));
    }
    if child.len() > parent.len() {
        return Err(Error::Vocabulary(format!(
            "child vocabulary has {} entries, more than the parent's {}",
            child.len(),
            parent.len()
        )));
    }
    let assigned = match strategy.kind {
        StrategyKind::EverythingRandom => everything_random(parent, child, strategy.seed),
        kind => {
            let mut slots: Vec<Option<String>> = parent
                .tokens()
                .iter()
                .map(|t| child.contains(t).then(|| t.clone()))
                .collect();
            let free: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].is_none()).collect();
            let unmatched: Vec<&String> = child.tokens().iter().filter(|t| !parent.contains(t)).collect();
            match kind {
                StrategyKind::FrequencyBased => {
                    for (&slot, tok) in free.iter().zip(&unmatched) {
                        slots[slot] = Some((*tok).clone());
                    }
                }
                StrategyKind::UnmatchedRandom => {
                    let mut shuffled = unmatched.clone();
                    shuffled.shuffle(&mut rng::stream(strategy.seed, 0));
                    for (&slot, tok) in free.iter().zip(&shuffled) {
                        slots[slot] = Some((*tok).clone());
                    }
                }
                StrategyKind::LevenshteinNearest => {
                    let free_tokens: Vec<(usize, &str)> =
                        free.iter().map(|&i| (i, parent.tokens()[i].as_str())).collect();
                    let child_tokens: Vec<&str> = unmatched.iter().map(|s| s.as_str()).collect();
                    for (child_pos, slot) in levenshtein_assign(&free_tokens, &child_tokens) {
                        slots[slot] = Some(child_tokens[child_pos].to_string());
                    }
                }
                StrategyKind::EverythingRandom => unreachable!(),
            }
            slots
                .into_iter()
                .zip(parent.tokens())
                .map(|(s, p)| s.unwrap_or_else(|| p.clone()))
                .collect()
        }
    };
    build_mapping(parent, child, assigned)
}

fn everything_random(parent: &Vocabulary, child: &Vocabulary, seed: u64) -> Vec<String> {
    let mut order: Vec<usize> = (0..parent.len()).collect();
    order.shuffle(&mut rng::stream(seed, 0));
    let mut slots: Vec<Option<String>> = vec![None; parent.len()];
    for (tok, &slot) in child.tokens().iter().zip(&order) {
        slots[slot] = Some(tok.clone());
    }
    // Leftover slots hold parent-only tokens so nothing is duplicated.
    let (keep, mut spare): (Vec<usize>, Vec<usize>) = (0..parent.len())
        .filter(|&i| !child.contains(&parent.tokens()[i]))
        .partition(|&i| slots[i].is_none());
    let keep: HashSet<usize> = keep.into_iter().collect();
    spare.reverse();
    for (i, slot) in slots.iter_mut().enumerate() {
        if slot.is_some() {
            continue;
        }
        let from = if keep.contains(&i) {
            i
        } else {
            spare.pop().expect("enough parent-only tokens for every free slot")
        };
        *slot = Some(parent.tokens()[from].clone());
    }
    slots.into_iter().map(|s| s.expect("every slot filled")).collect()
}

fn build_mapping(parent: &Vocabulary, child: &Vocabulary, assigned: Vec<String>) -> Result<(Vocabulary, VocabMapping)> {
    let entries = parent
        .tokens()
        .iter()
        .zip(&assigned)
        .enumerate()
        .map(|(index, (original, assigned))| {
            let kind = if assigned == original && child.contains(original) {
                MappingKind::Shared
            } else if child.contains(assigned) {
                MappingKind::Replaced
            } else {
                MappingKind::RetainedParentOnly
            };
            MappingEntry {
                index,
                original: original.clone(),
                assigned: assigned.clone(),
                kind,
            }
        })
        .collect();
    let vocab = Vocabulary::new(assigned, parent.convention())?;
    Ok((vocab, VocabMapping { entries }))
}

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Pairs unmatched child tokens with free parent slots by increasing edit
/// distance. Returns `(child position, parent slot)` pairs.
///
/// Ties resolve by distance, then child-list position, then parent index.
/// Leftover slots (or child tokens) stay unassigned.
pub fn levenshtein_assign(free_slots: &[(usize, &str)], child: &[&str]) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(usize, usize, usize)> = Vec::with_capacity(free_slots.len() * child.len());
    for (c, tok) in child.iter().enumerate() {
        for &(slot, parent_tok) in free_slots {
            candidates.push((levenshtein(tok, parent_tok), c, slot));
        }
    }
    candidates.sort_unstable();
    let mut child_done = vec![false; child.len()];
    let mut slot_done: HashSet<usize> = HashSet::new();
    let mut out = Vec::new();
    for (_, c, slot) in candidates {
        if child_done[c] || slot_done.contains(&slot) {
            continue;
        }
        child_done[c] = true;
        slot_done.insert(slot);
        out.push((c, slot));
        if out.len() == child.len().min(free_slots.len()) {
            break;
        }
    }
    out
}

/// Result of the merged-vocabulary size search.
#[derive(Debug, Clone)]
pub struct MergedVocabulary {
    pub vocab: Vocabulary,
    /// Requested size of each component vocabulary.
    pub component_size: usize,
}

/// Concatenates two vocabularies, keeping the first copy of duplicates.
pub fn concat_dedup(first: &Vocabulary, second: &Vocabulary) -> Result<Vocabulary> {
    let mut seen = HashSet::with_capacity(first.len() + second.len());
    let tokens = first
        .tokens()
        .iter()
        .chain(second.tokens())
        .filter(|t| seen.insert(t.as_str()))
        .cloned()
        .collect();
    Vocabulary::new(tokens, first.convention())
}

/// Trains parent and child vocabularies of one shared component size,
/// concatenates them parent-first without duplicates, and bisects the
/// component size until the result lands in `target_size·(1±tolerance)`.
pub fn build_merged_vocabulary(
    parent: &MonoCorpus,
    child: &MonoCorpus,
    target_size: usize,
    tolerance: f64,
) -> Result<MergedVocabulary> {
    if parent.is_empty() || child.is_empty() {
        return Err(Error::Empty("merged vocabulary corpora"));
    }
    let band = GreedyTrainer::new(target_size).tolerance(tolerance).band();
    let mut cache: HashMap<usize, Vocabulary> = HashMap::new();
    let mut merged_at = |size: usize| -> Result<Vocabulary> {
        if let Some(v) = cache.get(&size) {
            return Ok(v.clone());
        }
        let p = GreedyTrainer::new(size).train_capped(parent)?;
        let c = GreedyTrainer::new(size).train_capped(child)?;
        let v = concat_dedup(&p, &c)?;
        cache.insert(size, v.clone());
        Ok(v)
    };

    let (mut lo, mut hi) = (1usize, target_size.max(1));
    let mut best: Option<(usize, Vocabulary)> = None;
    let distance = |n: usize| {
        if n < band.0 {
            band.0 - n
        } else {
            n.saturating_sub(band.1)
        }
    };
    while lo <= hi {
        let mid = lo + (hi - lo) / 2;
        let v = merged_at(mid)?;
        let n = v.len();
        if best.as_ref().is_none_or(|(_, b)| distance(n) < distance(b.len())) {
            best = Some((mid, v.clone()));
        }
        if n < band.0 {
            lo = mid + 1;
        } else if n > band.1 {
            if mid == 0 {
                break;
            }
            hi = mid - 1;
        } else {
            return Ok(MergedVocabulary {
                vocab: v,
                component_size: mid,
            });
        }
    }
    let achieved = best.map_or(0, |(_, v)| v.len());
    Err(Error::Tolerance {
        achieved,
        low: band.0,
        high: band.1,
    })
}

/// The four monolingual sides used to train a balanced vocabulary.
pub fn balanced_training_corpus(parent: &ParallelCorpus, child: &ParallelCorpus, seed: u64) -> Result<MonoCorpus> {
    if parent.is_empty() || child.is_empty() {
        return Err(Error::Empty("balanced vocabulary corpora"));
    }
    let n = parent.len().min(child.len());
    // Same seed for both sides: swapping the arguments yields the same lines.
    let p = sample_pairs(parent, n, seed)?;
    let c = sample_pairs(child, n, seed)?;
    Ok(MonoCorpus::concat([&p.source(), &p.target(), &c.source(), &c.target()]))
}

/// Joint vocabulary trained on `min(|parent|, |child|)` sampled pairs from
/// each corpus, so each of the four languages supplies a quarter of the
/// lines. The mixed corpus is discarded afterwards.
pub fn build_balanced_vocabulary(
    parent: &ParallelCorpus,
    child: &ParallelCorpus,
    target_size: usize,
    seed: u64,
) -> Result<Vocabulary> {
    let mixed = balanced_training_corpus(parent, child, seed)?;
    GreedyTrainer::new(target_size).train(&mixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subword::BoundaryConvention;

    fn v(tokens: &[&str]) -> Vocabulary {
        Vocabulary::from_strs(tokens, BoundaryConvention::WordEnd).unwrap()
    }

    fn freq() -> TransformStrategy {
        TransformStrategy::new(StrategyKind::FrequencyBased, 0)
    }

    #[test]
    fn identity_when_child_equals_parent() {
        let p = v(&["a", "b", "c"]);
        for kind in [StrategyKind::FrequencyBased, StrategyKind::UnmatchedRandom, StrategyKind::LevenshteinNearest] {
            let (out, map) = transform_with_child(&p, &p, TransformStrategy::new(kind, 3)).unwrap();
            assert_eq!(out, p);
            assert!(map.entries.iter().all(|e| e.kind == MappingKind::Shared));
        }
    }

    #[test]
    fn frequency_based_trace() {
        let (out, map) = transform_with_child(&v(&["a", "b", "c", "d"]), &v(&["a", "x", "c", "y"]), freq()).unwrap();
        assert_eq!(out.tokens(), ["a", "x", "c", "y"]);
        let kinds: Vec<_> = map.entries.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            [MappingKind::Shared, MappingKind::Replaced, MappingKind::Shared, MappingKind::Replaced]
        );
    }

    #[test]
    fn smaller_child_retains_parent_slots() {
        let (out, map) = transform_with_child(&v(&["a", "b", "c", "d"]), &v(&["x", "a"]), freq()).unwrap();
        assert_eq!(out.tokens(), ["a", "x", "c", "d"]);
        assert_eq!(map.count(MappingKind::RetainedParentOnly), 2);
    }

    #[test]
    fn oversized_child_rejected() {
        assert!(transform_with_child(&v(&["a"]), &v(&["a", "b"]), freq()).is_err());
    }

    #[test]
    fn everything_random_places_each_child_token_once() {
        let p = v(&["a", "b", "c", "d", "e"]);
        let c = v(&["c", "x", "a"]);
        let (out, _) = transform_with_child(&p, &c, TransformStrategy::new(StrategyKind::EverythingRandom, 9)).unwrap();
        assert_eq!(out.len(), 5);
        for t in c.tokens() {
            assert_eq!(out.tokens().iter().filter(|o| *o == t).count(), 1);
        }
    }

    #[test]
    fn edit_distances() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("čaj", "caj"), 1);
    }

    #[test]
    fn levenshtein_single_edit_and_ties() {
        assert_eq!(levenshtein_assign(&[(0, "cat"), (1, "dog")], &["dot"]), [(0, 1)]);
        // Both child tokens are one edit from "ab"; the earlier one wins it.
        let pairs = levenshtein_assign(&[(5, "ab")], &["ax", "ay"]);
        assert_eq!(pairs, [(0, 5)]);
    }

    #[test]
    fn levenshtein_strategy_through_transform() {
        let p = v(&["the", "cat", "dog", "sat"]);
        let c = v(&["the", "sit", "dot"]);
        let (out, map) =
            transform_with_child(&p, &c, TransformStrategy::new(StrategyKind::LevenshteinNearest, 0)).unwrap();
        // "sit" is one edit from "sat", "dot" one from "dog".
        assert_eq!(out.tokens(), ["the", "cat", "dot", "sit"]);
        assert_eq!(map.entries[1].kind, MappingKind::RetainedParentOnly);
    }

    #[test]
    fn mapping_jsonl() {
        let (_, map) = transform_with_child(&v(&["a", "b"]), &v(&["a", "z"]), freq()).unwrap();
        assert_eq!(
            map.to_jsonl(),
            "{\"index\":0,\"original\":\"a\",\"assigned\":\"a\",\"kind\":\"shared\"}\n\
             {\"index\":1,\"original\":\"b\",\"assigned\":\"z\",\"kind\":\"replaced\"}\n"
        );
    }

    #[test]
    fn strategy_names_parse() {
        for k in StrategyKind::ALL {
            assert_eq!(k.name().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("nearest".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn dedup_keeps_parent_copy() {
        let m = concat_dedup(&v(&["a", "b"]), &v(&["c", "a"])).unwrap();
        assert_eq!(m.tokens(), ["a", "b", "c"]);
    }
}
