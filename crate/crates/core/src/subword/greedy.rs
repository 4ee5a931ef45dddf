//! Greedy longest-match vocabularies.
//!
//! Training starts from the character inventory and repeatedly adds the
//! batch of adjacent-unit pairs whose merge most increases the unigram
//! log-likelihood of the training words. Application ignores merge order
//! and takes the longest vocabulary prefix at each position.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use super::bpe::word_counts;
use super::escape::escape_word;
use super::{mark_pieces, BoundaryConvention, Segmentation, Segmenter, Vocabulary};
use crate::corpus::MonoCorpus;
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 0.01;
pub const DEFAULT_BATCH: usize = 100;

const CONVENTION: BoundaryConvention = BoundaryConvention::WordEnd;

impl Segmenter for Vocabulary {
    fn vocabulary(&self) -> &Vocabulary {
        self
    }

    fn segment_word(&self, word: &str, out: &mut Vec<String>) {
        let convention = self.convention();
        let escaped = escape_word(word, convention.reserved(), |c| self.has_char(c));
        mark_pieces(longest_match(self, &escaped), convention, out);
    }
}

/// Greedy longest-prefix segmentation of one line.
pub fn segment_greedy(vocab: &Vocabulary, line: &str) -> Segmentation {
    vocab.segment(line)
}

/// Splits an escaped word into unmarked pieces. A character with no
/// matching entry becomes a piece of its own.
fn longest_match(vocab: &Vocabulary, word: &str) -> Vec<String> {
    let bounds: Vec<usize> = word
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(word.len()))
        .collect();
    let n = bounds.len() - 1;
    let word_end = vocab.convention() == BoundaryConvention::WordEnd;
    let max = vocab.max_token_chars().max(1);
    let mut pieces = Vec::new();
    let mut i = 0;
    while i < n {
        let mut end = i + 1;
        for j in (i + 1..=n.min(i + max)).rev() {
            let piece = &word[bounds[i]..bounds[j]];
            let found = vocab.contains(piece) || (word_end && j == n && vocab.final_piece(piece).is_some());
            if found {
                end = j;
                break;
            }
        }
        pieces.push(word[bounds[i]..bounds[end]].to_string());
        i = end;
    }
    pieces
}

/// Trains a word-end vocabulary of `target_size` entries (within
/// `tolerance`), adding up to [`DEFAULT_BATCH`] units per step.
pub fn train_greedy_vocab(corpus: &MonoCorpus, target_size: usize, tolerance: f64) -> Result<Vocabulary> {
    GreedyTrainer::new(target_size).tolerance(tolerance).train(corpus)
}

#[derive(Debug, Clone)]
pub struct GreedyTrainer {
    target_size: usize,
    tolerance: f64,
    batch: usize,
}

/// A unit in the trainer's working segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct PairKey {
    left: u32,
    right: u32,
    /// The right unit closes the word, so the merged unit carries the marker.
    closing: bool,
}

struct Units {
    strings: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Units {
    fn intern(&mut self, s: String) -> u32 {
        let id = self.strings.len() as u32;
        self.ids.insert(s.clone(), id);
        self.strings.push(s);
        id
    }

    /// Entry created by merging the pair.
    fn joined(&self, key: PairKey) -> String {
        let left = &self.strings[key.left as usize];
        let right = &self.strings[key.right as usize];
        let stem = right.strip_suffix(BoundaryConvention::WORD_END).unwrap_or(right);
        if key.closing {
            format!("{left}{stem}{}", BoundaryConvention::WORD_END)
        } else {
            format!("{left}{right}")
        }
    }
}

struct Word {
    units: Vec<u32>,
    freq: u64,
}

impl Word {
    fn pairs(&self) -> impl Iterator<Item = PairKey> + '_ {
        let n = self.units.len();
        self.units.windows(2).enumerate().map(move |(i, w)| PairKey {
            left: w[0],
            right: w[1],
            closing: i + 2 == n,
        })
    }
}

fn xlogx(c: f64) -> f64 {
    if c <= 0.0 {
        0.0
    } else {
        c * c.ln()
    }
}

/// Change in unigram log-likelihood Σ c·ln(c/N) when every counted
/// occurrence of the pair is merged into a new unit.
fn likelihood_gain(pair: u64, left: u64, right: u64, same: bool, total: u64) -> f64 {
    let (p, l, r, n) = (pair as f64, left as f64, right as f64, total as f64);
    let units = if same {
        xlogx(l - 2.0 * p) - xlogx(l)
    } else {
        xlogx(l - p) - xlogx(l) + xlogx(r - p) - xlogx(r)
    };
    units + xlogx(p) - (xlogx(n - p) - xlogx(n))
}

impl GreedyTrainer {
    pub fn new(target_size: usize) -> Self {
        Self {
            target_size,
            tolerance: DEFAULT_TOLERANCE,
            batch: DEFAULT_BATCH,
        }
    }

    pub fn tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn batch(mut self, batch: usize) -> Self {
        self.batch = batch.max(1);
        self
    }

    /// Inclusive size band accepted around the target.
    pub fn band(&self) -> (usize, usize) {
        let t = self.target_size as f64;
        let low = (t * (1.0 - self.tolerance)).ceil().max(0.0) as usize;
        let high = (t * (1.0 + self.tolerance)).floor() as usize;
        (low, high.max(low))
    }

    /// Trains and checks the result against the tolerance band.
    pub fn train(&self, corpus: &MonoCorpus) -> Result<Vocabulary> {
        if !(0.0..1.0).contains(&self.tolerance) {
            return Err(Error::Config(format!("tolerance must be in [0, 1), got {}", self.tolerance)));
        }
        let vocab = self.train_capped(corpus)?;
        let (low, high) = self.band();
        if vocab.len() < low || vocab.len() > high {
            return Err(Error::Tolerance {
                achieved: vocab.len(),
                low,
                high,
            });
        }
        Ok(vocab)
    }

    /// Trains up to the target size and stops early, without error, when
    /// no pair is left to merge. The character inventory is always kept,
    /// even when it alone exceeds the target.
    pub fn train_capped(&self, corpus: &MonoCorpus) -> Result<Vocabulary> {
        let counted = word_counts(corpus, CONVENTION);
        if counted.is_empty() {
            return Err(Error::Empty("vocabulary training corpus"));
        }
        let inventory: BTreeSet<char> = counted.iter().flat_map(|(w, _)| w.chars()).collect();
        let mut units = Units {
            strings: Vec::new(),
            ids: HashMap::new(),
        };
        for ch in &inventory {
            units.intern(ch.to_string());
        }
        let mut words: Vec<Word> = counted
            .iter()
            .map(|(w, freq)| Word {
                units: w.chars().map(|c| units.ids[&c.to_string()]).collect(),
                freq: *freq,
            })
            .collect();

        while units.strings.len() < self.target_size {
            let room = self.target_size - units.strings.len();
            let chosen = self.select_batch(&words, &units, room.min(self.batch));
            if chosen.is_empty() {
                break;
            }
            let mut rank: HashMap<PairKey, (usize, u32)> = HashMap::with_capacity(chosen.len());
            for (r, (key, joined)) in chosen.into_iter().enumerate() {
                let id = units.intern(joined);
                rank.insert(key, (r, id));
            }
            words.par_iter_mut().for_each(|w| apply_batch(w, &rank));
        }

        // Order by usage in the final working segmentation, most used first.
        let mut usage = vec![0u64; units.strings.len()];
        for w in &words {
            for &u in &w.units {
                usage[u as usize] += w.freq;
            }
        }
        let mut order: Vec<usize> = (0..units.strings.len()).collect();
        order.sort_by(|&a, &b| usage[b].cmp(&usage[a]).then(a.cmp(&b)));
        let tokens = order.into_iter().map(|i| units.strings[i].clone()).collect();
        Vocabulary::new(tokens, CONVENTION)
    }

    fn select_batch(&self, words: &[Word], units: &Units, take: usize) -> Vec<(PairKey, String)> {
        let (pairs, unit_counts) = words
            .par_iter()
            .fold(
                || (HashMap::<PairKey, u64>::new(), HashMap::<u32, u64>::new()),
                |(mut pairs, mut counts), w| {
                    let mut last: Option<(PairKey, usize)> = None;
                    for (i, key) in w.pairs().enumerate() {
                        // Runs like `aaa` hold one mergeable (a, a), not two.
                        if key.left == key.right && matches!(last, Some((k, j)) if k == key && j + 1 == i) {
                            last = None;
                            continue;
                        }
                        *pairs.entry(key).or_default() += w.freq;
                        last = Some((key, i));
                    }
                    for &u in &w.units {
                        *counts.entry(u).or_default() += w.freq;
                    }
                    (pairs, counts)
                },
            )
            .reduce(
                || (HashMap::new(), HashMap::new()),
                |(mut pa, mut ca), (pb, cb)| {
                    for (k, v) in pb {
                        *pa.entry(k).or_default() += v;
                    }
                    for (k, v) in cb {
                        *ca.entry(k).or_default() += v;
                    }
                    (pa, ca)
                },
            );
        let total: u64 = unit_counts.values().sum();

        let mut scored: Vec<(f64, String, PairKey)> = pairs
            .into_iter()
            .filter_map(|(key, count)| {
                let joined = units.joined(key);
                if units.ids.contains_key(&joined) {
                    return None;
                }
                let left = unit_counts.get(&key.left).copied().unwrap_or(0);
                let right = unit_counts.get(&key.right).copied().unwrap_or(0);
                let gain = likelihood_gain(count, left, right, key.left == key.right, total);
                Some((gain, joined, key))
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut seen = HashSet::new();
        scored
            .into_iter()
            .filter(|(_, joined, _)| seen.insert(joined.clone()))
            .take(take)
            .map(|(_, joined, key)| (key, joined))
            .collect()
    }
}

/// Applies a batch of merges to one word, earlier batch entries first.
fn apply_batch(word: &mut Word, rank: &HashMap<PairKey, (usize, u32)>) {
    let mut applied: Option<usize> = None;
    loop {
        let next = word
            .pairs()
            .filter_map(|k| rank.get(&k).map(|&(r, id)| (r, id, k)))
            .filter(|&(r, _, _)| applied.is_none_or(|a| r > a))
            .min_by_key(|&(r, _, _)| r);
        let Some((r, id, key)) = next else { break };
        let n = word.units.len();
        let mut merged = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            let closing = i + 2 == n;
            if i + 1 < n && word.units[i] == key.left && word.units[i + 1] == key.right && closing == key.closing {
                merged.push(id);
                i += 2;
            } else {
                merged.push(word.units[i]);
                i += 1;
            }
        }
        word.units = merged;
        applied = Some(r);
    }
}
