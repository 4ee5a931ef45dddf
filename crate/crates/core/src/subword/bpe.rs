use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::escape::escape_word;
use super::{mark_pieces, BoundaryConvention, Segmenter, Vocabulary};
use crate::corpus::{split_lines, MonoCorpus};
use crate::error::{Error, Result};

/// End-of-word symbol added to BPE vocabularies. It never takes part in a
/// merge and is not emitted during segmentation.
pub const END_OF_WORD: &str = "</w>";

const CONVENTION: BoundaryConvention = BoundaryConvention::ContinuationSuffix;

/// Ordered BPE merges; application replays them in list order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeTable {
    merges: Vec<(String, String)>,
    ranks: HashMap<String, HashMap<String, usize>>,
}

impl MergeTable {
    pub fn new(merges: Vec<(String, String)>) -> Result<Self> {
        let mut ranks: HashMap<String, HashMap<String, usize>> = HashMap::new();
        for (rank, (l, r)) in merges.iter().enumerate() {
            if l.is_empty() || r.is_empty() || l.contains(char::is_whitespace) || r.contains(char::is_whitespace) {
                return Err(Error::Parse {
                    line: rank + 1,
                    reason: format!("invalid merge operands {l:?} {r:?}"),
                });
            }
            ranks
                .entry(l.clone())
                .or_default()
                .entry(r.clone())
                .or_insert(rank);
        }
        Ok(Self { merges, ranks })
    }

    pub fn from_strs(merges: &[(&str, &str)]) -> Result<Self> {
        Self::new(
            merges
                .iter()
                .map(|(l, r)| (l.to_string(), r.to_string()))
                .collect(),
        )
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn len(&self) -> usize {
        self.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    fn rank(&self, left: &str, right: &str) -> Option<usize> {
        self.ranks.get(left)?.get(right).copied()
    }

    /// Replays the merges on an already escaped word and returns its pieces
    /// without boundary marks.
    pub fn split_word(&self, escaped: &str) -> Vec<String> {
        let mut symbols: Vec<String> = escaped.chars().map(String::from).collect();
        // Merges absent from the word are skipped; a merge is never
        // revisited once a later one has been applied.
        let mut applied: Option<usize> = None;
        loop {
            let next = symbols
                .windows(2)
                .filter_map(|w| self.rank(&w[0], &w[1]))
                .filter(|&r| applied.is_none_or(|a| r > a))
                .min();
            let Some(rank) = next else { break };
            let (left, right) = &self.merges[rank];
            let mut merged = Vec::with_capacity(symbols.len());
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len() && &symbols[i] == left && &symbols[i + 1] == right {
                    merged.push(format!("{left}{right}"));
                    i += 2;
                } else {
                    merged.push(std::mem::take(&mut symbols[i]));
                    i += 1;
                }
            }
            symbols = merged;
            applied = Some(rank);
        }
        symbols
    }

    /// Segments a line using only the merge table: every character is its
    /// own initial symbol, and only reserved characters are escaped.
    pub fn apply(&self, line: &str) -> super::Segmentation {
        let mut tokens = Vec::new();
        for word in super::escape::split_words(line) {
            let escaped = escape_word(word, CONVENTION.reserved(), |_| true);
            mark_pieces(self.split_word(&escaped), CONVENTION, &mut tokens);
        }
        super::Segmentation::new(tokens)
    }

    /// One merge per line, operands separated by a single space.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (l, r) in &self.merges {
            out.push_str(l);
            out.push(' ');
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut merges = Vec::new();
        for (i, line) in split_lines(text).iter().enumerate() {
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                    merges.push((l.to_string(), r.to_string()))
                }
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        reason: format!("expected `left right`, got {line:?}"),
                    })
                }
            }
        }
        Self::new(merges)
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

/// A trained BPE segmenter: the vocabulary decides which characters need
/// escaping, the merge table does the splitting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeModel {
    pub vocab: Vocabulary,
    pub merges: MergeTable,
}

impl BpeModel {
    pub fn new(vocab: Vocabulary, merges: MergeTable) -> Self {
        Self { vocab, merges }
    }
}

impl Segmenter for BpeModel {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn segment_word(&self, word: &str, out: &mut Vec<String>) {
        let escaped = escape_word(word, CONVENTION.reserved(), |c| self.vocab.has_char(c));
        mark_pieces(self.merges.split_word(&escaped), CONVENTION, out);
    }
}

/// Word-type frequencies over whitespace tokens, escaped for `convention`.
pub(crate) fn word_counts(corpus: &MonoCorpus, convention: BoundaryConvention) -> Vec<(String, u64)> {
    let counts = corpus
        .sentences
        .par_iter()
        .fold(HashMap::<String, u64>::new, |mut acc, line| {
            for w in line.split_whitespace() {
                *acc.entry(escape_word(w, convention.reserved(), |_| true)).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            if a.len() < b.len() {
                return merge_counts(b, a);
            }
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let mut words: Vec<(String, u64)> = counts.into_iter().collect();
    words.sort_unstable();
    words
}

fn merge_counts(mut a: HashMap<String, u64>, b: HashMap<String, u64>) -> HashMap<String, u64> {
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

#[derive(PartialEq, Eq)]
struct Candidate {
    count: u64,
    joined: String,
    pair: (u32, u32),
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Highest count first; ties go to the lexicographically largest
        // concatenation, which replays the textbook lower/lowest/newer/widest
        // example in its published order.
        self.count
            .cmp(&other.count)
            .then_with(|| self.joined.cmp(&other.joined))
            .then_with(|| self.pair.cmp(&other.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Learns up to `num_merges` merges from the corpus.
///
/// The vocabulary lists the character inventory, then [`END_OF_WORD`], then
/// one symbol per merge in merge order. Training stops early once no pair
/// is left to merge.
pub fn train_bpe(corpus: &MonoCorpus, num_merges: usize) -> Result<(Vocabulary, MergeTable)> {
    let words = word_counts(corpus, CONVENTION);
    if words.is_empty() {
        return Err(Error::Empty("BPE training corpus"));
    }

    let mut symbols: Vec<String> = Vec::new();
    let mut symbol_ids: HashMap<String, u32> = HashMap::new();
    let inventory: BTreeSet<char> = words.iter().flat_map(|(w, _)| w.chars()).collect();
    for ch in &inventory {
        symbol_ids.insert(ch.to_string(), symbols.len() as u32);
        symbols.push(ch.to_string());
    }

    let mut seqs: Vec<Vec<u32>> = words
        .iter()
        .map(|(w, _)| w.chars().map(|c| symbol_ids[&c.to_string()]).collect())
        .collect();
    let freqs: Vec<u64> = words.iter().map(|(_, f)| *f).collect();

    let mut pair_counts: HashMap<(u32, u32), u64> = HashMap::new();
    let mut pair_words: HashMap<(u32, u32), HashSet<usize>> = HashMap::new();
    for (wi, seq) in seqs.iter().enumerate() {
        for p in seq.windows(2) {
            *pair_counts.entry((p[0], p[1])).or_default() += freqs[wi];
            pair_words.entry((p[0], p[1])).or_default().insert(wi);
        }
    }
    let joined = |symbols: &[String], (l, r): (u32, u32)| format!("{}{}", symbols[l as usize], symbols[r as usize]);
    let mut heap: BinaryHeap<Candidate> = pair_counts
        .iter()
        .map(|(&pair, &count)| Candidate {
            count,
            joined: joined(&symbols, pair),
            pair,
        })
        .collect();

    let mut merges = Vec::with_capacity(num_merges);
    while merges.len() < num_merges {
        let Some(top) = heap.pop() else { break };
        let current = pair_counts.get(&top.pair).copied().unwrap_or(0);
        if current == 0 {
            continue;
        }
        if current != top.count {
            heap.push(Candidate { count: current, ..top });
            continue;
        }
        if symbol_ids.contains_key(&top.joined) {
            // Would duplicate an existing symbol; never eligible again.
            pair_counts.remove(&top.pair);
            continue;
        }

        let (left, right) = top.pair;
        let new_id = symbols.len() as u32;
        symbol_ids.insert(top.joined.clone(), new_id);
        symbols.push(top.joined.clone());
        merges.push((symbols[left as usize].clone(), symbols[right as usize].clone()));

        let mut affected: Vec<usize> = pair_words
            .remove(&top.pair)
            .unwrap_or_default()
            .into_iter()
            .collect();
        affected.sort_unstable();
        let mut touched: HashSet<(u32, u32)> = HashSet::new();
        for wi in affected {
            let freq = freqs[wi];
            let seq = &mut seqs[wi];
            for p in seq.windows(2) {
                let key = (p[0], p[1]);
                if let Some(c) = pair_counts.get_mut(&key) {
                    *c -= freq;
                }
                touched.insert(key);
            }
            let mut merged = Vec::with_capacity(seq.len());
            let mut i = 0;
            while i < seq.len() {
                if i + 1 < seq.len() && seq[i] == left && seq[i + 1] == right {
                    merged.push(new_id);
                    i += 2;
                } else {
                    merged.push(seq[i]);
                    i += 1;
                }
            }
            *seq = merged;
            for p in seq.windows(2) {
                let key = (p[0], p[1]);
                *pair_counts.entry(key).or_default() += freq;
                pair_words.entry(key).or_default().insert(wi);
                touched.insert(key);
            }
        }
        pair_counts.remove(&top.pair);
        let mut touched: Vec<_> = touched.into_iter().collect();
        touched.sort_unstable();
        for pair in touched {
            match pair_counts.get(&pair) {
                Some(&count) if count > 0 => heap.push(Candidate {
                    count,
                    joined: joined(&symbols, pair),
                    pair,
                }),
                _ => {
                    pair_counts.remove(&pair);
                }
            }
        }
    }

    let mut tokens: Vec<String> = inventory.iter().map(|c| c.to_string()).collect();
    tokens.push(END_OF_WORD.to_string());
    tokens.extend(symbols.into_iter().skip(inventory.len()));
    let vocab = Vocabulary::new(tokens, CONVENTION)?;
    Ok((vocab, MergeTable::new(merges)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subword::detokenize;

    fn corpus(lines: &[&str]) -> MonoCorpus {
        MonoCorpus::from_lines(lines.iter().copied())
    }

    #[test]
    fn textbook_merge_order() {
        let (vocab, table) = train_bpe(&corpus(&["lower lowest newer widest"]), 3).unwrap();
        let merges: Vec<(&str, &str)> = table.merges().iter().map(|(l, r)| (l.as_str(), r.as_str())).collect();
        assert_eq!(merges, [("w", "e"), ("we", "r"), ("s", "t")]);
        let tail: Vec<&str> = vocab.tokens().iter().rev().take(3).map(String::as_str).collect();
        assert_eq!(tail, ["st", "wer", "we"]);
    }

    #[test]
    fn replay_newest_and_lower() {
        let table = MergeTable::from_strs(&[("w", "e"), ("we", "r"), ("s", "t")]).unwrap();
        assert_eq!(table.apply("newest").to_string(), "n@@ e@@ we@@ st");
        assert_eq!(table.apply("lower").to_string(), "l@@ o@@ wer");
        let empty = MergeTable::default();
        assert_eq!(empty.apply("cat").to_string(), "c@@ a@@ t");
    }

    #[test]
    fn zero_merges_gives_character_inventory() {
        let (vocab, table) = train_bpe(&corpus(&["abc cab"]), 0).unwrap();
        assert!(table.is_empty());
        assert_eq!(vocab.tokens(), ["a", "b", "c", END_OF_WORD]);
    }

    #[test]
    fn single_pair_merges_to_one_token() {
        let (vocab, table) = train_bpe(&corpus(&["aa"]), 1).unwrap();
        assert_eq!(table.merges(), [("a".to_string(), "a".to_string())]);
        let model = BpeModel::new(vocab, table);
        assert_eq!(model.segment("aa").to_string(), "aa");
    }

    #[test]
    fn stops_when_pairs_run_out() {
        let (vocab, table) = train_bpe(&corpus(&["ab"]), 10).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(vocab.len(), 2 + 1 + 1);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(train_bpe(&corpus(&["", "  "]), 5), Err(Error::Empty(_))));
    }

    #[test]
    fn model_escapes_unknown_characters() {
        let (vocab, table) = train_bpe(&corpus(&["abc abd"]), 2).unwrap();
        let model = BpeModel::new(vocab, table);
        let seg = model.segment("abé a@b");
        assert!(seg.tokens.iter().any(|t| t.starts_with('\\')));
        assert_eq!(detokenize(&seg, BoundaryConvention::ContinuationSuffix).unwrap(), "abé a@b");
    }

    #[test]
    fn merge_file_round_trip() {
        let table = MergeTable::from_strs(&[("w", "e"), ("we", "r")]).unwrap();
        assert_eq!(table.to_text(), "w e\nwe r\n");
        assert_eq!(MergeTable::parse(&table.to_text()).unwrap(), table);
        assert!(MergeTable::parse("a b c\n").is_err());
    }

    #[test]
    fn replay_is_sequential() {
        // (ab, c) is listed before (a, b); sequential replay never returns to it.
        let table = MergeTable::from_strs(&[("ab", "c"), ("a", "b")]).unwrap();
        assert_eq!(table.split_word("abc"), ["ab", "c"]);
    }
}
