//! Words as bags of marked substrings, with averaged embeddings.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{split_lines, MonoCorpus};
use crate::error::{Error, Result};
use crate::rng;

pub const WORD_START: char = '^';
pub const WORD_END: char = '$';

fn check_word(word: &str) -> Result<()> {
    if word.is_empty() {
        return Err(Error::Empty("word"));
    }
    if word.chars().any(char::is_whitespace) {
        return Err(Error::Config(format!("word {word:?} contains whitespace")));
    }
    if word.contains([WORD_START, WORD_END]) {
        return Err(Error::ReservedMarker(word.to_string()));
    }
    Ok(())
}

/// Distinct substrings of length two or more of `^word$`, shortest first,
/// then by position.
pub fn word_substrings(word: &str) -> Result<Vec<String>> {
    check_word(word)?;
    let marked: Vec<char> = std::iter::once(WORD_START).chain(word.chars()).chain([WORD_END]).collect();
    let m = marked.len();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for len in 2..=m {
        for start in 0..=m - len {
            let s: String = marked[start..start + len].iter().collect();
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

const VOCAB_HEADER: &str = "#subvocab substrings";

/// Most frequent marked substrings of a training corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstringVocabulary {
    substrings: Vec<String>,
    index: HashMap<String, usize>,
}

impl SubstringVocabulary {
    pub fn new(substrings: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(substrings.len());
        for (i, s) in substrings.iter().enumerate() {
            if s.chars().count() < 2 || s.chars().any(char::is_whitespace) {
                return Err(Error::Vocabulary(format!("invalid substring {s:?}")));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::Vocabulary(format!("duplicate substring {s:?}")));
            }
        }
        Ok(Self { substrings, index })
    }

    /// Top `size` substrings by occurrence count over all word tokens of
    /// the corpus, ties broken lexicographically.
    pub fn build(corpus: &MonoCorpus, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Config("substring vocabulary size must be at least 1".into()));
        }
        let words: HashMap<&str, u64> = corpus
            .sentences
            .par_iter()
            .fold(HashMap::new, |mut acc, line| {
                for w in line.split_whitespace() {
                    *acc.entry(w).or_default() += 1;
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (w, c) in b {
                    *a.entry(w).or_default() += c;
                }
                a
            });
        if words.is_empty() {
            return Err(Error::Empty("substring training corpus"));
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        for (w, c) in words {
            for s in word_substrings(w)? {
                *counts.entry(s).or_default() += c;
            }
        }
        let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(size);
        Self::new(ranked.into_iter().map(|(s, _)| s).collect())
    }

    pub fn len(&self) -> usize {
        self.substrings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.substrings.is_empty()
    }

    pub fn substrings(&self) -> &[String] {
        &self.substrings
    }

    pub fn get(&self, s: &str) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Header line, then one substring per line; substring `i` on line `i + 1`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{VOCAB_HEADER}\n");
        for s in &self.substrings {
            out.push_str(s);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = split_lines(text).into_iter();
        match lines.next() {
            Some(h) if h == VOCAB_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    reason: format!("expected header `{VOCAB_HEADER}`"),
                })
            }
        }
        Self::new(lines.collect())
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

/// Sparse 0/1 vector over a substring vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiHotVector {
    /// Sorted, distinct.
    pub active: Vec<usize>,
}

impl MultiHotVector {
    pub fn new(mut active: Vec<usize>) -> Self {
        active.sort_unstable();
        active.dedup();
        Self { active }
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }
}

/// Vocabulary positions of the word's substrings. Empty when none are known.
pub fn encode_multi_hot(word: &str, vocab: &SubstringVocabulary) -> Result<MultiHotVector> {
    Ok(MultiHotVector::new(
        word_substrings(word)?.iter().filter_map(|s| vocab.get(s)).collect(),
    ))
}

/// Dense row-major matrix, one row per substring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::Empty("embedding matrix"));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Config(format!("row {i} has {} columns, expected {dim}", rows[i].len())));
        }
        Ok(Self {
            rows: rows.len(),
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Uniform in `[-0.5/dim, 0.5/dim]`, drawn row by row from one seeded stream.
    pub fn random(rows: usize, dim: usize, seed: u64) -> Result<Self> {
        if rows == 0 || dim == 0 {
            return Err(Error::Empty("embedding matrix"));
        }
        let bound = 0.5 / dim as f64;
        let mut rng = rng::stream(seed, 0);
        let data = (0..rows * dim).map(|_| rng.gen_range(-bound..=bound)).collect();
        Ok(Self { rows, dim, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `rows dim` header, then one whitespace-separated row per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.dim);
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(f64::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines = split_lines(text);
        let bad = |line: usize, reason: String| Error::Parse { line, reason };
        let header: Vec<usize> = lines
            .first()
            .ok_or(Error::Empty("embedding file"))?
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(1, format!("bad header: {e}")))?;
        let [rows, dim] = header[..] else {
            return Err(bad(1, "header must be `rows dim`".into()));
        };
        if lines.len() != rows + 1 {
            return Err(bad(lines.len(), format!("expected {rows} rows, found {}", lines.len() - 1)));
        }
        let mut parsed = Vec::with_capacity(rows);
        for (i, line) in lines[1..].iter().enumerate() {
            let row: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(i + 2, format!("{e}")))?;
            if row.len() != dim {
                return Err(bad(i + 2, format!("expected {dim} values, found {}", row.len())));
            }
            parsed.push(row);
        }
        Self::from_rows(parsed)
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

/// Mean of the embedding rows selected by the multi-hot vector.
pub fn mean_embedding(vec: &MultiHotVector, w: &EmbeddingMatrix) -> Result<Vec<f64>> {
    if vec.is_empty() {
        return Err(Error::Empty("multi-hot vector"));
    }
    if let Some(&i) = vec.active.iter().find(|&&i| i >= w.rows) {
        return Err(Error::Config(format!("index {i} out of range for {} rows", w.rows)));
    }
    let mut out = vec![0.0; w.dim];
    for &i in &vec.active {
        out.iter_mut().zip(w.row(i)).for_each(|(o, x)| *o += x);
    }
    let n = vec.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat() {
        let got = word_substrings("cat").unwrap();
        assert_eq!(got, ["^c", "ca", "at", "t$", "^ca", "cat", "at$", "^cat", "cat$", "^cat$"]);
    }

    #[test]
    fn single_letter_and_repeats() {
        assert_eq!(word_substrings("a").unwrap(), ["^a", "a$", "^a$"]);
        // "aa" occurs twice in "^aaa$".
        assert_eq!(word_substrings("aaa").unwrap().len(), 9);
    }

    #[test]
    fn rejects_markers_and_empty() {
        assert!(matches!(word_substrings("a^b"), Err(Error::ReservedMarker(_))));
        assert!(word_substrings("").is_err());
    }

    #[test]
    fn build_orders_by_frequency() {
        let v = SubstringVocabulary::build(&MonoCorpus::from_lines(["ab ab", "cd"]), 6).unwrap();
        assert_eq!(v.substrings(), ["^a", "^ab", "^ab$", "ab", "ab$", "b$"]);
        let one = SubstringVocabulary::build(&MonoCorpus::from_lines(["ab ab", "cd"]), 1).unwrap();
        assert_eq!(one.substrings(), ["^a"]);
    }

    #[test]
    fn multi_hot_intersection() {
        let v = SubstringVocabulary::new(vec!["ca".into(), "at".into()]).unwrap();
        assert_eq!(encode_multi_hot("cat", &v).unwrap().active, [0, 1]);
        assert!(encode_multi_hot("dog", &v).unwrap().is_empty());
    }

    #[test]
    fn mean_of_rows() {
        let w = EmbeddingMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![0.5, 0.5]]).unwrap();
        assert_eq!(mean_embedding(&MultiHotVector::new(vec![1]), &w).unwrap(), [3.0, 6.0]);
        assert_eq!(mean_embedding(&MultiHotVector::new(vec![0, 1]), &w).unwrap(), [2.0, 4.0]);
        assert!(mean_embedding(&MultiHotVector::new(vec![]), &w).is_err());
    }

    #[test]
    fn random_init_bounds_and_text_round_trip() {
        let w = EmbeddingMatrix::random(5, 4, 3).unwrap();
        assert!(w.data.iter().all(|x| x.abs() <= 0.125));
        assert_eq!(EmbeddingMatrix::parse(&w.to_text()).unwrap(), w);
        assert_eq!(w, EmbeddingMatrix::random(5, 4, 3).unwrap());
    }

    #[test]
    fn vocab_file_round_trip() {
        let v = SubstringVocabulary::new(vec!["^a".into(), "ab$".into()]).unwrap();
        assert_eq!(SubstringVocabulary::parse(&v.to_text()).unwrap(), v);
    }
}
