use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_N: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    #[default]
    None,
    /// Zero match counts are replaced by this value before dividing.
    AddEpsilon(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuReport {
    /// `p_n` for n = 1..=max_n.
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    pub sys_length: usize,
    pub ref_length: usize,
    /// On the 0..=100 scale.
    pub score: f64,
}

/// Additive sufficient statistics of corpus BLEU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub sys_length: usize,
    pub ref_length: usize,
}

impl BleuStats {
    pub fn zero(max_n: usize) -> Self {
        Self {
            matches: vec![0; max_n],
            totals: vec![0; max_n],
            sys_length: 0,
            ref_length: 0,
        }
    }

    pub fn add(&mut self, other: &BleuStats) {
        for n in 0..self.matches.len() {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.sys_length += other.sys_length;
        self.ref_length += other.ref_length;
    }

    /// Statistics of one sentence against its references.
    pub fn sentence<S: AsRef<str>>(hyp: &[S], refs: &[Vec<S>], max_n: usize) -> Self {
        let mut stats = Self::zero(max_n);
        stats.sys_length = hyp.len();
        stats.ref_length = refs
            .iter()
            .map(Vec::len)
            .min_by_key(|&len| (len.abs_diff(hyp.len()), len))
            .unwrap_or(0);
        for n in 1..=max_n {
            let hyp_counts = ngram_counts(hyp, n);
            let mut max_ref: HashMap<Vec<&str>, u64> = HashMap::new();
            for r in refs {
                for (g, c) in ngram_counts(r, n) {
                    let e = max_ref.entry(g).or_default();
                    *e = (*e).max(c);
                }
            }
            stats.totals[n - 1] = hyp.len().saturating_sub(n - 1) as u64;
            stats.matches[n - 1] = hyp_counts
                .iter()
                .map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }

    pub fn report(&self, smoothing: Smoothing) -> BleuReport {
        let precisions: Vec<f64> = self
            .matches
            .iter()
            .zip(&self.totals)
            .map(|(&m, &t)| match (t, smoothing) {
                (0, _) => 0.0,
                (_, Smoothing::AddEpsilon(eps)) if m == 0 => eps / t as f64,
                _ => m as f64 / t as f64,
            })
            .collect();
        let brevity_penalty = brevity_penalty(self.sys_length, self.ref_length);
        let score = if precisions.iter().any(|&p| p <= 0.0) {
            0.0
        } else {
            let w = 1.0 / precisions.len() as f64;
            let log_mean: f64 = precisions.iter().map(|p| w * p.ln()).sum();
            100.0 * brevity_penalty * log_mean.exp()
        };
        BleuReport {
            precisions,
            brevity_penalty,
            sys_length: self.sys_length,
            ref_length: self.ref_length,
            score,
        }
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, u64> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w.iter().map(AsRef::as_ref).collect()).or_default() += 1;
        }
    }
    out
}

/// 1 above the reference length, `exp(1 - ref/sys)` at or below it.
pub fn brevity_penalty(sys_length: usize, ref_length: usize) -> f64 {
    if sys_length > ref_length {
        1.0
    } else if sys_length == 0 {
        if ref_length == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ref_length as f64 / sys_length as f64).exp()
    }
}

/// Corpus BLEU over pre-tokenized sentences, unsmoothed.
///
/// `references[i]` holds every reference for `hypotheses[i]`. Matches are
/// clipped per sentence and summed over the corpus before the geometric
/// mean is taken.
pub fn corpus_bleu<S: AsRef<str> + Sync>(hypotheses: &[Vec<S>], references: &[Vec<Vec<S>>], max_n: usize) -> Result<BleuReport> {
    corpus_bleu_with(hypotheses, references, max_n, Smoothing::None)
}

pub fn corpus_bleu_with<S: AsRef<str> + Sync>(
    hypotheses: &[Vec<S>],
    references: &[Vec<Vec<S>>],
    max_n: usize,
    smoothing: Smoothing,
) -> Result<BleuReport> {
    Ok(corpus_stats(hypotheses, references, max_n)?.report(smoothing))
}

pub(crate) fn sentence_stats<S: AsRef<str> + Sync>(
    hypotheses: &[Vec<S>],
    references: &[Vec<Vec<S>>],
    max_n: usize,
) -> Result<Vec<BleuStats>> {
    if hypotheses.is_empty() {
        return Err(Error::Empty("hypotheses"));
    }
    if max_n == 0 {
        return Err(Error::Config("max_n must be at least 1".into()));
    }
    if hypotheses.len() != references.len() {
        return Err(Error::Alignment {
            source_lines: hypotheses.len(),
            target_lines: references.len(),
        });
    }
    if let Some(i) = references.iter().position(Vec::is_empty) {
        return Err(Error::Config(format!("sentence {} has no reference", i + 1)));
    }
    Ok(hypotheses
        .par_iter()
        .zip(references)
        .map(|(h, r)| BleuStats::sentence(h, r, max_n))
        .collect())
}

fn corpus_stats<S: AsRef<str> + Sync>(hypotheses: &[Vec<S>], references: &[Vec<Vec<S>>], max_n: usize) -> Result<BleuStats> {
    let per = sentence_stats(hypotheses, references, max_n)?;
    let mut total = BleuStats::zero(max_n);
    per.iter().for_each(|s| total.add(s));
    Ok(total)
}

/// BLEU on whitespace-split lines; `references` holds one stream per
/// reference set, each aligned with `hypotheses`. Convenience only: real
/// evaluations should tokenize consistently beforehand.
pub fn whitespace_bleu<S: AsRef<str>>(hypotheses: &[S], references: &[Vec<S>], max_n: usize) -> Result<BleuReport> {
    let hyps = super::tokenize_lines(hypotheses);
    for stream in references {
        if stream.len() != hyps.len() {
            return Err(Error::Alignment {
                source_lines: hyps.len(),
                target_lines: stream.len(),
            });
        }
    }
    let streams: Vec<Vec<Vec<String>>> = references.iter().map(|s| super::tokenize_lines(s)).collect();
    let refs: Vec<Vec<Vec<String>>> = (0..hyps.len())
        .map(|i| streams.iter().map(|s| s[i].clone()).collect())
        .collect();
    corpus_bleu(&hyps, &refs, max_n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity_is_exactly_100() {
        let h = vec![toks("the cat sat on the mat"), toks("a b c d")];
        let r: Vec<Vec<Vec<&str>>> = h.iter().map(|x| vec![x.clone()]).collect();
        let rep = corpus_bleu(&h, &r, 4).unwrap();
        assert_eq!(rep.score, 100.0);
        assert_eq!(rep.brevity_penalty, 1.0);
        assert!(rep.precisions.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn no_four_gram_overlap_scores_zero() {
        let h = vec![toks("a b c d e")];
        let r = vec![vec![toks("a b c x d e")]];
        let rep = corpus_bleu(&h, &r, 4).unwrap();
        assert_eq!(rep.precisions[3], 0.0);
        assert_eq!(rep.score, 0.0);
    }

    #[test]
    fn brevity_penalty_closed_form() {
        assert!((brevity_penalty(9, 10) - (-1.0f64 / 9.0).exp()).abs() < 1e-12);
        assert_eq!(brevity_penalty(10, 10), 1.0);
        assert_eq!(brevity_penalty(11, 10), 1.0);
        assert_eq!(brevity_penalty(0, 3), 0.0);
    }

    #[test]
    fn clipping() {
        let h = vec![toks("the the the the")];
        let r = vec![vec![toks("the cat")]];
        let rep = corpus_bleu(&h, &r, 1).unwrap();
        assert_eq!(rep.precisions[0], 0.25);
    }

    #[test]
    fn closest_reference_ties_to_shorter() {
        let h = vec![toks("a b c")];
        let r = vec![vec![toks("a b c d"), toks("a b")]];
        assert_eq!(corpus_bleu(&h, &r, 1).unwrap().ref_length, 2);
    }

    #[test]
    fn short_hypothesis_does_not_crash() {
        let h = vec![toks("a")];
        let r = vec![vec![toks("a")]];
        let rep = corpus_bleu(&h, &r, 4).unwrap();
        assert_eq!(rep.precisions, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(rep.score, 0.0);
    }

    #[test]
    fn smoothing_rescues_zero_orders() {
        let h = vec![toks("a b c d e")];
        let r = vec![vec![toks("a b c x d e")]];
        let rep = corpus_bleu_with(&h, &r, 4, Smoothing::AddEpsilon(0.1)).unwrap();
        assert!(rep.score > 0.0);
    }

    #[test]
    fn empty_and_misaligned_inputs() {
        let none: Vec<Vec<&str>> = vec![];
        assert!(corpus_bleu(&none, &[], 4).is_err());
        assert!(corpus_bleu(&[toks("a")], &[], 4).is_err());
    }

    #[test]
    fn whitespace_wrapper() {
        let rep = whitespace_bleu(&["a b c d"], &[vec!["a b c d"]], 4).unwrap();
        assert_eq!(rep.score, 100.0);
    }
}
