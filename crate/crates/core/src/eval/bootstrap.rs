use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bleu::{sentence_stats, BleuStats, Smoothing};
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub score_a: f64,
    pub score_b: f64,
    /// `score_a - score_b` on the full test set.
    pub observed_delta: f64,
    /// Mean of the per-resample deltas.
    pub mean_delta: f64,
    /// Share of resamples in which A does not beat B.
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub resamples: usize,
    pub seed: u64,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Paired bootstrap resampling of corpus BLEU.
///
/// Each resample draws `n` sentence indices with replacement from its own
/// RNG stream `(seed, resample)`, so the result does not depend on the
/// thread schedule. The p-value is one-sided for "A is better than B".
pub fn paired_bootstrap<S: AsRef<str> + Sync>(
    hyp_a: &[Vec<S>],
    hyp_b: &[Vec<S>],
    references: &[Vec<Vec<S>>],
    max_n: usize,
    resamples: usize,
    seed: u64,
) -> Result<SignificanceResult> {
    if hyp_a.len() != hyp_b.len() {
        return Err(Error::Alignment {
            source_lines: hyp_a.len(),
            target_lines: hyp_b.len(),
        });
    }
    if resamples == 0 {
        return Err(Error::Config("resamples must be at least 1".into()));
    }
    let stats_a = sentence_stats(hyp_a, references, max_n)?;
    let stats_b = sentence_stats(hyp_b, references, max_n)?;
    let n = stats_a.len();
    let score = |stats: &[BleuStats], idx: &[usize]| {
        let mut total = BleuStats::zero(max_n);
        idx.iter().for_each(|&i| total.add(&stats[i]));
        total.report(Smoothing::None).score
    };
    let all: Vec<usize> = (0..n).collect();
    let score_a = score(&stats_a, &all);
    let score_b = score(&stats_b, &all);

    let mut deltas: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map_init(Vec::new, |idx, r| {
            let mut rng = rng::stream(seed, r);
            idx.clear();
            idx.extend((0..n).map(|_| rng.gen_range(0..n)));
            score(&stats_a, idx) - score(&stats_b, idx)
        })
        .collect();
    let not_better = deltas.iter().filter(|&&d| d <= 0.0).count();
    let mean_delta = deltas.iter().sum::<f64>() / resamples as f64;
    deltas.sort_by(f64::total_cmp);
    Ok(SignificanceResult {
        score_a,
        score_b,
        observed_delta: score_a - score_b,
        mean_delta,
        p_value: not_better as f64 / resamples as f64,
        ci_low: percentile(&deltas, 0.025),
        ci_high: percentile(&deltas, 0.975),
        resamples,
        seed,
    })
}
