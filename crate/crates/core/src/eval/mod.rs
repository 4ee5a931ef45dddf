//! Translation quality measurement: corpus BLEU, paired bootstrap
//! resampling and the learning-curve stopping rule.

mod bleu;
mod bootstrap;
mod stopping;

pub use bleu::{brevity_penalty, corpus_bleu, corpus_bleu_with, whitespace_bleu, BleuReport, BleuStats, Smoothing, DEFAULT_MAX_N};
pub use bootstrap::{paired_bootstrap, SignificanceResult, DEFAULT_RESAMPLES};
pub use stopping::{best_point, should_stop, LearningCurve, StopDecision, DEFAULT_REL_DELTA, DEFAULT_WINDOW_FRAC};

/// Splits each line on whitespace. Not a real tokenizer.
pub fn tokenize_lines<S: AsRef<str>>(lines: &[S]) -> Vec<Vec<String>> {
    lines
        .iter()
        .map(|l| l.as_ref().split_whitespace().map(str::to_string).collect())
        .collect()
}
