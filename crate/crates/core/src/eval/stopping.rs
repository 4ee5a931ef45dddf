use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::split_lines;
use crate::error::{Error, Result};

pub const DEFAULT_REL_DELTA: f64 = 0.005;
pub const DEFAULT_WINDOW_FRAC: f64 = 0.5;

/// Development-set scores over training, one point per evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    points: Vec<(u64, f64)>,
}

impl LearningCurve {
    pub fn new(points: Vec<(u64, f64)>) -> Result<Self> {
        for (i, &(step, score)) in points.iter().enumerate() {
            if !score.is_finite() || score < 0.0 {
                return Err(Error::Config(format!("invalid score {score} at step {step}")));
            }
            if i > 0 && points[i - 1].0 >= step {
                return Err(Error::Config(format!("steps must increase strictly, got {} then {step}", points[i - 1].0)));
            }
        }
        Ok(Self { points })
    }

    /// Steps 1, 2, 3, ... for the given scores.
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        Self::new(scores.iter().enumerate().map(|(i, &s)| (i as u64 + 1, s)).collect())
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Two tab- or space-separated columns, `step score`. A first line
    /// that does not parse as numbers is taken as a header; `#` comments
    /// and blank lines are skipped.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (i, line) in split_lines(text).iter().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parsed = match cols.as_slice() {
                [step, score] => step.parse::<u64>().ok().zip(score.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(p) => points.push(p),
                None if i == 0 => continue,
                None => {
                    return Err(Error::Parse {
                        line: i + 1,
                        reason: format!("expected `step<TAB>score`, got {line:?}"),
                    })
                }
            }
        }
        Self::new(points)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopDecision {
    pub stop: bool,
    pub max_score: f64,
    /// `max_score * (1 - rel_delta)`.
    pub threshold: f64,
    /// Earliest evaluation (0-based) reaching the threshold.
    pub reached_index: usize,
    pub reached_step: u64,
    /// Evaluations with index below this form the part before the window.
    pub window_start: f64,
    pub explanation: String,
}

/// Training should stop once no evaluation in the last `window_frac` of
/// the curve improved on the earlier ones by more than `rel_delta` of the
/// best score.
pub fn should_stop(curve: &LearningCurve, rel_delta: f64, window_frac: f64) -> Result<StopDecision> {
    if curve.is_empty() {
        return Err(Error::Empty("learning curve"));
    }
    if !(0.0..=1.0).contains(&rel_delta) || !(0.0..=1.0).contains(&window_frac) {
        return Err(Error::Config("rel_delta and window_frac must lie in [0, 1]".into()));
    }
    let scores: Vec<f64> = curve.points.iter().map(|p| p.1).collect();
    let max_score = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = max_score * (1.0 - rel_delta);
    let reached_index = scores.iter().position(|&s| s >= threshold).unwrap_or(0);
    let window_start = (1.0 - window_frac) * scores.len() as f64;
    let stop = (reached_index + 1) as f64 <= window_start;
    let explanation = format!(
        "max {max_score} (threshold {threshold}) first reached at evaluation {} of {}; window starts after evaluation {window_start}: {}",
        reached_index + 1,
        scores.len(),
        if stop { "no recent improvement, stop" } else { "still improving, continue" }
    );
    Ok(StopDecision {
        stop,
        max_score,
        threshold,
        reached_index,
        reached_step: curve.points[reached_index].0,
        window_start,
        explanation,
    })
}

/// Earliest point with the maximum score.
pub fn best_point(curve: &LearningCurve) -> Result<(u64, f64)> {
    curve
        .points
        .iter()
        .copied()
        .reduce(|best, p| if p.1 > best.1 { p } else { best })
        .ok_or(Error::Empty("learning curve"))
}
