//! Synthetic inputs shared by the benchmarks in benches/.

use rand::Rng;

const SYLLABLES: &[&str] = &["ka", "to", "ri", "ne", "su", "mo", "la", "pe", "di", "vo", "st", "an", "er", "in"];

/// Deterministic pseudo-text: Zipf-ish word draws from a fixed lexicon.
pub fn synthetic_lines(lines: usize, seed: u64) -> Vec<String> {
    let mut rng = subvocab::rng::stream(seed, 0);
    let lexicon: Vec<String> = (0..2000)
        .map(|_| (0..rng.gen_range(1..5)).map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())]).collect())
        .collect();
    (0..lines)
        .map(|_| {
            let n = rng.gen_range(4..25);
            let words: Vec<&str> = (0..n)
                .map(|_| {
                    let u: f64 = rng.gen();
                    lexicon[((u * u * u) * lexicon.len() as f64) as usize].as_str()
                })
                .collect();
            words.join(" ")
        })
        .collect()
}

/// Copies `lines` with roughly `rate` of the words replaced.
pub fn perturb(lines: &[String], rate: f64, seed: u64) -> Vec<String> {
    let mut rng = subvocab::rng::stream(seed, 1);
    lines
        .iter()
        .map(|l| {
            l.split(' ')
                .map(|w| if rng.gen_bool(rate) { "xx" } else { w })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}
