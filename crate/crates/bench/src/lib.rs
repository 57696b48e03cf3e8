//! Inputs shared by the benchmarks.

use snake_story::analysis::PairedSample;
use snake_story::rng::DrawStream;

pub const GAME_LOG: &str = include_str!("../../core/fixtures/game_p11.log");
pub const NONGAME_LOG: &str = include_str!("../../core/fixtures/nongame_p11.log");

/// `n` pairs with distinct, untied differences.
pub fn paired_samples(n: usize, seed: u64) -> Vec<PairedSample> {
    let mut rng = DrawStream::new(seed);
    (0..n)
        .map(|i| {
            let magnitude = (i + 1) as f64;
            let sign = if rng.pick(3) == 0 { -1.0 } else { 1.0 };
            PairedSample::new(format!("p{i}"), 50.0 + sign * magnitude, 50.0)
        })
        .collect()
}

/// `n` tokens over a vocabulary of `vocab` words.
pub fn tokens(n: usize, vocab: usize, seed: u64) -> Vec<String> {
    let mut rng = DrawStream::new(seed);
    (0..n).map(|_| format!("w{}", rng.pick(vocab))).collect()
}
