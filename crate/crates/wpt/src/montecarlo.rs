//! Sampled input signals for checking waveform factors empirically.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use wpt_core::waveforms::estimate_factors;
use wpt_core::WaveformKind;

/// Seed used by the moment checks unless another is given.
pub const MC_SEED: u64 = 20_170_611;

/// `count` samples of the signal, deterministic in `seed`. The amplitude is
/// arbitrary since the factors are scale-free.
pub fn sample_signal(kind: WaveformKind, count: usize, seed: u64) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(move |_| match kind {
        WaveformKind::ContinuousWave => (TAU * rng.random::<f64>()).cos(),
        WaveformKind::RealGaussian => rng.sample(StandardNormal),
    })
}

/// Monte Carlo estimates of `lambda_{2j}` for `2j <= max_order`.
pub fn monte_carlo_factors(
    kind: WaveformKind,
    count: usize,
    seed: u64,
    max_order: u32,
) -> wpt_core::Result<BTreeMap<u32, f64>> {
    estimate_factors(sample_signal(kind, count, seed), max_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<f64> = sample_signal(WaveformKind::RealGaussian, 16, 3).collect();
        let b: Vec<f64> = sample_signal(WaveformKind::RealGaussian, 16, 3).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn rough_agreement_with_small_sample() {
        for kind in [WaveformKind::ContinuousWave, WaveformKind::RealGaussian] {
            let est = monte_carlo_factors(kind, 200_000, MC_SEED, 4).unwrap();
            assert_eq!(est[&2], 1.0);
            let rel = (est[&4] - kind.factor(2)).abs() / kind.factor(2);
            assert!(rel < 0.03, "{kind:?} {rel}");
        }
    }
}
