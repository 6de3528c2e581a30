//! Shared inputs for the benchmarks.

use imfkit_core::synth::{exposure_pair, rng, Curve, PairParams, SynthPair};

/// A seeded `width x height` three-channel pair related by a gamma curve.
pub fn bench_pair(width: usize, height: usize) -> SynthPair {
    let p = PairParams { width, height, channels: 3, noise: 1.0 };
    exposure_pair(&mut rng(11), Curve::Gamma { gamma: 0.6 }, &p)
}
