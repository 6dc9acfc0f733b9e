//! Shared fixtures for the criterion benches; no library code of its own.

use ndlomb::synth::{self, presets};
use ndlomb::types::SampleSet;

/// The standard missing-data plane-wave dataset (2624 samples).
pub fn simple_wave_samples() -> SampleSet {
    let preset = presets::simple_wave(1);
    synth::generate(
        &preset.signal,
        &preset.sampling,
        preset.noise_sigma,
        preset.noise_seed,
    )
    .expect("simple-wave generation")
}
