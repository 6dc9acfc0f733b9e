//! Spectral estimation for irregularly sampled, fragmented data in one or
//! more dimensions.
//!
//! The estimator at the center of this crate is a least-squares fit of a
//! phase-shifted sinusoid, evaluated independently per frequency (the
//! Lomb-Scargle approach, extended to multivariate sample coordinates by
//! shifting the phase argument instead of the time axis). Around it sit:
//!
//! * [`lsm`]: the per-frequency estimator with shift parameter,
//!   coefficients, confidence intervals, full-grid analysis, and a
//!   brute-force least-squares oracle used for testing.
//! * [`stats`]: standardized power spectral density, exceedance
//!   probability, false alarm probability, and signal-to-noise measures.
//! * [`baselines`]: the classical quadrature demodulation (orthogonal mode
//!   decomposition) estimator, its analytic error budget, and a zero-padded
//!   DFT power spectrum, kept around as comparison points.
//! * [`synth`]: deterministic, seeded generation of test signals, sampling
//!   patterns, missing-value masks, and Gaussian noise.
//! * [`io`]: the CSV formats for samples, spectra, and gridded fields.
//!
//! Sample coordinates are dimensionless reals (time, space, angle, ...).
//! Frequencies enter either as ordinary frequencies `f` or angular
//! frequencies `omega = 2*pi*f`; [`FrequencyGrid`] records which convention
//! it stores so the conversion happens exactly once. The low-level `lsm`
//! and `baselines` functions always take angular frequencies.

pub mod baselines;
mod error;
pub mod io;
pub mod lsm;
pub mod math;
pub mod stats;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    build_regular_grid, build_regular_grid_with, validate_samples, DegeneracyFlags, ErrorBudget,
    FrequencyConvention, FrequencyGrid, GridAxis, NoiseSpec, SampleSet, Spectrum, SpectrumPoint,
};
