//! Deterministic synthetic data: plane-wave signals, sampling patterns,
//! missing-value masks, and Gaussian noise.
//!
//! # Random source
//!
//! All randomness comes from ChaCha8 streams keyed by a 64-bit seed and a
//! 64-bit stream id. The 32-byte ChaCha key is laid out as
//!
//! ```text
//! bytes  0..8   seed, little endian
//! bytes  8..16  stream id, little endian
//! bytes 16..22  the ASCII tag "ndlomb"
//! bytes 22..32  zero
//! ```
//!
//! with the all-zero ChaCha nonce/counter start. Three stream ids are used:
//! [`STREAM_LOCATIONS`] for sampling locations, [`STREAM_MASK`] for the
//! missing-value mask, and [`STREAM_NOISE`] for measurement noise. Because
//! the streams are independent, the mask and the noise can be varied
//! orthogonally: regenerating with a different noise seed keeps locations
//! and mask bit-identical, and changing `missing_fraction` leaves the
//! values of surviving points untouched.
//!
//! Uniform deviates take the top 53 bits of `next_u64`, so
//! `u = (x >> 11) * 2^-53` lies in `[0, 1)`. Gaussian deviates are the
//! standard-normal quantile of the half-open-centered uniform
//! `((x >> 11) + 0.5) * 2^-53`, a deterministic inverse-CDF transform with
//! no rejection step, so any implementation of the same stream reproduces
//! the same values. The first outputs of each stream for seed 42 are pinned
//! in this module's tests.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::types::SampleSet;

/// Stream id for sampling locations.
pub const STREAM_LOCATIONS: u64 = 0;
/// Stream id for the missing-value mask.
pub const STREAM_MASK: u64 = 1;
/// Stream id for measurement noise.
pub const STREAM_NOISE: u64 = 2;

/// ChaCha8 stream for `(seed, stream)`; see the module docs for the key
/// layout.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..22].copy_from_slice(b"ndlomb");
    ChaCha8Rng::from_seed(key)
}

const TWO_POW_NEG53: f64 = 1.0 / (1u64 << 53) as f64;

/// Uniform deviate in `[0, 1)` from the top 53 bits of the stream.
pub fn unit_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * TWO_POW_NEG53
}

/// Standard Gaussian deviate via the inverse-CDF transform of the centered
/// uniform `((x >> 11) + 0.5) * 2^-53`, which never hits 0 or 1.
pub fn standard_gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG53;
    math::normal_quantile(u)
}

/// One sinusoidal plane-wave component `A * cos(2 pi f.t + phi)`, with the
/// frequency vector in ordinary units.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalComponent {
    pub freq: Vec<f64>,
    pub amplitude: f64,
    pub phase: f64,
}

/// A sum of plane-wave components over an `m`-dimensional coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalSpec {
    dims: usize,
    components: Vec<SignalComponent>,
}

impl SignalSpec {
    pub fn new(dims: usize, components: Vec<SignalComponent>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::BadInput("signal dims must be at least 1".into()));
        }
        for c in &components {
            if c.freq.len() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: c.freq.len(),
                });
            }
            if !(c.amplitude.is_finite() && c.amplitude >= 0.0)
                || !c.phase.is_finite()
                || c.freq.iter().any(|f| !f.is_finite())
            {
                return Err(Error::BadInput(
                    "signal components must be finite with amplitude >= 0".into(),
                ));
            }
        }
        Ok(Self { dims, components })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn components(&self) -> &[SignalComponent] {
        &self.components
    }

    /// Closed-form evaluation at one coordinate.
    pub fn evaluate(&self, coord: &[f64]) -> f64 {
        let mut acc = 0.0;
        for c in &self.components {
            let phase: f64 = c.freq.iter().zip(coord).map(|(f, t)| f * t).sum();
            acc += c.amplitude * (std::f64::consts::TAU * phase + c.phase).cos();
        }
        acc
    }
}

/// An axis-aligned exclusion interval for gapped sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct GapInterval {
    pub axis: usize,
    pub lo: f64,
    pub hi: f64,
}

/// How sample locations are laid out.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplingPattern {
    /// Cartesian product of arithmetic sequences `min..=max` by `step`.
    Regular {
        ranges: Vec<(f64, f64)>,
        steps: Vec<f64>,
    },
    /// `n` points uniform in the box, drawn point-major, axis-minor.
    UniformRandom { ranges: Vec<(f64, f64)>, n: usize },
    /// Regular lattice with each coordinate offset by
    /// `(u - 1/2) * jitter * step`, drawn point-major, axis-minor.
    Jittered {
        ranges: Vec<(f64, f64)>,
        steps: Vec<f64>,
        jitter: f64,
    },
    /// A base pattern with points inside the gap intervals removed.
    Gapped {
        base: Box<SamplingPattern>,
        gaps: Vec<GapInterval>,
    },
    /// Two sensors on a rotating mount: rows `(t, z, phi)` with
    /// `phi_1 = omega_out * t` and `phi_2 = phi_1 + pi`, both wrapped to
    /// `[0, 2 pi)`, over a regular `(t, z)` lattice.
    TwoSensor {
        t_range: (f64, f64),
        t_step: f64,
        z_range: (f64, f64),
        z_step: f64,
        omega_out: f64,
    },
}

/// A sampling pattern plus the fraction of points removed as missing and
/// the seed driving locations and mask.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingSpec {
    pub pattern: SamplingPattern,
    pub missing_fraction: f64,
    pub seed: u64,
}

fn axis_count(min: f64, max: f64, step: f64) -> Result<usize> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) || min >= max || step <= 0.0 {
        return Err(Error::BadRange { min, max, step });
    }
    Ok(((max - min) / step + 0.5).floor() as usize + 1)
}

impl SamplingPattern {
    /// Coordinate dimensionality of the pattern.
    pub fn dims(&self) -> usize {
        match self {
            Self::Regular { ranges, .. } | Self::UniformRandom { ranges, .. } => ranges.len(),
            Self::Jittered { ranges, .. } => ranges.len(),
            Self::Gapped { base, .. } => base.dims(),
            Self::TwoSensor { .. } => 3,
        }
    }

    /// Materialize the locations, consuming the location stream.
    fn locations(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        match self {
            Self::Regular { ranges, steps } => regular_lattice(ranges, steps),
            Self::UniformRandom { ranges, n } => {
                if *n == 0 {
                    return Err(Error::BadInput("uniform pattern needs n >= 1".into()));
                }
                for &(min, max) in ranges {
                    if !(min.is_finite() && max.is_finite()) || min >= max {
                        return Err(Error::BadRange {
                            min,
                            max,
                            step: f64::NAN,
                        });
                    }
                }
                let mut coords = Vec::with_capacity(n * ranges.len());
                for _ in 0..*n {
                    for &(min, max) in ranges {
                        coords.push(min + unit_uniform(rng) * (max - min));
                    }
                }
                Ok(coords)
            }
            Self::Jittered {
                ranges,
                steps,
                jitter,
            } => {
                if !(0.0..=1.0).contains(jitter) {
                    return Err(Error::BadInput(format!(
                        "jitter fraction must be in [0, 1], got {jitter}"
                    )));
                }
                let mut coords = regular_lattice(ranges, steps)?;
                let dims = ranges.len();
                for point in coords.chunks_exact_mut(dims) {
                    for (x, &step) in point.iter_mut().zip(steps) {
                        *x += (unit_uniform(rng) - 0.5) * jitter * step;
                    }
                }
                Ok(coords)
            }
            Self::Gapped { base, gaps } => {
                let dims = base.dims();
                for g in gaps {
                    if g.axis >= dims || g.lo >= g.hi {
                        return Err(Error::BadInput(format!(
                            "gap interval [{}, {}] on axis {} is invalid",
                            g.lo, g.hi, g.axis
                        )));
                    }
                }
                let coords = base.locations(rng)?;
                let mut kept = Vec::with_capacity(coords.len());
                for point in coords.chunks_exact(dims) {
                    let in_gap = gaps
                        .iter()
                        .any(|g| point[g.axis] >= g.lo && point[g.axis] <= g.hi);
                    if !in_gap {
                        kept.extend_from_slice(point);
                    }
                }
                Ok(kept)
            }
            Self::TwoSensor {
                t_range,
                t_step,
                z_range,
                z_step,
                omega_out,
            } => {
                if !omega_out.is_finite() {
                    return Err(Error::BadInput("omega_out must be finite".into()));
                }
                let nt = axis_count(t_range.0, t_range.1, *t_step)?;
                let nz = axis_count(z_range.0, z_range.1, *z_step)?;
                let mut coords = Vec::with_capacity(nt * nz * 2 * 3);
                for it in 0..nt {
                    let t = t_range.0 + it as f64 * t_step;
                    let phi1 = (omega_out * t).rem_euclid(std::f64::consts::TAU);
                    let phi2 = (phi1 + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU);
                    for iz in 0..nz {
                        let z = z_range.0 + iz as f64 * z_step;
                        coords.extend_from_slice(&[t, z, phi1]);
                        coords.extend_from_slice(&[t, z, phi2]);
                    }
                }
                Ok(coords)
            }
        }
    }
}

fn regular_lattice(ranges: &[(f64, f64)], steps: &[f64]) -> Result<Vec<f64>> {
    if ranges.len() != steps.len() || ranges.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: ranges.len().max(1),
            found: steps.len(),
        });
    }
    let counts: Vec<usize> = ranges
        .iter()
        .zip(steps)
        .map(|(&(min, max), &step)| axis_count(min, max, step))
        .collect::<Result<_>>()?;
    let dims = ranges.len();
    let total: usize = counts.iter().product();
    let mut coords = Vec::with_capacity(total * dims);
    let mut idx = vec![0usize; dims];
    loop {
        for j in 0..dims {
            coords.push(ranges[j].0 + idx[j] as f64 * steps[j]);
        }
        // odometer, last axis fastest
        let mut j = dims;
        loop {
            if j == 0 {
                return Ok(coords);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < counts[j] {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Generate a sample set: evaluate the signal on the sampling pattern, add
/// `N(0, noise_sigma)` noise from the noise stream of `noise_seed`, then
/// delete a `missing_fraction` share of points uniformly at random.
///
/// Fully deterministic given `(signal, sampling, noise_sigma, noise_seed)`.
/// Survivors keep their generation order.
pub fn generate(
    signal: &SignalSpec,
    sampling: &SamplingSpec,
    noise_sigma: f64,
    noise_seed: u64,
) -> Result<SampleSet> {
    if signal.dims() != sampling.pattern.dims() {
        return Err(Error::DimensionMismatch {
            expected: signal.dims(),
            found: sampling.pattern.dims(),
        });
    }
    if !(0.0..1.0).contains(&sampling.missing_fraction) {
        return Err(Error::BadInput(format!(
            "missing fraction must be in [0, 1), got {}",
            sampling.missing_fraction
        )));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::BadInput(format!(
            "noise sigma must be >= 0, got {noise_sigma}"
        )));
    }

    let dims = signal.dims();
    let mut loc_rng = stream_rng(sampling.seed, STREAM_LOCATIONS);
    let coords = sampling.pattern.locations(&mut loc_rng)?;
    let n_total = coords.len() / dims;
    if n_total == 0 {
        return Err(Error::EmptyAfterFilter);
    }

    let mut noise_rng = stream_rng(noise_seed, STREAM_NOISE);
    let mut values = Vec::with_capacity(n_total);
    for point in coords.chunks_exact(dims) {
        let mut v = signal.evaluate(point);
        if noise_sigma > 0.0 {
            v += noise_sigma * standard_gaussian(&mut noise_rng);
        }
        values.push(v);
    }

    let keep = missing_mask(n_total, sampling.missing_fraction, sampling.seed);
    let mut kept_coords = Vec::with_capacity(coords.len());
    let mut kept_values = Vec::with_capacity(n_total);
    for (i, point) in coords.chunks_exact(dims).enumerate() {
        if keep[i] {
            kept_coords.extend_from_slice(point);
            kept_values.push(values[i]);
        }
    }
    SampleSet::from_flat(dims, kept_coords, kept_values)
}

/// Keep-mask deleting `round(fraction * n)` indices chosen by a partial
/// Fisher-Yates shuffle on the mask stream.
fn missing_mask(n: usize, fraction: f64, seed: u64) -> Vec<bool> {
    let mut keep = vec![true; n];
    let k = (fraction * n as f64).round() as usize;
    if k == 0 {
        return keep;
    }
    let mut rng = stream_rng(seed, STREAM_MASK);
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + (unit_uniform(&mut rng) * (n - i) as f64) as usize;
        indices.swap(i, j.min(n - 1));
        keep[indices[i]] = false;
    }
    keep
}

/// Real part of the traveling-wave ansatz `exp(i(omega t + k z + m phi))`
/// with unit amplitude, sampled on the requested pattern over `(t, z, phi)`
/// coordinates. This is a single plane-wave component with ordinary
/// frequency vector `(omega/2pi, k/2pi, m/2pi)`.
pub fn traveling_wave(
    omega_t: f64,
    k_z: f64,
    m_phi: i64,
    sampling: &SamplingSpec,
) -> Result<SampleSet> {
    let tau = std::f64::consts::TAU;
    let signal = SignalSpec::new(
        3,
        vec![SignalComponent {
            freq: vec![omega_t / tau, k_z / tau, m_phi as f64 / tau],
            amplitude: 1.0,
            phase: 0.0,
        }],
    )?;
    generate(&signal, sampling, 0.0, sampling.seed)
}

/// Named end-to-end scenarios shared by the command-line tool and the test
/// suites.
pub mod presets {
    use super::*;
    use crate::types::{build_regular_grid, FrequencyGrid};

    /// A fully resolved generation scenario.
    pub struct Preset {
        pub name: &'static str,
        pub signal: SignalSpec,
        pub sampling: SamplingSpec,
        pub noise_sigma: f64,
        pub noise_seed: u64,
        /// A grid suited to interactive analysis of this dataset
        /// (ordinary frequencies).
        pub default_grid: FrequencyGrid,
        /// Lattice description when the pattern is regular:
        /// `(origin, spacing, shape)`.
        pub lattice: Option<(Vec<f64>, Vec<f64>, Vec<usize>)>,
    }

    /// Plane wave `cos(2 pi (3.25 x + 6.32 y) + pi/4)` on the 81x81 lattice
    /// over `[-1, 1]^2` with 60% of the points removed.
    pub fn simple_wave(seed: u64) -> Preset {
        Preset {
            name: "simple-wave",
            signal: SignalSpec::new(
                2,
                vec![SignalComponent {
                    freq: vec![3.25, 6.32],
                    amplitude: 1.0,
                    phase: std::f64::consts::FRAC_PI_4,
                }],
            )
            .expect("static spec"),
            sampling: SamplingSpec {
                pattern: SamplingPattern::Regular {
                    ranges: vec![(-1.0, 1.0), (-1.0, 1.0)],
                    steps: vec![0.025, 0.025],
                },
                missing_fraction: 0.6,
                seed,
            },
            noise_sigma: 0.0,
            noise_seed: seed,
            default_grid: build_regular_grid(&[(-10.0, 10.0), (-10.0, 10.0)], &[0.1, 0.1])
                .expect("static grid"),
            lattice: Some((vec![-1.0, -1.0], vec![0.025, 0.025], vec![81, 81])),
        }
    }

    /// 200 pure-noise samples uniform over `t` in `[0, 20]`, sigma = 1.
    pub fn noise_only(seed: u64) -> Preset {
        Preset {
            name: "noise-only",
            signal: SignalSpec::new(1, Vec::new()).expect("static spec"),
            sampling: SamplingSpec {
                pattern: SamplingPattern::UniformRandom {
                    ranges: vec![(0.0, 20.0)],
                    n: 200,
                },
                missing_fraction: 0.0,
                seed,
            },
            noise_sigma: 1.0,
            noise_seed: seed,
            default_grid: build_regular_grid(&[(0.05, 1.2975)], &[0.0025]).expect("static grid"),
            lattice: None,
        }
    }

    /// Traveling wave `Re exp(i(omega t + k z + m phi))` at
    /// `(f, k, m) = (0.009, 20, 1)`, sampled at 4000 random `(t, z, phi)`
    /// locations with 20% of them removed and mild noise.
    pub fn traveling_wave(seed: u64) -> Preset {
        let tau = std::f64::consts::TAU;
        Preset {
            name: "traveling-wave",
            signal: SignalSpec::new(
                3,
                vec![SignalComponent {
                    freq: vec![0.009, 20.0 / tau, 1.0 / tau],
                    amplitude: 1.0,
                    phase: 0.0,
                }],
            )
            .expect("static spec"),
            sampling: SamplingSpec {
                pattern: SamplingPattern::UniformRandom {
                    ranges: vec![(0.0, 400.0), (0.0, 0.75), (0.0, tau)],
                    n: 4000,
                },
                missing_fraction: 0.2,
                seed,
            },
            noise_sigma: 0.1,
            noise_seed: seed,
            default_grid: build_regular_grid(
                &[
                    (0.003, 0.015),
                    (10.0 / tau, 30.0 / tau),
                    (0.0, 2.0 / tau),
                ],
                &[0.003, 5.0 / tau, 1.0 / tau],
            )
            .expect("static grid"),
            lattice: None,
        }
    }

    /// Look up a preset by its command-line name.
    pub fn by_name(name: &str, seed: u64) -> Option<Preset> {
        match name {
            "simple-wave" => Some(simple_wave(seed)),
            "noise-only" => Some(noise_only(seed)),
            "traveling-wave" => Some(traveling_wave(seed)),
            _ => None,
        }
    }
}
