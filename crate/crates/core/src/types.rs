//! Domain data model shared by all modules: samples, frequency grids,
//! spectra, noise specification, validation.
//!
//! Everything here is immutable after construction and safe to share across
//! threads; nothing holds interior mutability.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::math;

/// An irregularly sampled scalar field: `N` samples, each an `m`-dimensional
/// coordinate plus one real value.
///
/// Invariants enforced at construction: at least one sample, every stored
/// coordinate and value finite, every coordinate of length `dims`. Missing
/// values are dropped at ingestion and never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    dims: usize,
    coords: Vec<f64>, // row-major, N x dims
    values: Vec<f64>,
    label: Option<String>,
}

impl SampleSet {
    /// Build a sample set from flat row-major coordinates and values of
    /// equal row count. Rows with a non-finite value are dropped (they
    /// encode missing data); a non-finite coordinate is an error.
    pub fn from_flat(dims: usize, coords: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::BadInput("dims must be at least 1".into()));
        }
        if coords.len() != values.len() * dims {
            return Err(Error::DimensionMismatch {
                expected: values.len() * dims,
                found: coords.len(),
            });
        }
        let mut kept_coords = Vec::with_capacity(coords.len());
        let mut kept_values = Vec::with_capacity(values.len());
        for (row, (&v, c)) in values.iter().zip(coords.chunks_exact(dims)).enumerate() {
            if let Some(&bad) = c.iter().find(|x| !x.is_finite()) {
                debug_assert!(!bad.is_finite());
                return Err(Error::NonFiniteCoordinate { row });
            }
            if !v.is_finite() {
                continue;
            }
            kept_coords.extend_from_slice(c);
            kept_values.push(v);
        }
        if kept_values.is_empty() {
            return Err(Error::EmptyAfterFilter);
        }
        Ok(Self {
            dims,
            coords: kept_coords,
            values: kept_values,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of stored (finite-valued) samples.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coord(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dims..(i + 1) * self.dims]
    }

    pub fn coords(&self) -> impl ExactSizeIterator<Item = &[f64]> + Clone {
        self.coords.chunks_exact(self.dims)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Extent `max - min` of one coordinate axis.
    pub fn extent(&self, axis: usize) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in self.coords() {
            lo = lo.min(c[axis]);
            hi = hi.max(c[axis]);
        }
        hi - lo
    }
}

/// Validate raw `(coordinate, value)` rows into a [`SampleSet`].
///
/// Rows whose value is NaN or infinite are dropped (missing data). Rows with
/// a non-finite coordinate, or coordinate vectors of inconsistent length,
/// are rejected outright.
pub fn validate_samples(rows: impl IntoIterator<Item = (Vec<f64>, f64)>) -> Result<SampleSet> {
    let mut dims = None;
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (coord, value) in rows {
        let d = *dims.get_or_insert(coord.len());
        if coord.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: coord.len(),
            });
        }
        coords.extend_from_slice(&coord);
        values.push(value);
    }
    match dims {
        None | Some(0) => Err(Error::EmptyAfterFilter),
        Some(d) => SampleSet::from_flat(d, coords, values),
    }
}

/// Whether a grid stores ordinary frequencies `f` or angular frequencies
/// `omega = 2*pi*f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrequencyConvention {
    Ordinary,
    Angular,
}

/// One arithmetic frequency axis: `min + i*step` for `i < count`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridAxis {
    min: f64,
    step: f64,
    count: usize,
}

impl GridAxis {
    pub fn new(min: f64, step: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && step.is_finite() && step > 0.0 && count >= 1) {
            return Err(Error::BadRange {
                min,
                max: min + step * count.saturating_sub(1) as f64,
                step,
            });
        }
        Ok(Self { min, step, count })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn value(&self, i: usize) -> f64 {
        debug_assert!(i < self.count);
        self.min + self.step * i as f64
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.value(i))
    }
}

/// An ordered Cartesian product of arithmetic frequency axes.
///
/// Flat indexing runs with the last axis fastest. The stored convention
/// makes the `omega = 2*pi*f` conversion unambiguous: it is applied exactly
/// once, inside [`FrequencyGrid::angular`].
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    convention: FrequencyConvention,
    axes: Vec<GridAxis>,
}

impl FrequencyGrid {
    pub fn new(convention: FrequencyConvention, axes: Vec<GridAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::BadInput("frequency grid needs at least one axis".into()));
        }
        Ok(Self { convention, axes })
    }

    pub fn convention(&self) -> FrequencyConvention {
        self.convention
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    /// Total number of grid points (product of axis counts).
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self, j: usize) -> &GridAxis {
        &self.axes[j]
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    /// Per-axis resolution in the stored convention.
    pub fn spacing(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.step()).collect()
    }

    /// Decode a flat index into per-axis indices (last axis fastest).
    pub fn decode(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dims()];
        let mut rem = flat;
        for (j, axis) in self.axes.iter().enumerate().rev() {
            idx[j] = rem % axis.count();
            rem /= axis.count();
        }
        idx
    }

    /// Frequency vector at a flat index, in the stored convention.
    pub fn freq(&self, flat: usize) -> Vec<f64> {
        self.decode(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.value(i))
            .collect()
    }

    /// Angular frequency vector at a flat index.
    pub fn angular(&self, flat: usize) -> Vec<f64> {
        let mut f = self.freq(flat);
        if self.convention == FrequencyConvention::Ordinary {
            for x in &mut f {
                *x *= TAU;
            }
        }
        f
    }

    /// Convert a vector in the stored convention to angular units.
    pub fn to_angular(&self, freq: &[f64]) -> Vec<f64> {
        match self.convention {
            FrequencyConvention::Angular => freq.to_vec(),
            FrequencyConvention::Ordinary => freq.iter().map(|f| f * TAU).collect(),
        }
    }

    /// Convert a vector in the stored convention to ordinary units.
    pub fn to_ordinary(&self, freq: &[f64]) -> Vec<f64> {
        match self.convention {
            FrequencyConvention::Ordinary => freq.to_vec(),
            FrequencyConvention::Angular => freq.iter().map(|f| f / TAU).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|k| self.freq(k))
    }
}

/// Build a regular grid of ordinary frequencies from per-axis `(min, max)`
/// ranges and step sizes. Endpoints are included when they land within half
/// a step of the range maximum.
pub fn build_regular_grid(ranges: &[(f64, f64)], steps: &[f64]) -> Result<FrequencyGrid> {
    build_regular_grid_with(FrequencyConvention::Ordinary, ranges, steps)
}

/// [`build_regular_grid`] with an explicit frequency convention.
pub fn build_regular_grid_with(
    convention: FrequencyConvention,
    ranges: &[(f64, f64)],
    steps: &[f64],
) -> Result<FrequencyGrid> {
    if ranges.len() != steps.len() {
        return Err(Error::DimensionMismatch {
            expected: ranges.len(),
            found: steps.len(),
        });
    }
    let mut axes = Vec::with_capacity(ranges.len());
    for (&(min, max), &step) in ranges.iter().zip(steps) {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) || min >= max || step <= 0.0 {
            return Err(Error::BadRange { min, max, step });
        }
        let count = ((max - min) / step + 0.5).floor() as usize + 1;
        axes.push(GridAxis::new(min, step, count)?);
    }
    FrequencyGrid::new(convention, axes)
}

/// Which coefficient denominators collapsed at a grid point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DegeneracyFlags {
    /// `sum cos^2` fell below the floor; `a` was reported as 0.
    pub cos: bool,
    /// `sum sin^2` fell below the floor; `b` was reported as 0.
    pub sin: bool,
}

impl DegeneracyFlags {
    pub fn any(&self) -> bool {
        self.cos || self.sin
    }
}

/// Per-frequency estimation record.
///
/// `phase` is the four-quadrant `atan2(b, a)`, i.e. the phase of the fitted
/// component relative to the tau-shifted basis. Use
/// [`SpectrumPoint::signal_phase`] for the phase `phi0` of the equivalent
/// `A*cos(omega.t + phi0)` form.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumPoint {
    /// Frequency vector, in the convention recorded by the parent spectrum.
    pub freq: Vec<f64>,
    /// Phase shift `tau*` restoring sine/cosine orthogonality, radians.
    pub tau_star: f64,
    pub a: f64,
    pub b: f64,
    /// `sqrt(a^2 + b^2)`.
    pub amplitude: f64,
    /// `atan2(b, a)`, in `(-pi, pi]`.
    pub phase: f64,
    /// Standardized power spectral density, clipped to `[0, 1]`.
    pub psd: f64,
    /// Single-trial exceedance probability; absent when `N < 4`.
    pub prob_exceed: Option<f64>,
    /// False alarm probability; absent when no independent-frequency count
    /// is available.
    pub fap: Option<f64>,
    pub flags: DegeneracyFlags,
}

impl SpectrumPoint {
    /// Phase `phi0` of the fitted component written as
    /// `A*cos(omega.t + phi0)`, wrapped to `(-pi, pi]`.
    pub fn signal_phase(&self) -> f64 {
        math::wrap_angle(-(self.phase + self.tau_star))
    }
}

/// A full spectrum: one [`SpectrumPoint`] per grid frequency plus the grid
/// and normalization metadata the points were computed under.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub convention: FrequencyConvention,
    pub dims: usize,
    /// Per-axis grid resolution, in the stored convention.
    pub spacing: Vec<f64>,
    /// Number of samples that entered the analysis.
    pub n_samples: usize,
    /// Independent-frequency count used for the FAP column, if any.
    pub m_indep: Option<f64>,
    /// Biased variance of the sample values used for standardization.
    pub sigma0_sq: f64,
    pub points: Vec<SpectrumPoint>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The point with maximal psd (first such point on exact ties, so the
    /// result is deterministic).
    pub fn peak(&self) -> Option<&SpectrumPoint> {
        self.points
            .iter()
            .fold(None, |best: Option<&SpectrumPoint>, p| match best {
                Some(b) if b.psd >= p.psd => Some(b),
                _ => Some(p),
            })
    }

    /// Points sorted by descending psd (stable; ties keep grid order).
    pub fn ranked(&self) -> Vec<&SpectrumPoint> {
        let mut v: Vec<&SpectrumPoint> = self.points.iter().collect();
        v.sort_by(|x, y| y.psd.partial_cmp(&x.psd).unwrap_or(std::cmp::Ordering::Equal));
        v
    }
}

/// Noise model: standard deviation, significance level, and the matching
/// standard-normal quantile `Phi_{1-alpha}`, precomputed at construction.
///
/// The quantile is the one pairing a two-sided `(1-alpha)` confidence
/// interval, `Phi^{-1}(1 - alpha/2)`: alpha = 0.05 stores 1.959964.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    sigma: f64,
    alpha: f64,
    quantile: f64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, alpha: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::BadInput(format!("sigma must be >= 0, got {sigma}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::BadInput(format!("alpha must be in (0, 1), got {alpha}")));
        }
        Ok(Self {
            sigma,
            alpha,
            quantile: math::normal_quantile(1.0 - alpha / 2.0),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `Phi^{-1}(1 - alpha/2)`, the two-sided `(1-alpha)` quantile.
    pub fn quantile(&self) -> f64 {
        self.quantile
    }
}

/// Analytic error bounds for a 1-D observation window: the quadrature
/// demodulation truncation and random errors, and the least-squares bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBudget {
    /// Relative truncation-error bound, in `[0, 0.2]`.
    pub eps_t: f64,
    /// Random-error bound of quadrature demodulation, signal units.
    pub eps_fs: f64,
    /// Least-squares error bound, signal units. Always `<= eps_fs`.
    pub eps_ls: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_drops_nan_valued_rows() {
        let set = validate_samples(vec![
            (vec![0.0, 0.0], 1.0),
            (vec![0.0, 1.0], f64::NAN),
            (vec![1.0, 0.0], -1.0),
        ])
        .unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.dims(), 2);
        assert_eq!(set.values(), &[1.0, -1.0]);
        assert_eq!(set.coord(1), &[1.0, 0.0]);
    }

    #[test]
    fn validate_rejects_empty_input() {
        assert!(matches!(
            validate_samples(Vec::new()),
            Err(Error::EmptyAfterFilter)
        ));
    }

    #[test]
    fn validate_rejects_all_missing() {
        assert!(matches!(
            validate_samples(vec![(vec![0.0], f64::NAN)]),
            Err(Error::EmptyAfterFilter)
        ));
    }

    #[test]
    fn validate_rejects_ragged_rows() {
        assert!(matches!(
            validate_samples(vec![(vec![0.0, 1.0], 1.0), (vec![0.0], 2.0)]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn validate_rejects_non_finite_coordinates() {
        assert!(matches!(
            validate_samples(vec![(vec![f64::INFINITY], 1.0)]),
            Err(Error::NonFiniteCoordinate { row: 0 })
        ));
    }

    #[test]
    fn infinite_values_count_as_missing() {
        let set = validate_samples(vec![
            (vec![0.0], f64::INFINITY),
            (vec![1.0], 2.0),
        ])
        .unwrap();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn regular_grid_inclusive_endpoints() {
        let g = build_regular_grid(&[(0.0, 1.0)], &[0.5]).unwrap();
        let vals: Vec<f64> = g.axis(0).values().collect();
        assert_eq!(vals, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn regular_grid_simple_wave_size() {
        let g = build_regular_grid(&[(-10.0, 10.0), (-10.0, 10.0)], &[0.025, 0.025]).unwrap();
        assert_eq!(g.axis(0).count(), 801);
        assert_eq!(g.len(), 801 * 801);
    }

    #[test]
    fn regular_grid_rejects_reversed_range() {
        assert!(matches!(
            build_regular_grid(&[(0.0, -1.0)], &[0.1]),
            Err(Error::BadRange { .. })
        ));
        assert!(matches!(
            build_regular_grid(&[(0.0, 1.0)], &[0.0]),
            Err(Error::BadRange { .. })
        ));
    }

    #[test]
    fn grid_flat_indexing_is_last_axis_fastest() {
        let g = build_regular_grid(&[(0.0, 1.0), (0.0, 2.0)], &[1.0, 1.0]).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.freq(0), vec![0.0, 0.0]);
        assert_eq!(g.freq(1), vec![0.0, 1.0]);
        assert_eq!(g.freq(3), vec![1.0, 0.0]);
    }

    #[test]
    fn angular_conversion_applied_once() {
        let g = build_regular_grid(&[(1.0, 2.0)], &[1.0]).unwrap();
        assert_eq!(g.angular(1), vec![2.0 * TAU]);
        let ga =
            build_regular_grid_with(FrequencyConvention::Angular, &[(1.0, 2.0)], &[1.0]).unwrap();
        assert_eq!(ga.angular(1), vec![2.0]);
    }

    #[test]
    fn noise_spec_quantile_precomputed() {
        let ns = NoiseSpec::new(1.0, 0.05).unwrap();
        assert!((ns.quantile() - 1.959_963_984_540_054_4).abs() < 1e-12);
        assert!(NoiseSpec::new(-1.0, 0.05).is_err());
        assert!(NoiseSpec::new(1.0, 0.0).is_err());
        assert!(NoiseSpec::new(1.0, 1.0).is_err());
    }

    #[test]
    fn signal_phase_inverts_basis_phase() {
        let p = SpectrumPoint {
            freq: vec![1.0],
            tau_star: 0.3,
            a: 1.0,
            b: 0.0,
            amplitude: 1.0,
            phase: 0.0,
            psd: 1.0,
            prob_exceed: None,
            fap: None,
            flags: DegeneracyFlags::default(),
        };
        // fitted = cos(omega t - tau - 0) = cos(omega t + phi0), phi0 = -tau
        assert!((p.signal_phase() + 0.3).abs() < 1e-15);
    }
}
