//! Comparison methods: quadrature demodulation (the discrete orthogonal
//! mode decomposition that classical Fourier analysis rests on), its
//! analytic error budget, and a zero-padded DFT power spectrum for gridded
//! data with missing cells.
//!
//! These are kept deliberately plain. Quadrature demodulation projects onto
//! unshifted sine/cosine and is exact only when the observation window
//! holds an integer number of half-periods; its truncation error is the
//! systematic defect the least-squares estimator removes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::CompensatedSum;
use crate::stats;
use crate::types::{
    DegeneracyFlags, ErrorBudget, FrequencyConvention, FrequencyGrid, GridAxis, NoiseSpec,
    SampleSet, Spectrum, SpectrumPoint,
};

/// Grid points per parallel work unit for the DFT; fixed for determinism.
const DFT_CHUNK: usize = 256;

/// A dense rectangular field with non-finite entries marking missing data.
///
/// Flat storage is row-major with the last index fastest. `n_zero` counts
/// the missing cells that zero padding will fill.
#[derive(Clone, Debug, PartialEq)]
pub struct GriddedField {
    shape: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    values: Vec<f64>,
    n_zero: usize,
}

impl GriddedField {
    pub fn new(
        shape: Vec<usize>,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let dims = shape.len();
        if dims == 0 || origin.len() != dims || spacing.len() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims.max(1),
                found: origin.len().min(spacing.len()),
            });
        }
        if shape.contains(&0) {
            return Err(Error::BadInput("field shape axis of zero length".into()));
        }
        let total: usize = shape.iter().product();
        if values.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: values.len(),
            });
        }
        for (&o, &d) in origin.iter().zip(&spacing) {
            if !o.is_finite() || !(d.is_finite() && d > 0.0) {
                return Err(Error::BadInput(format!(
                    "field origin/spacing must be finite with spacing > 0, got {o}/{d}"
                )));
            }
        }
        let n_zero = values.iter().filter(|v| !v.is_finite()).count();
        Ok(Self {
            shape,
            origin,
            spacing,
            values,
            n_zero,
        })
    }

    /// Scatter samples whose coordinates lie on the described lattice into
    /// a field, with missing cells left NaN. A coordinate further than
    /// `1e-9 * spacing` from its lattice point, an out-of-range index, or
    /// two samples in one cell yield [`Error::GridMismatch`].
    pub fn from_samples_on_grid(
        samples: &SampleSet,
        origin: &[f64],
        spacing: &[f64],
        shape: &[usize],
    ) -> Result<Self> {
        if samples.dims() != shape.len() {
            return Err(Error::DimensionMismatch {
                expected: shape.len(),
                found: samples.dims(),
            });
        }
        let total: usize = shape.iter().product();
        let mut values = vec![f64::NAN; total];
        for (coord, &v) in samples.coords().zip(samples.values()) {
            let mut flat = 0usize;
            for j in 0..shape.len() {
                let idx = ((coord[j] - origin[j]) / spacing[j]).round();
                if idx < 0.0 || idx >= shape[j] as f64 {
                    return Err(Error::GridMismatch);
                }
                if (coord[j] - (origin[j] + idx * spacing[j])).abs() > 1e-9 * spacing[j] {
                    return Err(Error::GridMismatch);
                }
                flat = flat * shape[j] + idx as usize;
            }
            if values[flat].is_finite() {
                return Err(Error::GridMismatch); // duplicate cell
            }
            values[flat] = v;
        }
        Self::new(shape.to_vec(), origin.to_vec(), spacing.to_vec(), values)
    }

    pub fn dims(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Count of missing (non-finite) cells.
    pub fn n_zero(&self) -> usize {
        self.n_zero
    }

    pub fn n_total(&self) -> usize {
        self.values.len()
    }

    /// Coordinate vector of a flat cell index.
    pub fn coordinate(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0usize; self.dims()];
        let mut rem = flat;
        for j in (0..self.dims()).rev() {
            idx[j] = rem % self.shape[j];
            rem /= self.shape[j];
        }
        idx.iter()
            .enumerate()
            .map(|(j, &i)| self.origin[j] + i as f64 * self.spacing[j])
            .collect()
    }
}

/// Quadrature demodulation of the samples at the angular frequency `omega`:
///
/// ```text
/// a = 2/N sum_n v_n cos(omega.t_n)      b = 2/N sum_n v_n sin(omega.t_n)
/// ```
///
/// No phase shift, no denominator normalization. Exact only when the
/// observation window holds integer half-periods; otherwise biased by the
/// truncation error, independently of how densely the window is sampled.
pub fn quadrature_demod(samples: &SampleSet, omega: &[f64]) -> Result<(f64, f64)> {
    if omega.len() != samples.dims() {
        return Err(Error::DimensionMismatch {
            expected: samples.dims(),
            found: omega.len(),
        });
    }
    let mut sum_c = CompensatedSum::new();
    let mut sum_s = CompensatedSum::new();
    for (coord, &v) in samples.coords().zip(samples.values()) {
        let phase: f64 = omega.iter().zip(coord).map(|(w, t)| w * t).sum();
        let (s, c) = phase.sin_cos();
        sum_c.add(v * c);
        sum_s.add(v * s);
    }
    let scale = 2.0 / samples.len() as f64;
    Ok((scale * sum_c.value(), scale * sum_s.value()))
}

/// Analytic 1-D error budget for an observation window of length `t` at
/// angular frequency `omega` with `n` samples.
///
/// * `eps_t`: relative truncation bound `min_i |t - pi*i/omega| / t`,
///   capped at 0.2 (the empirical maximum of the truncation term).
/// * `eps_fs`: quadrature-demodulation random error
///   `Phi_{1-alpha} * 2 sigma / sqrt(N)`.
/// * `eps_ls`: least-squares error `(4/pi) * Phi_{1-alpha} * sigma / sqrt(N)`,
///   always below `eps_fs`.
pub fn omd_error_budget(t: f64, omega: f64, n: usize, noise: &NoiseSpec) -> Result<ErrorBudget> {
    if !(t > 0.0 && t.is_finite()) || !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::BadInput(format!(
            "window length and frequency must be positive, got t={t}, omega={omega}"
        )));
    }
    if n == 0 {
        return Err(Error::BadN {
            n,
            why: "error budget needs at least one sample",
        });
    }
    let half_period = std::f64::consts::PI / omega;
    let i_near = (t / half_period).round().max(1.0);
    let delta_phi = (t - i_near * half_period)
        .abs()
        .min((t - (i_near + 1.0) * half_period).abs());
    let eps_t = (delta_phi / t).min(0.2);
    let sqrt_n = (n as f64).sqrt();
    let eps_fs = noise.quantile() * 2.0 * noise.sigma() / sqrt_n;
    let eps_ls = 4.0 / std::f64::consts::PI * noise.quantile() * noise.sigma() / sqrt_n;
    Ok(ErrorBudget {
        eps_t,
        eps_fs,
        eps_ls,
    })
}

/// Scan the noise-projection ratio `4 sin(beta) / (2 beta + sin(2 beta))`
/// over `beta` in `(0, 2 pi]` and return `(beta_star, e_max)` at its
/// maximum. Analytically the maximum is `4/pi` at `beta = pi/2`.
///
/// `resolution` is the number of scan points; at least 1000 is required
/// for the advertised accuracy.
pub fn emax_scan(resolution: usize) -> (f64, f64) {
    assert!(resolution >= 1000, "emax_scan needs resolution >= 1000");
    let step = std::f64::consts::TAU / resolution as f64;
    let mut best_beta = step;
    let mut best = f64::NEG_INFINITY;
    for i in 1..=resolution {
        let beta = i as f64 * step;
        let e = noise_projection_ratio(beta);
        if e > best {
            best = e;
            best_beta = beta;
        }
    }
    (best_beta, best)
}

/// The scanned ratio itself, for direct evaluation at chosen points.
pub fn noise_projection_ratio(beta: f64) -> f64 {
    4.0 * beta.sin() / (2.0 * beta + (2.0 * beta).sin())
}

/// Zero-padded DFT power spectrum of a gridded field.
///
/// Missing cells are replaced by zeros, the multidimensional transform is
/// evaluated directly (no fast transform; adequate at desk scale), and the
/// standardized psd is rescaled by the valid-cell fraction:
///
/// ```text
/// psd_ft = N/(N-1) * 1/(2 sigma0^2) * ( 2|F| / (1 - N_zero/N) )^2
/// ```
///
/// where `N` counts all grid cells, `sigma0^2` is the biased variance of
/// the finite values only, and `F` is the transform divided by `N` so a
/// unit-amplitude on-bin cosine gives `|F| = 1/2`. The output grid is the
/// natural DFT grid implied by the field's extent and spacing (ordinary
/// frequencies `j / (count * spacing)` with `j` centered on zero); psd is
/// clipped to `[0, 1]` like the least-squares spectrum, and the false-alarm
/// columns are left empty. `n_samples` in the result is the total cell
/// count `N` of the formula above.
pub fn zero_padded_dft_psd(field: &GriddedField) -> Result<Spectrum> {
    let finite: Vec<(Vec<f64>, f64)> = (0..field.n_total())
        .filter(|&i| field.values()[i].is_finite())
        .map(|i| (field.coordinate(i), field.values()[i]))
        .collect();
    if finite.is_empty() {
        return Err(Error::AllMissing);
    }
    let finite_values: Vec<f64> = finite.iter().map(|&(_, v)| v).collect();
    let sigma0_sq = crate::math::variance_biased(&finite_values);
    if sigma0_sq == 0.0 {
        return Err(Error::ZeroVariance);
    }

    let n_total = field.n_total();
    let valid_fraction = 1.0 - field.n_zero() as f64 / n_total as f64;
    let axes: Vec<GridAxis> = field
        .shape()
        .iter()
        .zip(field.spacing())
        .map(|(&count, &d)| {
            let step = 1.0 / (count as f64 * d);
            let min = -((count / 2) as f64) * step;
            GridAxis::new(min, step, count).expect("valid dft axis")
        })
        .collect();
    let grid = FrequencyGrid::new(FrequencyConvention::Ordinary, axes)?;

    let total = grid.len();
    let chunks: Vec<(usize, usize)> = (0..total)
        .step_by(DFT_CHUNK)
        .map(|s| (s, (s + DFT_CHUNK).min(total)))
        .collect();
    let points: Vec<Vec<SpectrumPoint>> = chunks
        .par_iter()
        .map(|&(start, end)| {
            (start..end)
                .map(|k| {
                    let omega = grid.angular(k);
                    let mut re = CompensatedSum::new();
                    let mut im = CompensatedSum::new();
                    for (coord, v) in &finite {
                        let phase: f64 = omega.iter().zip(coord).map(|(w, x)| w * x).sum();
                        let (s, c) = phase.sin_cos();
                        re.add(v * c);
                        im.add(v * s);
                    }
                    let f_re = re.value() / n_total as f64;
                    let f_im = im.value() / n_total as f64;
                    let a = 2.0 * f_re / valid_fraction;
                    let b = 2.0 * f_im / valid_fraction;
                    let amplitude = a.hypot(b);
                    let psd = stats::psd_from_amplitude(amplitude, sigma0_sq, n_total);
                    SpectrumPoint {
                        freq: grid.freq(k),
                        tau_star: 0.0,
                        a,
                        b,
                        amplitude,
                        phase: b.atan2(a),
                        psd,
                        prob_exceed: None,
                        fap: None,
                        flags: DegeneracyFlags::default(),
                    }
                })
                .collect()
        })
        .collect();

    Ok(Spectrum {
        convention: FrequencyConvention::Ordinary,
        dims: field.dims(),
        spacing: grid.spacing(),
        n_samples: n_total,
        m_indep: None,
        sigma0_sq,
        points: points.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsm;
    use crate::types::validate_samples;
    use std::f64::consts::{PI, TAU};

    fn equidistant_cos(omega: f64, t_total: f64, n: usize) -> SampleSet {
        // half-open sampling t_n = n * T / N, matching N = T / T_s
        let rows: Vec<(Vec<f64>, f64)> = (0..n)
            .map(|i| {
                let t = i as f64 * t_total / n as f64;
                (vec![t], (omega * t).cos())
            })
            .collect();
        validate_samples(rows).unwrap()
    }

    #[test]
    fn demod_exact_on_integer_period_window() {
        let samples = equidistant_cos(1.0, TAU, 64);
        let (a, b) = quadrature_demod(&samples, &[1.0]).unwrap();
        assert!((a - 1.0).abs() < 1e-12, "a = {a}");
        assert!(b.abs() < 1e-12);
    }

    #[test]
    fn demod_truncation_bias_on_fractional_window() {
        // window 2*pi + pi/5 at omega = 1: the classic truncated-period setup
        let samples = equidistant_cos(1.0, TAU + PI / 5.0, 23);
        let (a, _) = quadrature_demod(&samples, &[1.0]).unwrap();
        assert!((a - 1.0).abs() > 0.01, "a = {a}");
        assert!((a - 1.0).abs() < 0.2);
    }

    #[test]
    fn demod_truncation_bias_independent_of_sample_count() {
        let t_total = TAU + PI / 5.0;
        let (a50, _) = quadrature_demod(&equidistant_cos(1.0, t_total, 50), &[1.0]).unwrap();
        let (a100, _) = quadrature_demod(&equidistant_cos(1.0, t_total, 100), &[1.0]).unwrap();
        let err50 = (a50 - 1.0).abs();
        let err100 = (a100 - 1.0).abs();
        assert!(err50 > 0.01 && err100 > 0.01);
        assert!((err100 - err50).abs() < 0.1 * err50, "{err50} vs {err100}");
    }

    #[test]
    fn error_budget_zero_truncation_on_half_period_multiples() {
        let noise = NoiseSpec::new(1.0, 0.05).unwrap();
        let budget = omd_error_budget(3.0 * PI, 1.0, 100, &noise).unwrap();
        assert!(budget.eps_t < 1e-15);
    }

    #[test]
    fn error_budget_caps_at_worst_case() {
        let noise = NoiseSpec::new(1.0, 0.05).unwrap();
        // mid-branch between half-period multiples: delta_phi/t = 1/3, capped
        let budget = omd_error_budget(1.5 * PI, 1.0, 100, &noise).unwrap();
        assert_eq!(budget.eps_t, 0.2);
    }

    #[test]
    fn error_budget_random_error_values() {
        let noise = NoiseSpec::new(1.0, 0.05).unwrap();
        let budget = omd_error_budget(TAU, 1.0, 100, &noise).unwrap();
        assert!((budget.eps_fs - 0.39199).abs() < 1e-5, "{}", budget.eps_fs);
        assert!((budget.eps_ls - 0.24955).abs() < 1e-5, "{}", budget.eps_ls);
        assert!(budget.eps_ls < budget.eps_fs);
    }

    #[test]
    fn error_budget_rejects_bad_window() {
        let noise = NoiseSpec::new(1.0, 0.05).unwrap();
        assert!(omd_error_budget(0.0, 1.0, 10, &noise).is_err());
        assert!(omd_error_budget(1.0, -1.0, 10, &noise).is_err());
    }

    #[test]
    fn emax_scan_finds_four_over_pi() {
        let (beta, e) = emax_scan(1_000_000);
        assert!((beta - PI / 2.0).abs() < 1e-5, "beta = {beta}");
        assert!((e - 4.0 / PI).abs() < 1e-9, "e = {e}");
    }

    #[test]
    fn emax_scan_stable_under_refinement() {
        let (b1, e1) = emax_scan(10_000);
        let (b2, e2) = emax_scan(100_000);
        assert!((b1 - b2).abs() < 1e-3);
        assert!((e1 - e2).abs() < 1e-6);
    }

    #[test]
    fn projection_ratio_closed_form_points() {
        assert!((noise_projection_ratio(PI / 2.0) - 4.0 / PI).abs() < 1e-15);
        assert!(noise_projection_ratio(TAU).abs() < 1e-15);
    }

    #[test]
    fn dft_matches_lsm_on_complete_integer_frequency_grid() {
        // unit cosine with exactly 4 periods across 32 cells, no missing data
        let n = 32usize;
        let d = 1.0 / n as f64;
        let f0 = 4.0;
        let values: Vec<f64> = (0..n).map(|i| (TAU * f0 * i as f64 * d).cos()).collect();
        let field = GriddedField::new(vec![n], vec![0.0], vec![d], values.clone()).unwrap();
        let dft = zero_padded_dft_psd(&field).unwrap();

        let rows: Vec<(Vec<f64>, f64)> = (0..n)
            .map(|i| (vec![i as f64 * d], values[i]))
            .collect();
        let samples = validate_samples(rows).unwrap();
        let noise = NoiseSpec::new(0.0, 0.05).unwrap();
        let grid = FrequencyGrid::new(
            FrequencyConvention::Ordinary,
            dft.points
                .first()
                .map(|_| {
                    vec![GridAxis::new(
                        -((n / 2) as f64) * (1.0 / (n as f64 * d)),
                        1.0 / (n as f64 * d),
                        n,
                    )
                    .unwrap()]
                })
                .unwrap(),
        )
        .unwrap();
        let lsm_spec = lsm::analyze(&samples, &grid, &noise).unwrap();

        let peak_dft = dft.peak().unwrap();
        let peak_lsm = lsm_spec.peak().unwrap();
        assert_eq!(peak_dft.freq[0], peak_lsm.freq[0]);
        assert!(
            (peak_dft.psd - peak_lsm.psd).abs() < 1e-6 * peak_lsm.psd,
            "{} vs {}",
            peak_dft.psd,
            peak_lsm.psd
        );
        // off-peak bins agree too: both estimators are exact here
        for (pd, pl) in dft.points.iter().zip(&lsm_spec.points) {
            assert!((pd.psd - pl.psd).abs() < 1e-9);
        }
    }

    #[test]
    fn dft_rejects_all_missing_fields() {
        let field =
            GriddedField::new(vec![4], vec![0.0], vec![1.0], vec![f64::NAN; 4]).unwrap();
        assert!(matches!(zero_padded_dft_psd(&field), Err(Error::AllMissing)));
    }

    #[test]
    fn field_from_samples_round_trip() {
        let rows = vec![
            (vec![0.0, 0.0], 1.0),
            (vec![0.0, 0.5], 2.0),
            (vec![1.0, 1.0], 3.0),
        ];
        let samples = validate_samples(rows).unwrap();
        let field = GriddedField::from_samples_on_grid(
            &samples,
            &[0.0, 0.0],
            &[0.5, 0.5],
            &[3, 3],
        )
        .unwrap();
        assert_eq!(field.n_total(), 9);
        assert_eq!(field.n_zero(), 6);
        assert_eq!(field.values()[0], 1.0);
        assert_eq!(field.values()[1], 2.0);
        assert_eq!(field.values()[8], 3.0);
    }

    #[test]
    fn field_from_samples_rejects_off_lattice_points() {
        let samples = validate_samples(vec![(vec![0.26], 1.0)]).unwrap();
        assert!(matches!(
            GriddedField::from_samples_on_grid(&samples, &[0.0], &[0.5], &[3]),
            Err(Error::GridMismatch)
        ));
    }
}
