//! Statistical layer on top of the fitted coefficients: standardized power
//! spectral density, exceedance probability, false alarm probability,
//! independent-frequency count, and signal-to-noise measures.

use crate::error::{Error, Result};
use crate::math::{variance_biased, CompensatedSum};
use crate::types::SampleSet;

/// Signal-to-noise summary for a fitted model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrReport {
    /// Residual RMS, the per-sample noise scale estimate.
    pub sigma_sample: f64,
    /// Ratio of total significant amplitude to the residual RMS. Infinite
    /// when the residuals vanish.
    pub snr: f64,
    /// Frequency uncertainty `delta_f * sqrt(2 / (N * snr^2))`, in the
    /// units of `delta_f`.
    pub sigma_f: f64,
}

/// Standardized power spectral density of a coefficient pair against the
/// sample values:
///
/// ```text
/// psd = N/(N-1) * (a^2 + b^2) / (2 sigma0^2)
/// ```
///
/// with `sigma0^2` the biased variance of the values. The result is clipped
/// to `[0, 1]`; 1 marks a perfect sinusoidal fit, and pure Gaussian noise
/// sits near `2/(N-1)` on average.
pub fn standardized_psd(a: f64, b: f64, values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::BadN {
            n,
            why: "standardized psd needs at least two samples",
        });
    }
    let sigma0_sq = variance_biased(values);
    if sigma0_sq == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(psd_from_amplitude(a.hypot(b), sigma0_sq, n))
}

/// Clipped psd from a precomputed amplitude and variance.
pub(crate) fn psd_from_amplitude(amplitude: f64, sigma0_sq: f64, n: usize) -> f64 {
    let n = n as f64;
    let raw = n / (n - 1.0) * amplitude * amplitude / (2.0 * sigma0_sq);
    raw.clamp(0.0, 1.0)
}

/// Probability that pure noise produces no peak above the observed
/// standardized psd at a single frequency: `(1 - psd)^((N-3)/2)`.
///
/// Requires `N >= 4` so the exponent exceeds 1/2; the input is clamped to
/// `[0, 1]` in line with the psd clipping.
pub fn prob_exceed(psd: f64, n: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::BadN {
            n,
            why: "exceedance probability needs at least four samples",
        });
    }
    let p = psd.clamp(0.0, 1.0);
    Ok((1.0 - p).powf((n as f64 - 3.0) / 2.0))
}

/// Empirical independent-frequency count of Horne & Baliunas (1986):
///
/// ```text
/// M = -6.362 + 1.193 N + 0.00098 N^2
/// ```
///
/// Returned as a real, unrounded. Errors when the polynomial is not
/// positive (N < 6).
pub fn independent_frequencies(n: usize) -> Result<f64> {
    let n_f = n as f64;
    let m = -6.362 + 1.193 * n_f + 0.00098 * n_f * n_f;
    if m <= 0.0 {
        return Err(Error::BadN {
            n,
            why: "independent-frequency polynomial is nonpositive",
        });
    }
    Ok(m)
}

/// False alarm probability of a single-trial exceedance probability `prob`
/// among `m` independent frequencies: `1 - (1 - prob)^m`.
///
/// Evaluated stably through `log1p`/`expm1`, which reproduces both the
/// `m*prob` small-probability regime and the saturation regime without a
/// branch. `m == 1` returns `prob` unchanged so the collapse is exact in
/// output files. The result is clipped to `[0, 1]`.
pub fn false_alarm_probability(prob: f64, m: f64) -> f64 {
    debug_assert!(m > 0.0);
    let p = prob.clamp(0.0, 1.0);
    if m == 1.0 {
        return p;
    }
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    (-f64::exp_m1(m * f64::ln_1p(-p))).clamp(0.0, 1.0)
}

/// Signal-to-noise ratio and frequency uncertainty of a fitted model.
///
/// `model_values` is the fitted model evaluated at the sample coordinates;
/// `significant_amplitudes` the amplitudes counted as signal; `delta_f` the
/// frequency resolution of the grid. Zero residuals return the infinite-SNR
/// marker with `sigma_f = 0`.
pub fn snr_and_sigma_f(
    samples: &SampleSet,
    model_values: &[f64],
    significant_amplitudes: &[f64],
    delta_f: f64,
) -> Result<SnrReport> {
    if model_values.len() != samples.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            found: model_values.len(),
        });
    }
    if !(delta_f > 0.0 && delta_f.is_finite()) {
        return Err(Error::BadInput(format!(
            "delta_f must be positive, got {delta_f}"
        )));
    }
    let n = samples.len() as f64;
    let mut resid = CompensatedSum::new();
    for (&v, &y) in samples.values().iter().zip(model_values) {
        let e = v - y;
        resid.add(e * e);
    }
    let mean_sq_resid = resid.value() / n;
    let amp_sq: f64 = {
        let mut acc = CompensatedSum::new();
        for &a in significant_amplitudes {
            acc.add(a * a);
        }
        acc.value()
    };
    if mean_sq_resid == 0.0 {
        return Ok(SnrReport {
            sigma_sample: 0.0,
            snr: f64::INFINITY,
            sigma_f: 0.0,
        });
    }
    let sigma_sample = mean_sq_resid.sqrt();
    let snr = amp_sq.sqrt() / sigma_sample;
    let sigma_f = delta_f * (2.0 / (n * snr * snr)).sqrt();
    Ok(SnrReport {
        sigma_sample,
        snr,
        sigma_f,
    })
}

/// Alternative SNR form for when per-sample uncertainties are available:
///
/// ```text
/// snr = sqrt( 1/N sum_n ((v_n - y_n) / sigma_n)^2 )
/// ```
///
/// with `sigma_sample = sqrt(1/N sum sigma_n^2)` and the same frequency
/// uncertainty `delta_f * sqrt(2 / (N snr^2))`. [`snr_and_sigma_f`] is the
/// amplitude-ratio form used when only residuals are available.
pub fn snr_with_sample_sigmas(
    samples: &SampleSet,
    model_values: &[f64],
    sample_sigmas: &[f64],
    delta_f: f64,
) -> Result<SnrReport> {
    if model_values.len() != samples.len() || sample_sigmas.len() != samples.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            found: model_values.len().min(sample_sigmas.len()),
        });
    }
    if !(delta_f > 0.0 && delta_f.is_finite()) {
        return Err(Error::BadInput(format!(
            "delta_f must be positive, got {delta_f}"
        )));
    }
    if sample_sigmas.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::BadInput(
            "per-sample sigmas must be positive and finite".into(),
        ));
    }
    let n = samples.len() as f64;
    let mut chi = CompensatedSum::new();
    let mut var = CompensatedSum::new();
    for ((&v, &y), &s) in samples
        .values()
        .iter()
        .zip(model_values)
        .zip(sample_sigmas)
    {
        let e = (v - y) / s;
        chi.add(e * e);
        var.add(s * s);
    }
    let snr = (chi.value() / n).sqrt();
    let sigma_sample = (var.value() / n).sqrt();
    let sigma_f = if snr == 0.0 {
        0.0
    } else {
        delta_f * (2.0 / (n * snr * snr)).sqrt()
    };
    Ok(SnrReport {
        sigma_sample,
        snr,
        sigma_f,
    })
}
