//! The per-frequency least-squares estimator.
//!
//! For a frequency vector `omega` the data is fitted by
//! `a*cos(omega.t - tau*) + b*sin(omega.t - tau*)`, where the scalar phase
//! shift `tau*` is chosen so that the shifted sine and cosine are orthogonal
//! over the actual sample locations:
//!
//! ```text
//! sum_n sin(omega.t_n - tau*) cos(omega.t_n - tau*) = 0
//! ```
//!
//! With that choice the normal equations decouple and each coefficient is a
//! plain projection divided by a diagonal denominator. This reduces to the
//! classical one-dimensional Lomb-Scargle estimator (Lomb 1976, Scargle
//! 1982) when `omega` has a single component; shifting the phase instead of
//! the time coordinate is what makes the same scalar `tau*` work in any
//! dimension.
//!
//! All frequencies in this module are angular (radians per coordinate
//! unit). [`analyze`] accepts a [`FrequencyGrid`] in either convention and
//! converts internally, exactly once.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::CompensatedSum;
use crate::stats;
use crate::types::{
    DegeneracyFlags, FrequencyConvention, FrequencyGrid, NoiseSpec, SampleSet, Spectrum,
    SpectrumPoint,
};

/// A coefficient denominator below `DEGENERACY_FLOOR * N` marks the
/// frequency as unconstrained in that direction.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// Relative determinant floor for [`lsq_fit_oracle`].
const SINGULAR_FLOOR: f64 = 1e-12;

/// Grid points per work unit in [`analyze`]. Fixed (rather than derived
/// from the thread count) so the output is bit-identical however the chunks
/// are scheduled.
const ANALYZE_CHUNK: usize = 1024;

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(samples: &SampleSet, omega: &[f64]) -> Result<()> {
    if omega.len() != samples.dims() {
        return Err(Error::DimensionMismatch {
            expected: samples.dims(),
            found: omega.len(),
        });
    }
    Ok(())
}

/// Phase shift `tau*` restoring orthogonality of the shifted basis at the
/// angular frequency `omega`:
///
/// ```text
/// tau* = atan2( sum_n sin(2 omega.t_n), sum_n cos(2 omega.t_n) ) / 2
/// ```
///
/// The result is canonical in `(-pi/2, pi/2]`; any `tau* + k*pi/2` also
/// satisfies the orthogonality condition, since the squared-basis sums are
/// pi-periodic in the shift. The degenerate all-zero case (`atan2(0, 0)`)
/// yields 0.
pub fn tau_star(samples: &SampleSet, omega: &[f64]) -> Result<f64> {
    check_dims(samples, omega)?;
    let mut sum_sin = CompensatedSum::new();
    let mut sum_cos = CompensatedSum::new();
    for coord in samples.coords() {
        let (s, c) = (2.0 * dot(omega, coord)).sin_cos();
        sum_sin.add(s);
        sum_cos.add(c);
    }
    Ok(0.5 * sum_sin.value().atan2(sum_cos.value()))
}

/// Coefficients `(a, b)` of the shifted-basis fit at `omega`, using a
/// `tau_star` previously computed for the same samples and frequency:
///
/// ```text
/// a = sum_n v_n cos(omega.t_n - tau*) / sum_n cos^2(omega.t_n - tau*)
/// ```
///
/// and analogously for `b` with sine. Errors with
/// [`Error::DegenerateDenominator`] when a denominator falls below
/// `DEGENERACY_FLOOR * N`; use [`coeffs_flagged`] for the total variant
/// that reports the flat coefficient as 0 instead.
pub fn coeffs(samples: &SampleSet, omega: &[f64], tau_star: f64) -> Result<(f64, f64)> {
    let (a, b, flags) = coeffs_flagged(samples, omega, tau_star)?;
    if flags.cos {
        return Err(Error::DegenerateDenominator { which: "cosine" });
    }
    if flags.sin {
        return Err(Error::DegenerateDenominator { which: "sine" });
    }
    Ok((a, b))
}

/// Total variant of [`coeffs`]: degenerate directions yield a zero
/// coefficient and a raised flag rather than an error, which keeps
/// full-grid analyses total (the sine term at `omega = 0` is the canonical
/// case).
pub fn coeffs_flagged(
    samples: &SampleSet,
    omega: &[f64],
    tau_star: f64,
) -> Result<(f64, f64, DegeneracyFlags)> {
    check_dims(samples, omega)?;
    let mut vc = CompensatedSum::new();
    let mut vs = CompensatedSum::new();
    let mut cc = CompensatedSum::new();
    let mut ss = CompensatedSum::new();
    for (coord, &v) in samples.coords().zip(samples.values()) {
        let (s, c) = (dot(omega, coord) - tau_star).sin_cos();
        vc.add(v * c);
        vs.add(v * s);
        cc.add(c * c);
        ss.add(s * s);
    }
    Ok(finish_coeffs(
        vc.value(),
        vs.value(),
        cc.value(),
        ss.value(),
        samples.len(),
    ))
}

fn finish_coeffs(vc: f64, vs: f64, cc: f64, ss: f64, n: usize) -> (f64, f64, DegeneracyFlags) {
    let floor = DEGENERACY_FLOOR * n as f64;
    let mut flags = DegeneracyFlags::default();
    let a = if cc < floor {
        flags.cos = true;
        0.0
    } else {
        vc / cc
    };
    let b = if ss < floor {
        flags.sin = true;
        0.0
    } else {
        vs / ss
    };
    (a, b, flags)
}

/// Amplitude and basis-relative phase of a coefficient pair:
/// `A = sqrt(a^2 + b^2)`, `phi = atan2(b, a)` in `(-pi, pi]`.
pub fn amplitude_phase(a: f64, b: f64) -> (f64, f64) {
    (a.hypot(b), b.atan2(a))
}

/// Confidence-interval half-widths for the fitted parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfidenceIntervals {
    /// Half-width for `a` and `b`: `(4/pi) * Phi_{1-alpha} * sigma / sqrt(N)`.
    pub delta_coeff: f64,
    /// Half-width for the amplitude:
    /// `(4/pi) * Phi_{1-alpha} * sqrt(2/N) * sigma`.
    pub delta_amplitude: f64,
    /// Half-width for the phase: `delta_amplitude / A`, reported as
    /// `+inf` when the amplitude is zero (and zero when sigma is).
    pub delta_phase: f64,
}

/// Confidence intervals for coefficients, amplitude, and phase at noise
/// level `noise`, sample count `n`, and fitted amplitude `amplitude`.
///
/// The `4/pi` prefactor is the worst case of the noise-projection ratio
/// `sum cos / sum cos^2` over observation windows; see
/// [`crate::baselines::emax_scan`].
pub fn confidence_intervals(
    noise: &NoiseSpec,
    n: usize,
    amplitude: f64,
) -> ConfidenceIntervals {
    debug_assert!(n >= 1);
    debug_assert!(amplitude >= 0.0);
    let delta_coeff = 4.0 / std::f64::consts::PI * noise.quantile() * noise.sigma()
        / (n as f64).sqrt();
    let delta_amplitude = delta_coeff * std::f64::consts::SQRT_2;
    let delta_phase = if delta_amplitude == 0.0 {
        0.0
    } else if amplitude == 0.0 {
        f64::INFINITY
    } else {
        delta_amplitude / amplitude
    };
    ConfidenceIntervals {
        delta_coeff,
        delta_amplitude,
        delta_phase,
    }
}

/// Exact least-squares solution of the unshifted two-parameter model
/// `a*cos(omega.t) + b*sin(omega.t)` via the 2x2 normal equations.
///
/// This is the independent test oracle for [`coeffs`]: after rotating by
/// `tau*` the two fits describe the same function, so amplitude and total
/// phase must agree. Errors with [`Error::SingularSystem`] when the
/// sampling cannot distinguish the two basis functions.
pub fn lsq_fit_oracle(samples: &SampleSet, omega: &[f64]) -> Result<(f64, f64)> {
    check_dims(samples, omega)?;
    let mut cc = CompensatedSum::new();
    let mut ss = CompensatedSum::new();
    let mut cs = CompensatedSum::new();
    let mut vc = CompensatedSum::new();
    let mut vs = CompensatedSum::new();
    for (coord, &v) in samples.coords().zip(samples.values()) {
        let (s, c) = dot(omega, coord).sin_cos();
        cc.add(c * c);
        ss.add(s * s);
        cs.add(c * s);
        vc.add(v * c);
        vs.add(v * s);
    }
    let (cc, ss, cs) = (cc.value(), ss.value(), cs.value());
    let det = cc * ss - cs * cs;
    if det <= SINGULAR_FLOOR * cc * ss || cc == 0.0 || ss == 0.0 {
        return Err(Error::SingularSystem);
    }
    let a = (vc.value() * ss - vs.value() * cs) / det;
    let b = (vs.value() * cc - vc.value() * cs) / det;
    Ok((a, b))
}

/// Coefficients in the classical `sqrt(N/2)`-scaled convention of Lomb:
///
/// ```text
/// a_classic = sum v cos(omega.t - tau*) / ( sqrt(N/2) sqrt(sum cos^2(omega.t - tau*)) )
/// ```
///
/// The crate otherwise uses the demodulation scaling, in which the
/// coefficients estimate the model amplitudes directly; the two agree when
/// `sum cos^2` approaches `N/2`. Provided as a conversion helper only.
pub fn classic_coefficients(samples: &SampleSet, omega: &[f64]) -> Result<(f64, f64)> {
    let tau = tau_star(samples, omega)?;
    check_dims(samples, omega)?;
    let mut vc = CompensatedSum::new();
    let mut vs = CompensatedSum::new();
    let mut cc = CompensatedSum::new();
    let mut ss = CompensatedSum::new();
    for (coord, &v) in samples.coords().zip(samples.values()) {
        let (s, c) = (dot(omega, coord) - tau).sin_cos();
        vc.add(v * c);
        vs.add(v * s);
        cc.add(c * c);
        ss.add(s * s);
    }
    let floor = DEGENERACY_FLOOR * samples.len() as f64;
    if cc.value() < floor {
        return Err(Error::DegenerateDenominator { which: "cosine" });
    }
    if ss.value() < floor {
        return Err(Error::DegenerateDenominator { which: "sine" });
    }
    let half_n = (samples.len() as f64 / 2.0).sqrt();
    Ok((
        vc.value() / (half_n * cc.value().sqrt()),
        vs.value() / (half_n * ss.value().sqrt()),
    ))
}

/// Options for [`analyze_with`].
#[derive(Clone, Debug, Default)]
pub struct AnalyzeOptions {
    /// Override for the independent-frequency count `M` used by the false
    /// alarm probability. Defaults to the empirical polynomial in the
    /// sample count (see [`stats::independent_frequencies`]).
    pub m_indep: Option<f64>,
}

/// Evaluate the estimator on every grid frequency and attach the
/// statistical layer (psd, exceedance probability, false alarm
/// probability).
///
/// Grid points are independent; they are evaluated in parallel in fixed
/// chunks, so identical inputs give bit-identical output for any thread
/// count. Degenerate denominators mark the affected point (see
/// [`coeffs_flagged`]) rather than failing the run. The false alarm columns
/// are left empty when the sample count is too small for the statistic
/// (`N < 4` for the exceedance probability, `N < 6` for the default `M`).
pub fn analyze(samples: &SampleSet, grid: &FrequencyGrid, noise: &NoiseSpec) -> Result<Spectrum> {
    analyze_with(samples, grid, noise, &AnalyzeOptions::default())
}

/// [`analyze`] with explicit [`AnalyzeOptions`].
pub fn analyze_with(
    samples: &SampleSet,
    grid: &FrequencyGrid,
    noise: &NoiseSpec,
    options: &AnalyzeOptions,
) -> Result<Spectrum> {
    let _ = noise; // reserved for per-point confidence annotations
    if grid.dims() != samples.dims() {
        return Err(Error::DimensionMismatch {
            expected: samples.dims(),
            found: grid.dims(),
        });
    }
    if let Some(m) = options.m_indep {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::BadInput(format!(
                "independent-frequency count must be positive, got {m}"
            )));
        }
    }
    let n = samples.len();
    let sigma0_sq = crate::math::variance_biased(samples.values());
    if sigma0_sq == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let m_indep = options
        .m_indep
        .or_else(|| stats::independent_frequencies(n).ok());

    let trig = SampleTrig::prepare(samples, grid);
    let total = grid.len();
    let chunks: Vec<(usize, usize)> = (0..total)
        .step_by(ANALYZE_CHUNK)
        .map(|s| (s, (s + ANALYZE_CHUNK).min(total)))
        .collect();
    let points: Vec<Vec<SpectrumPoint>> = chunks
        .par_iter()
        .map(|&(start, end)| {
            analyze_chunk(samples, grid, &trig, sigma0_sq, m_indep, start, end)
        })
        .collect();

    Ok(Spectrum {
        convention: grid.convention(),
        dims: grid.dims(),
        spacing: grid.spacing(),
        n_samples: n,
        m_indep,
        sigma0_sq,
        points: points.into_iter().flatten().collect(),
    })
}

/// Per-sample trig factors shared by all chunks: the rotation advancing one
/// grid step on each axis, and the factor at each axis minimum.
struct SampleTrig {
    /// `exp(i * step_j * t_nj)`, laid out `[n][j]`.
    rot: Vec<[f64; 2]>,
    /// `exp(i * min_j * t_nj)`, laid out `[n][j]`.
    base: Vec<[f64; 2]>,
    /// Angular `(min, step)` per axis.
    axes: Vec<(f64, f64)>,
}

impl SampleTrig {
    fn prepare(samples: &SampleSet, grid: &FrequencyGrid) -> Self {
        let conv = match grid.convention() {
            FrequencyConvention::Ordinary => std::f64::consts::TAU,
            FrequencyConvention::Angular => 1.0,
        };
        let m = grid.dims();
        let axes: Vec<(f64, f64)> = grid
            .axes()
            .iter()
            .map(|a| (a.min() * conv, a.step() * conv))
            .collect();
        let mut rot = Vec::with_capacity(samples.len() * m);
        let mut base = Vec::with_capacity(samples.len() * m);
        for coord in samples.coords() {
            for (j, &(min, step)) in axes.iter().enumerate() {
                let (s, c) = (step * coord[j]).sin_cos();
                rot.push([c, s]);
                let (s, c) = (min * coord[j]).sin_cos();
                base.push([c, s]);
            }
        }
        Self { rot, base, axes }
    }
}

#[inline(always)]
fn cmul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] * b[0] - a[1] * b[1], a[1] * b[0] + a[0] * b[1]]
}

fn analyze_chunk(
    samples: &SampleSet,
    grid: &FrequencyGrid,
    trig: &SampleTrig,
    sigma0_sq: f64,
    m_indep: Option<f64>,
    start: usize,
    end: usize,
) -> Vec<SpectrumPoint> {
    let m = grid.dims();
    let n = samples.len();
    let values = samples.values();
    let counts: Vec<usize> = grid.axes().iter().map(|a| a.count()).collect();

    // Phase-product stack per sample: stack[n*m + j] is
    // exp(i * sum_{jj <= j} omega_jj(idx_jj) * t_n_jj) at the current
    // odometer position. Initialized from the cumulative phase so each
    // chunk starts from directly evaluated trig.
    let mut odometer = grid.decode(start);
    let mut stack = vec![[0.0f64; 2]; n * m];
    for (i, coord) in samples.coords().enumerate() {
        let mut cum = 0.0;
        for j in 0..m {
            let (min, step) = trig.axes[j];
            cum += (min + step * odometer[j] as f64) * coord[j];
            let (s, c) = cum.sin_cos();
            stack[i * m + j] = [c, s];
        }
    }

    let mut out = Vec::with_capacity(end - start);
    for k in start..end {
        // Which axis advances when moving to k+1 (None at the chunk end).
        let adv = if k + 1 < end {
            let mut j = m - 1;
            while odometer[j] + 1 == counts[j] {
                j -= 1; // grid.len() bounds the walk; axis 0 never wraps here
            }
            Some(j)
        } else {
            None
        };

        let mut s_vc = CompensatedSum::new();
        let mut s_vs = CompensatedSum::new();
        let mut s_cc = CompensatedSum::new();
        let mut s_sc = CompensatedSum::new();
        for (i, &v) in values.iter().enumerate() {
            let row = i * m;
            let [c, s] = stack[row + m - 1];
            s_vc.add(v * c);
            s_vs.add(v * s);
            s_cc.add(c * c);
            s_sc.add(s * c);
            if let Some(j) = adv {
                let mut cur = cmul(stack[row + j], trig.rot[row + j]);
                stack[row + j] = cur;
                for jj in j + 1..m {
                    cur = cmul(cur, trig.base[row + jj]);
                    stack[row + jj] = cur;
                }
            }
        }
        if let Some(j) = adv {
            odometer[j] += 1;
            for x in odometer[j + 1..].iter_mut() {
                *x = 0;
            }
        }

        out.push(finish_point(
            grid,
            k,
            s_vc.value(),
            s_vs.value(),
            s_cc.value(),
            s_sc.value(),
            n,
            sigma0_sq,
            m_indep,
        ));
    }
    out
}

/// Build one spectrum point from the four accumulated sums. The shifted
/// sums follow from the unshifted ones by the angle-addition identities, so
/// a single pass over the samples suffices:
///
/// ```text
/// sum sin(2p) = 2 sum sc          sum cos(2p) = 2 sum cc - N
/// sum cos^2(p - tau) = cos^2(tau) cc + 2 sin(tau)cos(tau) sc + sin^2(tau) (N - cc)
/// ```
#[allow(clippy::too_many_arguments)]
fn finish_point(
    grid: &FrequencyGrid,
    k: usize,
    vc: f64,
    vs: f64,
    cc: f64,
    sc: f64,
    n: usize,
    sigma0_sq: f64,
    m_indep: Option<f64>,
) -> SpectrumPoint {
    let n_f = n as f64;
    let tau = 0.5 * (2.0 * sc).atan2(2.0 * cc - n_f);
    let (st, ct) = tau.sin_cos();
    let vc_shift = ct * vc + st * vs;
    let vs_shift = ct * vs - st * vc;
    let cc_shift = ct * ct * cc + 2.0 * ct * st * sc + st * st * (n_f - cc);
    let ss_shift = n_f - cc_shift;
    let (a, b, flags) = finish_coeffs(vc_shift, vs_shift, cc_shift, ss_shift, n);
    let (amplitude, phase) = amplitude_phase(a, b);
    let psd = stats::psd_from_amplitude(amplitude, sigma0_sq, n);
    let prob_exceed = if n >= 4 {
        Some(stats::prob_exceed(psd, n).expect("n >= 4"))
    } else {
        None
    };
    let fap = match (prob_exceed, m_indep) {
        (Some(p), Some(m)) => Some(stats::false_alarm_probability(p, m)),
        _ => None,
    };
    SpectrumPoint {
        freq: grid.freq(k),
        tau_star: tau,
        a,
        b,
        amplitude,
        phase,
        psd,
        prob_exceed,
        fap,
        flags,
    }
}
