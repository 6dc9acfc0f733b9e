//! Scenario tests tying several modules together: the fragmented
//! plane-wave dataset evaluated off-grid, and the statistical validity of
//! the demodulation error budget.

use std::f64::consts::{PI, TAU};

use ndlomb::baselines::{omd_error_budget, quadrature_demod};
use ndlomb::lsm;
use ndlomb::math::CompensatedSum;
use ndlomb::synth::{self, presets};
use ndlomb::types::{validate_samples, NoiseSpec};

/// The fitted amplitude at the true (off-grid) frequency of the fragmented
/// plane wave is 1 to within a percent, 60% missing data notwithstanding.
#[test]
fn simple_wave_amplitude_at_true_frequency() {
    let preset = presets::simple_wave(1);
    let samples = synth::generate(
        &preset.signal,
        &preset.sampling,
        preset.noise_sigma,
        preset.noise_seed,
    )
    .unwrap();
    let omega = [3.25 * TAU, 6.32 * TAU];
    let tau = lsm::tau_star(&samples, &omega).unwrap();
    let (a, b) = lsm::coeffs(&samples, &omega, tau).unwrap();
    let (amplitude, _) = lsm::amplitude_phase(a, b);
    assert!(
        (amplitude - 1.0).abs() < 0.01,
        "amplitude at the injected frequency: {amplitude}"
    );
    // and the recovered signal phase matches the injected pi/4
    let phase = ndlomb::math::wrap_angle(-(b.atan2(a) + tau));
    assert!(
        ndlomb::math::angle_distance(phase, PI / 4.0) < 0.01,
        "phase: {phase}"
    );
}

/// The analytic error budget bounds the empirical demodulation error in at
/// least a (1 - alpha) share of noise replicates:
/// |a_hat - a| <= eps_t * |a| + eps_fs.
#[test]
fn omd_error_budget_covers_monte_carlo_replicates() {
    let omega = 1.0;
    let t_total = TAU + PI / 5.0;
    let n = 100usize;
    let sigma = 0.5;
    let alpha = 0.05;
    let noise = NoiseSpec::new(sigma, alpha).unwrap();
    let budget = omd_error_budget(t_total, omega, n, &noise).unwrap();
    assert!(budget.eps_t > 0.0 && budget.eps_t <= 0.2);
    assert!(budget.eps_ls < budget.eps_fs);

    let clean: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|i| {
            let t = i as f64 * t_total / n as f64;
            (vec![t], (omega * t).cos())
        })
        .collect();
    let replicates = 500usize;
    let bound = budget.eps_t * 1.0 + budget.eps_fs;
    let mut within = 0usize;
    for rep in 0..replicates {
        let mut rng = synth::stream_rng(40_000 + rep as u64, synth::STREAM_NOISE);
        let rows: Vec<(Vec<f64>, f64)> = clean
            .iter()
            .map(|(c, v)| (c.clone(), v + sigma * synth::standard_gaussian(&mut rng)))
            .collect();
        let samples = validate_samples(rows).unwrap();
        let (a_hat, _) = quadrature_demod(&samples, &[omega]).unwrap();
        if (a_hat - 1.0).abs() <= bound {
            within += 1;
        }
    }
    let fraction = within as f64 / replicates as f64;
    assert!(
        fraction >= 1.0 - alpha,
        "only {fraction} of replicates within the budget {bound}"
    );
}

/// Estimator consistency against sample count on a fixed window: the
/// noiseless error stays at rounding level while the demodulation bias
/// persists, whatever the sampling density.
#[test]
fn noiseless_error_is_sampling_density_independent() {
    let omega = [1.0];
    let t_total = TAU + PI / 5.0;
    let mut omd_errors = Vec::new();
    for n in [64usize, 256, 1024] {
        let rows: Vec<(Vec<f64>, f64)> = (0..n)
            .map(|i| {
                let t = i as f64 * t_total / n as f64;
                (vec![t], (omega[0] * t).cos())
            })
            .collect();
        let samples = validate_samples(rows).unwrap();
        let tau = lsm::tau_star(&samples, &omega).unwrap();
        let (a, b) = lsm::coeffs(&samples, &omega, tau).unwrap();
        let (amplitude, _) = lsm::amplitude_phase(a, b);
        assert!((amplitude - 1.0).abs() < 1e-12, "n={n}: {amplitude}");
        let (a_omd, _) = quadrature_demod(&samples, &omega).unwrap();
        omd_errors.push((a_omd - 1.0).abs());
    }
    for err in &omd_errors {
        assert!(*err > 0.05, "demodulation bias should persist: {omd_errors:?}");
    }
}

/// Mean and variance of the generated Gaussian stream over a large draw,
/// checked through the public generation path.
#[test]
fn generated_noise_moments() {
    let n = 20_000usize;
    let signal = synth::SignalSpec::new(1, Vec::new()).unwrap();
    let sampling = synth::SamplingSpec {
        pattern: synth::SamplingPattern::UniformRandom {
            ranges: vec![(0.0, 1.0)],
            n,
        },
        missing_fraction: 0.0,
        seed: 77,
    };
    let set = synth::generate(&signal, &sampling, 2.0, 77).unwrap();
    let mean = ndlomb::math::mean(set.values());
    let var = ndlomb::math::variance_biased(set.values());
    assert!(mean.abs() < 4.0 * 2.0 / (n as f64).sqrt(), "mean {mean}");
    assert!((var - 4.0).abs() < 0.4, "variance {var}");
    let mut extreme = CompensatedSum::new();
    for &v in set.values() {
        if v.abs() > 3.0 * 2.0 {
            extreme.add(1.0);
        }
    }
    // ~0.27% of draws beyond 3 sigma
    let frac = extreme.value() / n as f64;
    assert!(frac < 0.01, "3-sigma tail fraction {frac}");
}
