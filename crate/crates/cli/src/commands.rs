//! Command implementations.

use std::fmt::Write as _;
use std::fs;

use ndlomb::baselines::{self, GriddedField};
use ndlomb::io;
use ndlomb::lsm::{self, AnalyzeOptions};
use ndlomb::math::CompensatedSum;
use ndlomb::stats;
use ndlomb::synth::{self, presets, SamplingPattern};
use ndlomb::types::{
    build_regular_grid, validate_samples, FrequencyGrid, NoiseSpec, SampleSet, Spectrum,
};

use crate::spec::{self, GenerationSpec};
use crate::{
    configure_threads, resolve_seed, AnalyzeArgs, BaselineArgs, CliError, CompareArgs, EmaxArgs,
    GenerateArgs, ReportArgs, SweepArgs,
};

fn parse_grid(text: &str) -> Result<FrequencyGrid, CliError> {
    let (ranges, steps) = spec::parse_lattice_ranges(text)?;
    Ok(build_regular_grid(&ranges, &steps)?)
}

fn freq_label(freq: &[f64]) -> String {
    freq.iter()
        .map(|f| format!("{f:.6}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn generate(args: GenerateArgs) -> Result<(), CliError> {
    args.format.validate()?;
    let seed = args.seed;
    let env_or_default_seed = resolve_seed(args.seed);

    let mut resolved = if let Some(name) = &args.preset {
        GenerationSpec::from_preset(name, env_or_default_seed)?
    } else if let Some(path) = &args.config {
        let text = fs::read_to_string(path)?;
        GenerationSpec::parse(&text, None)?
    } else {
        // built entirely from flags
        let pattern = spec::build_pattern(
            args.pattern.as_deref().unwrap_or("regular"),
            args.range.as_deref(),
            args.n,
            args.jitter,
            args.gaps.as_deref(),
            None,
            None,
            None,
        )?;
        let components = match &args.components {
            Some(text) if !text.trim().is_empty() => text
                .split(';')
                .map(spec::parse_component)
                .collect::<Result<Vec<_>, _>>()?,
            _ => Vec::new(),
        };
        let signal = ndlomb::synth::SignalSpec::new(pattern.dims(), components)?;
        GenerationSpec {
            signal,
            sampling: ndlomb::synth::SamplingSpec {
                pattern,
                missing_fraction: args.missing.unwrap_or(0.0),
                seed: env_or_default_seed,
            },
            noise_sigma: args.sigma.unwrap_or(0.0),
            noise_seed: env_or_default_seed,
            label: None,
        }
    };
    // flag overrides apply on top of presets and config files
    if args.preset.is_some() || args.config.is_some() {
        if let Some(m) = args.missing {
            resolved.sampling.missing_fraction = m;
        }
        if let Some(s) = args.sigma {
            resolved.noise_sigma = s;
        }
        if let Some(s) = seed {
            resolved.sampling.seed = s;
            resolved.noise_seed = s;
        }
    }

    let samples = synth::generate(
        &resolved.signal,
        &resolved.sampling,
        resolved.noise_sigma,
        resolved.noise_seed,
    )?;
    let samples = match &resolved.label {
        Some(label) => samples.with_label(label.clone()),
        None => samples,
    };
    io::write_samples_csv(&args.output, &samples)?;
    fs::write(format!("{}.config", args.output), resolved.echo())?;

    if let Some(field_path) = &args.field_output {
        let (origin, spacing, shape) = lattice_of(&resolved.sampling.pattern).ok_or_else(|| {
            CliError::Usage("--field-output needs a regular sampling pattern".into())
        })?;
        let field = GriddedField::from_samples_on_grid(&samples, &origin, &spacing, &shape)?;
        io::write_field_csv(field_path, &field)?;
    }
    println!(
        "generated {} samples (dims {}) -> {}",
        samples.len(),
        samples.dims(),
        args.output
    );
    Ok(())
}

fn lattice_of(pattern: &SamplingPattern) -> Option<(Vec<f64>, Vec<f64>, Vec<usize>)> {
    match pattern {
        SamplingPattern::Regular { ranges, steps } => {
            let origin: Vec<f64> = ranges.iter().map(|r| r.0).collect();
            let shape: Vec<usize> = ranges
                .iter()
                .zip(steps)
                .map(|(&(min, max), &step)| ((max - min) / step + 0.5).floor() as usize + 1)
                .collect();
            Some((origin, steps.clone(), shape))
        }
        _ => None,
    }
}

pub fn analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    args.format.validate()?;
    configure_threads(args.threads)?;
    let samples = io::read_samples_csv(&args.input)?;
    let grid = parse_grid(&args.grid)?;
    let noise = NoiseSpec::new(args.sigma, args.alpha)?;
    if samples.len() < 4 {
        eprintln!(
            "ndlomb: warning: {} samples are too few for false-alarm statistics; prob/fap columns left empty",
            samples.len()
        );
    }
    let spectrum = lsm::analyze_with(
        &samples,
        &grid,
        &noise,
        &AnalyzeOptions {
            m_indep: args.m_indep,
        },
    )?;
    io::write_spectrum_csv(&args.output, &spectrum)?;
    print_spectrum_summary("lsm", &spectrum);
    Ok(())
}

fn print_spectrum_summary(kind: &str, spectrum: &Spectrum) {
    if let Some(peak) = spectrum.peak() {
        let fap = peak
            .fap
            .map(|f| format!("{f:.6e}"))
            .unwrap_or_else(|| "n/a".into());
        let m = spectrum
            .m_indep
            .map(|m| format!("{m:.3}"))
            .unwrap_or_else(|| "n/a".into());
        println!(
            "{kind}: peak at ({}) psd {:.6} fap {} | n {} m {}",
            freq_label(&peak.freq),
            peak.psd,
            fap,
            spectrum.n_samples,
            m
        );
    }
}

pub fn baseline(args: BaselineArgs) -> Result<(), CliError> {
    args.format.validate()?;
    configure_threads(args.threads)?;
    match args.method.as_str() {
        "dft" => {
            let field_path = args
                .field
                .as_ref()
                .ok_or_else(|| CliError::Usage("--method dft needs --field".into()))?;
            let field = io::read_field_csv(field_path)?;
            let spectrum = baselines::zero_padded_dft_psd(&field)?;
            if let Some(out) = &args.output {
                io::write_spectrum_csv(out, &spectrum)?;
            }
            print_spectrum_summary("dft", &spectrum);
            Ok(())
        }
        "omd" => {
            let input = args
                .input
                .as_ref()
                .ok_or_else(|| CliError::Usage("--method omd needs --input".into()))?;
            let freq_text = args
                .freq
                .as_ref()
                .ok_or_else(|| CliError::Usage("--method omd needs --freq".into()))?;
            let samples = io::read_samples_csv(input)?;
            let freq: Vec<f64> = freq_text
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Usage(format!("bad frequency {t:?}")))
                })
                .collect::<Result<_, _>>()?;
            let omega: Vec<f64> = freq.iter().map(|f| f * std::f64::consts::TAU).collect();
            let (a, b) = baselines::quadrature_demod(&samples, &omega)?;
            let (amplitude, phase) = lsm::amplitude_phase(a, b);
            println!("omd at ({}):", freq_label(&freq));
            println!("  a = {a:.9}");
            println!("  b = {b:.9}");
            println!("  amplitude = {amplitude:.9}");
            println!("  phase = {phase:.9}");
            if samples.dims() == 1 && omega[0] > 0.0 {
                let noise = NoiseSpec::new(args.sigma, args.alpha)?;
                let t_total = samples.extent(0);
                let budget =
                    baselines::omd_error_budget(t_total, omega[0], samples.len(), &noise)?;
                println!(
                    "  error budget over window t = {t_total:.6}: eps_t = {:.6}, eps_fs = {:.6}, eps_ls = {:.6}",
                    budget.eps_t, budget.eps_fs, budget.eps_ls
                );
            }
            Ok(())
        }
        other => Err(CliError::Usage(format!(
            "unknown baseline method {other:?} (expected dft or omd)"
        ))),
    }
}

pub fn compare(args: CompareArgs) -> Result<(), CliError> {
    args.format.validate()?;
    configure_threads(args.threads)?;
    let (samples, field, default_grid) = if let Some(name) = &args.preset {
        let seed = resolve_seed(args.seed);
        let preset = presets::by_name(name, seed).ok_or_else(|| {
            CliError::Usage(format!("unknown preset {name:?}"))
        })?;
        let samples = synth::generate(
            &preset.signal,
            &preset.sampling,
            preset.noise_sigma,
            preset.noise_seed,
        )?;
        let (origin, spacing, shape) = preset.lattice.ok_or_else(|| {
            CliError::Usage(format!(
                "preset {name:?} has no lattice; the dft baseline needs gridded data"
            ))
        })?;
        let field = GriddedField::from_samples_on_grid(&samples, &origin, &spacing, &shape)?;
        (samples, field, Some(preset.default_grid))
    } else {
        let input = args
            .input
            .as_ref()
            .ok_or_else(|| CliError::Usage("compare needs --preset or --input/--field".into()))?;
        let field_path = args.field.as_ref().expect("clap requires field with input");
        (
            io::read_samples_csv(input)?,
            io::read_field_csv(field_path)?,
            None,
        )
    };
    let grid = match (&args.grid, default_grid) {
        (Some(text), _) => parse_grid(text)?,
        (None, Some(g)) => g,
        (None, None) => {
            return Err(CliError::Usage(
                "compare over files needs an explicit --grid".into(),
            ))
        }
    };
    let noise = NoiseSpec::new(0.0, 0.05)?;
    let lsm_spectrum = lsm::analyze(&samples, &grid, &noise)?;
    let dft_spectrum = baselines::zero_padded_dft_psd(&field)?;
    if let Some(path) = &args.lsm_output {
        io::write_spectrum_csv(path, &lsm_spectrum)?;
    }
    if let Some(path) = &args.dft_output {
        io::write_spectrum_csv(path, &dft_spectrum)?;
    }
    let lsm_peak = lsm_spectrum
        .peak()
        .ok_or_else(|| CliError::Usage("empty estimator spectrum".into()))?;
    let dft_peak = dft_spectrum
        .points
        .iter()
        .filter(|p| p.freq[0] > 0.0)
        .max_by(|a, b| a.psd.partial_cmp(&b.psd).unwrap())
        .ok_or_else(|| CliError::Usage("empty dft spectrum".into()))?;
    println!("lsm peak: ({}) psd {:.6}", freq_label(&lsm_peak.freq), lsm_peak.psd);
    println!("dft peak: ({}) psd {:.6}", freq_label(&dft_peak.freq), dft_peak.psd);
    println!("dft/lsm peak ratio: {:.4}", dft_peak.psd / lsm_peak.psd);
    let offsets: Vec<String> = dft_peak
        .freq
        .iter()
        .zip(&lsm_peak.freq)
        .map(|(d, l)| format!("{:.4}", (d - l).abs()))
        .collect();
    println!("peak offset per axis: {}", offsets.join(", "));
    Ok(())
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    args.format.validate()?;
    let seed = resolve_seed(args.seed);
    let ns: Vec<usize> = args
        .n_list
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad sample count {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    if ns.is_empty() || args.replicates == 0 {
        return Err(CliError::Usage(
            "sweep needs at least one sample count and one replicate".into(),
        ));
    }
    if args.t <= 0.0 || args.omega <= 0.0 || !args.t.is_finite() || !args.omega.is_finite() {
        return Err(CliError::Usage("sweep needs positive --t and --omega".into()));
    }

    let mut out = String::from("n,method,replicate,error\n");
    let mut summary = Vec::new();
    for (ni, &n) in ns.iter().enumerate() {
        // fixed equidistant pattern per n; replicates vary the noise stream
        let rows: Vec<(Vec<f64>, f64)> = (0..n)
            .map(|i| {
                let t = i as f64 * args.t / n as f64;
                (vec![t], (args.omega * t).cos())
            })
            .collect();
        let clean = validate_samples(rows)?;
        let tau = lsm::tau_star(&clean, &[args.omega])?;
        let a_true = tau.cos(); // cos(wt) = cos(tau) cos(wt-tau) - sin(tau) sin(wt-tau)

        let mut sq_lsm = CompensatedSum::new();
        let mut sq_omd = CompensatedSum::new();
        for rep in 0..args.replicates {
            let noise_seed = seed
                .wrapping_add(1_000_003u64.wrapping_mul(ni as u64 + 1))
                .wrapping_add(rep as u64);
            let mut rng = synth::stream_rng(noise_seed, synth::STREAM_NOISE);
            let noisy_rows: Vec<(Vec<f64>, f64)> = clean
                .coords()
                .zip(clean.values())
                .map(|(c, &v)| {
                    (
                        c.to_vec(),
                        v + args.sigma * synth::standard_gaussian(&mut rng),
                    )
                })
                .collect();
            let noisy = validate_samples(noisy_rows)?;
            let (a_lsm, _, _) = lsm::coeffs_flagged(&noisy, &[args.omega], tau)?;
            let (a_omd, _) = baselines::quadrature_demod(&noisy, &[args.omega])?;
            let err_lsm = (a_lsm - a_true).abs();
            let err_omd = (a_omd - 1.0).abs();
            writeln!(out, "{n},lsm,{rep},{err_lsm:.16e}").expect("string write");
            writeln!(out, "{n},omd,{rep},{err_omd:.16e}").expect("string write");
            sq_lsm.add(err_lsm * err_lsm);
            sq_omd.add(err_omd * err_omd);
        }
        let rms_lsm = (sq_lsm.value() / args.replicates as f64).sqrt();
        let rms_omd = (sq_omd.value() / args.replicates as f64).sqrt();
        println!("n {n}: lsm rms {rms_lsm:.6e}, omd rms {rms_omd:.6e}");
        summary.push((n, rms_lsm));
    }
    fs::write(&args.output, out)?;

    if summary.len() >= 2 && summary.iter().all(|&(_, r)| r > 0.0) {
        let xs: Vec<f64> = summary.iter().map(|&(n, _)| (n as f64).ln()).collect();
        let ys: Vec<f64> = summary.iter().map(|&(_, r)| r.ln()).collect();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
        println!("lsm rms slope over log n: {slope:.4}");
    }
    println!("wrote {}", args.output);
    Ok(())
}

pub fn emax(args: EmaxArgs) -> Result<(), CliError> {
    if args.resolution < 1000 {
        return Err(CliError::Usage("emax needs --resolution >= 1000".into()));
    }
    let (beta_star, e_max) = baselines::emax_scan(args.resolution);
    let four_over_pi = 4.0 / std::f64::consts::PI;
    println!("beta* = {beta_star:.10}");
    println!("e_max = {e_max:.12}");
    println!("4/pi  = {four_over_pi:.12}");
    println!("|e_max - 4/pi| = {:.3e}", (e_max - four_over_pi).abs());
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<(), CliError> {
    configure_threads(args.threads)?;
    let (samples, spectrum, title, preset_sigma) = if let Some(name) = &args.preset {
        let seed = resolve_seed(args.seed);
        let preset = presets::by_name(name, seed)
            .ok_or_else(|| CliError::Usage(format!("unknown preset {name:?}")))?;
        let samples = synth::generate(
            &preset.signal,
            &preset.sampling,
            preset.noise_sigma,
            preset.noise_seed,
        )?;
        let noise_run = NoiseSpec::new(preset.noise_sigma, args.alpha)?;
        let spectrum = lsm::analyze_with(
            &samples,
            &preset.default_grid,
            &noise_run,
            &AnalyzeOptions {
                m_indep: args.m_indep,
            },
        )?;
        (
            Some(samples),
            spectrum,
            format!("preset {name} (seed {seed})"),
            Some(preset.noise_sigma),
        )
    } else {
        let input = args
            .input
            .as_ref()
            .ok_or_else(|| CliError::Usage("report needs --input or --preset".into()))?;
        let (dims, points) = io::read_spectrum_csv(input)?;
        let samples = match &args.samples {
            Some(path) => Some(io::read_samples_csv(path)?),
            None => None,
        };
        let n_samples = samples.as_ref().map(SampleSet::len).unwrap_or(0);
        let spectrum = Spectrum {
            convention: ndlomb::types::FrequencyConvention::Ordinary,
            dims,
            spacing: Vec::new(),
            n_samples,
            m_indep: args.m_indep,
            sigma0_sq: f64::NAN,
            points,
        };
        (samples, spectrum, format!("spectrum {input}"), None)
    };

    let sigma = args.sigma.or(preset_sigma).unwrap_or(0.0);
    let noise = NoiseSpec::new(sigma, args.alpha)?;
    let text = render_report(&args, &noise, samples.as_ref(), &spectrum, &title)?;
    match &args.output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn render_report(
    args: &ReportArgs,
    noise: &NoiseSpec,
    samples: Option<&SampleSet>,
    spectrum: &Spectrum,
    title: &str,
) -> Result<String, CliError> {
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "# Spectrum report: {title}\n").expect("string write");
    writeln!(w, "- points: {}", spectrum.len()).expect("string write");
    if spectrum.n_samples > 0 {
        writeln!(w, "- samples: {} (dims {})", spectrum.n_samples, spectrum.dims)
            .expect("string write");
    }
    let m_used = spectrum.m_indep.or_else(|| {
        (spectrum.n_samples >= 6)
            .then(|| stats::independent_frequencies(spectrum.n_samples).ok())
            .flatten()
    });
    if let Some(m) = m_used {
        writeln!(w, "- independent frequencies m: {m:.3}").expect("string write");
    }
    writeln!(w, "- noise: sigma {}, alpha {}\n", noise.sigma(), noise.alpha())
        .expect("string write");

    let ranked = spectrum.ranked();
    let top = ranked.iter().take(args.top.max(1)).collect::<Vec<_>>();
    writeln!(w, "## Top peaks\n").expect("string write");
    let axes: Vec<String> = (1..=spectrum.dims).map(|j| format!("f{j}")).collect();
    writeln!(w, "| rank | {} | amplitude | phase | psd | prob | fap |", axes.join(" | "))
        .expect("string write");
    writeln!(
        w,
        "|---|{}---|---|---|---|---|",
        "---|".repeat(spectrum.dims)
    )
    .expect("string write");
    for (rank, p) in top.iter().enumerate() {
        let freqs: Vec<String> = p.freq.iter().map(|f| format!("{f:.6}")).collect();
        let fmt_opt = |v: Option<f64>| {
            v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into())
        };
        writeln!(
            w,
            "| {} | {} | {:.6} | {:.6} | {:.6} | {} | {} |",
            rank + 1,
            freqs.join(" | "),
            p.amplitude,
            p.signal_phase(),
            p.psd,
            fmt_opt(p.prob_exceed),
            fmt_opt(p.fap),
        )
        .expect("string write");
    }

    if let Some(peak) = ranked.first() {
        if spectrum.n_samples >= 1 {
            let ci = lsm::confidence_intervals(noise, spectrum.n_samples, peak.amplitude);
            writeln!(w, "\n## Confidence intervals (top peak)\n").expect("string write");
            writeln!(w, "- delta_a = delta_b = {:.6}", ci.delta_coeff).expect("string write");
            writeln!(w, "- delta_amplitude = {:.6}", ci.delta_amplitude).expect("string write");
            writeln!(w, "- delta_phase = {:.6} rad", ci.delta_phase).expect("string write");
        }
        if let Some(samples) = samples {
            // fitted model of the top peak, for the residual-based blocks
            let omega: Vec<f64> = peak
                .freq
                .iter()
                .map(|f| f * std::f64::consts::TAU)
                .collect();
            let phase0 = peak.signal_phase();
            let model: Vec<f64> = samples
                .coords()
                .map(|c| {
                    let p: f64 = omega.iter().zip(c).map(|(w, t)| w * t).sum();
                    peak.amplitude * (p + phase0).cos()
                })
                .collect();
            let delta_f = spectrum
                .spacing
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if delta_f.is_finite() && delta_f > 0.0 {
                let snr =
                    stats::snr_and_sigma_f(samples, &model, &[peak.amplitude], delta_f)?;
                writeln!(w, "\n## Signal to noise (top-peak model)\n").expect("string write");
                writeln!(w, "- residual rms: {:.6}", snr.sigma_sample).expect("string write");
                writeln!(w, "- snr: {:.6}", snr.snr).expect("string write");
                writeln!(w, "- sigma_f: {:.6}", snr.sigma_f).expect("string write");
            }
            if samples.dims() == 1 && omega[0].abs() > 0.0 {
                let budget = baselines::omd_error_budget(
                    samples.extent(0),
                    omega[0].abs(),
                    samples.len(),
                    noise,
                )?;
                writeln!(w, "\n## Demodulation error budget (1-d window)\n")
                    .expect("string write");
                writeln!(w, "- eps_t (truncation, relative): {:.6}", budget.eps_t)
                    .expect("string write");
                writeln!(w, "- eps_fs (demodulation random): {:.6}", budget.eps_fs)
                    .expect("string write");
                writeln!(w, "- eps_ls (least squares): {:.6}", budget.eps_ls)
                    .expect("string write");
            }
        }
    }
    writeln!(
        w,
        "\nPlot data: spectrum CSV columns are f1..fm,tau_star,a,b,amplitude,phase,psd,prob,fap."
    )
    .expect("string write");
    Ok(out)
}
