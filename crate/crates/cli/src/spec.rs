//! Resolved generation specs and the flat key=value format they are
//! exchanged in.
//!
//! The same schema serves as `--config` input and as the sidecar echo
//! written next to every generated dataset, so a run is reproducible from
//! its own output:
//!
//! ```text
//! dims = 2
//! component = 3.25,6.32 @ 1 @ 0.7853981633974483
//! pattern = regular
//! range = -1:0.025:1,-1:0.025:1
//! missing = 0.6
//! sigma = 0
//! seed = 1
//! noise-seed = 1
//! ```
//!
//! `component` may repeat. `pattern` is one of `regular`, `uniform`,
//! `jittered`, `two-sensor`; `range` entries are `min:step:max` for
//! lattice patterns and `min:max` for `uniform` (which also needs `n`).
//! `jitter`, `gaps` (`axis:lo..hi;...`), and the two-sensor keys
//! (`t-range`, `z-range`, `omega-out`) apply to their patterns only.

use ndlomb::synth::{
    GapInterval, SamplingPattern, SamplingSpec, SignalComponent, SignalSpec,
};
use ndlomb::Error;

use crate::CliError;

/// Everything `generate` needs, fully resolved.
pub struct GenerationSpec {
    pub signal: SignalSpec,
    pub sampling: SamplingSpec,
    pub noise_sigma: f64,
    pub noise_seed: u64,
    pub label: Option<String>,
}

impl GenerationSpec {
    pub fn from_preset(name: &str, seed: u64) -> Result<Self, CliError> {
        let preset = ndlomb::synth::presets::by_name(name, seed).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown preset {name:?} (expected simple-wave, traveling-wave, or noise-only)"
            ))
        })?;
        Ok(Self {
            signal: preset.signal,
            sampling: preset.sampling,
            noise_sigma: preset.noise_sigma,
            noise_seed: preset.noise_seed,
            label: Some(preset.name.to_string()),
        })
    }

    /// Serialize in the flat key=value schema.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let dims = self.signal.dims();
        out.push_str(&format!("dims = {dims}\n"));
        for c in self.signal.components() {
            let freq = c
                .freq
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&format!(
                "component = {freq} @ {} @ {}\n",
                c.amplitude, c.phase
            ));
        }
        echo_pattern(&mut out, &self.sampling.pattern);
        out.push_str(&format!("missing = {}\n", self.sampling.missing_fraction));
        out.push_str(&format!("sigma = {}\n", self.noise_sigma));
        out.push_str(&format!("seed = {}\n", self.sampling.seed));
        out.push_str(&format!("noise-seed = {}\n", self.noise_seed));
        if let Some(label) = &self.label {
            out.push_str(&format!("label = {label}\n"));
        }
        out
    }

    /// Parse the flat key=value schema.
    pub fn parse(text: &str, seed_override: Option<u64>) -> Result<Self, CliError> {
        let mut dims: Option<usize> = None;
        let mut components: Vec<SignalComponent> = Vec::new();
        let mut pattern_name: Option<String> = None;
        let mut range: Option<String> = None;
        let mut n: Option<usize> = None;
        let mut jitter: Option<f64> = None;
        let mut gaps: Option<String> = None;
        let mut t_range: Option<String> = None;
        let mut z_range: Option<String> = None;
        let mut omega_out: Option<f64> = None;
        let mut missing = 0.0f64;
        let mut sigma = 0.0f64;
        let mut seed: Option<u64> = None;
        let mut noise_seed: Option<u64> = None;
        let mut label: Option<String> = None;

        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key = value", i + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                CliError::Usage(format!("config line {}: bad {what} {value:?}", i + 1))
            };
            match key {
                "dims" => dims = Some(value.parse().map_err(|_| bad("dims"))?),
                "component" => components.push(parse_component(value)?),
                "pattern" => pattern_name = Some(value.to_string()),
                "range" => range = Some(value.to_string()),
                "n" => n = Some(value.parse().map_err(|_| bad("n"))?),
                "jitter" => jitter = Some(value.parse().map_err(|_| bad("jitter"))?),
                "gaps" => gaps = Some(value.to_string()),
                "t-range" => t_range = Some(value.to_string()),
                "z-range" => z_range = Some(value.to_string()),
                "omega-out" => omega_out = Some(value.parse().map_err(|_| bad("omega-out"))?),
                "missing" => missing = value.parse().map_err(|_| bad("missing"))?,
                "sigma" => sigma = value.parse().map_err(|_| bad("sigma"))?,
                "seed" => seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "noise-seed" => noise_seed = Some(value.parse().map_err(|_| bad("noise-seed"))?),
                "label" => label = Some(value.to_string()),
                other => {
                    return Err(CliError::Usage(format!(
                        "config line {}: unknown key {other:?}",
                        i + 1
                    )))
                }
            }
        }

        let seed = seed_override.or(seed).unwrap_or(1);
        let pattern = build_pattern(
            pattern_name.as_deref().unwrap_or("regular"),
            range.as_deref(),
            n,
            jitter,
            gaps.as_deref(),
            t_range.as_deref(),
            z_range.as_deref(),
            omega_out,
        )?;
        let dims = dims.unwrap_or_else(|| pattern.dims());
        if dims != pattern.dims() {
            return Err(CliError::Core(Error::DimensionMismatch {
                expected: dims,
                found: pattern.dims(),
            }));
        }
        let signal = SignalSpec::new(dims, components)?;
        Ok(Self {
            signal,
            sampling: SamplingSpec {
                pattern,
                missing_fraction: missing,
                seed,
            },
            noise_sigma: sigma,
            noise_seed: noise_seed.or(seed_override).unwrap_or(seed),
            label,
        })
    }
}

fn echo_pattern(out: &mut String, pattern: &SamplingPattern) {
    match pattern {
        SamplingPattern::Regular { ranges, steps } => {
            out.push_str("pattern = regular\n");
            out.push_str(&format!("range = {}\n", lattice_ranges(ranges, steps)));
        }
        SamplingPattern::UniformRandom { ranges, n } => {
            out.push_str("pattern = uniform\n");
            let spans = ranges
                .iter()
                .map(|(lo, hi)| format!("{lo}:{hi}"))
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&format!("range = {spans}\n"));
            out.push_str(&format!("n = {n}\n"));
        }
        SamplingPattern::Jittered {
            ranges,
            steps,
            jitter,
        } => {
            out.push_str("pattern = jittered\n");
            out.push_str(&format!("range = {}\n", lattice_ranges(ranges, steps)));
            out.push_str(&format!("jitter = {jitter}\n"));
        }
        SamplingPattern::Gapped { base, gaps } => {
            echo_pattern(out, base);
            let spans = gaps
                .iter()
                .map(|g| format!("{}:{}..{}", g.axis, g.lo, g.hi))
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!("gaps = {spans}\n"));
        }
        SamplingPattern::TwoSensor {
            t_range,
            t_step,
            z_range,
            z_step,
            omega_out,
        } => {
            out.push_str("pattern = two-sensor\n");
            out.push_str(&format!("t-range = {}:{}:{}\n", t_range.0, t_step, t_range.1));
            out.push_str(&format!("z-range = {}:{}:{}\n", z_range.0, z_step, z_range.1));
            out.push_str(&format!("omega-out = {omega_out}\n"));
        }
    }
}

fn lattice_ranges(ranges: &[(f64, f64)], steps: &[f64]) -> String {
    ranges
        .iter()
        .zip(steps)
        .map(|(&(lo, hi), &s)| format!("{lo}:{s}:{hi}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// `f1,..,fm@amplitude@phase`
pub fn parse_component(text: &str) -> Result<SignalComponent, CliError> {
    let parts: Vec<&str> = text.split('@').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "component {text:?}: expected freqs@amplitude@phase"
        )));
    }
    let freq: Vec<f64> = parts[0]
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("component {text:?}: bad frequency list")))?;
    let amplitude: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("component {text:?}: bad amplitude")))?;
    let phase: f64 = parts[2]
        .parse()
        .map_err(|_| CliError::Usage(format!("component {text:?}: bad phase")))?;
    Ok(SignalComponent {
        freq,
        amplitude,
        phase,
    })
}

/// Per-axis `(min, max)` ranges plus the matching step sizes.
pub type LatticeRanges = (Vec<(f64, f64)>, Vec<f64>);

/// `min:step:max[,min:step:max...]`
pub fn parse_lattice_ranges(text: &str) -> Result<LatticeRanges, CliError> {
    let mut ranges = Vec::new();
    let mut steps = Vec::new();
    for part in text.split(',') {
        let fields: Vec<&str> = part.trim().split(':').collect();
        if fields.len() != 3 {
            return Err(CliError::Usage(format!(
                "range {part:?}: expected min:step:max"
            )));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("range {part:?}: bad number {s:?}")))
        };
        let (min, step, max) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
        ranges.push((min, max));
        steps.push(step);
    }
    Ok((ranges, steps))
}

/// `min:max[,min:max...]`
fn parse_box_ranges(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut ranges = Vec::new();
    for part in text.split(',') {
        let fields: Vec<&str> = part.trim().split(':').collect();
        if fields.len() != 2 {
            return Err(CliError::Usage(format!("range {part:?}: expected min:max")));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("range {part:?}: bad number {s:?}")))
        };
        ranges.push((parse(fields[0])?, parse(fields[1])?));
    }
    Ok(ranges)
}

/// `axis:lo..hi[;axis:lo..hi...]`
fn parse_gaps(text: &str) -> Result<Vec<GapInterval>, CliError> {
    let mut gaps = Vec::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (axis, span) = part.split_once(':').ok_or_else(|| {
            CliError::Usage(format!("gap {part:?}: expected axis:lo..hi"))
        })?;
        let (lo, hi) = span.split_once("..").ok_or_else(|| {
            CliError::Usage(format!("gap {part:?}: expected axis:lo..hi"))
        })?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("gap {part:?}: bad number {s:?}")))
        };
        gaps.push(GapInterval {
            axis: axis
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("gap {part:?}: bad axis")))?,
            lo: parse(lo)?,
            hi: parse(hi)?,
        });
    }
    Ok(gaps)
}

#[allow(clippy::too_many_arguments)]
pub fn build_pattern(
    name: &str,
    range: Option<&str>,
    n: Option<usize>,
    jitter: Option<f64>,
    gaps: Option<&str>,
    t_range: Option<&str>,
    z_range: Option<&str>,
    omega_out: Option<f64>,
) -> Result<SamplingPattern, CliError> {
    let need_range = || {
        range.ok_or_else(|| CliError::Usage(format!("pattern {name:?} needs --range")))
    };
    let base = match name {
        "regular" => {
            let (ranges, steps) = parse_lattice_ranges(need_range()?)?;
            SamplingPattern::Regular { ranges, steps }
        }
        "uniform" => {
            let ranges = parse_box_ranges(need_range()?)?;
            let n = n.ok_or_else(|| CliError::Usage("uniform pattern needs --n".into()))?;
            SamplingPattern::UniformRandom { ranges, n }
        }
        "jittered" => {
            let (ranges, steps) = parse_lattice_ranges(need_range()?)?;
            SamplingPattern::Jittered {
                ranges,
                steps,
                jitter: jitter.unwrap_or(0.5),
            }
        }
        "two-sensor" => {
            let parse_axis = |text: Option<&str>, what: &str| -> Result<_, CliError> {
                let text = text.ok_or_else(|| {
                    CliError::Usage(format!("two-sensor pattern needs {what}"))
                })?;
                let (ranges, steps) = parse_lattice_ranges(text)?;
                if ranges.len() != 1 {
                    return Err(CliError::Usage(format!("{what} must be a single axis")));
                }
                Ok((ranges[0], steps[0]))
            };
            let (tr, ts) = parse_axis(t_range, "t-range")?;
            let (zr, zs) = parse_axis(z_range, "z-range")?;
            SamplingPattern::TwoSensor {
                t_range: tr,
                t_step: ts,
                z_range: zr,
                z_step: zs,
                omega_out: omega_out
                    .ok_or_else(|| CliError::Usage("two-sensor pattern needs omega-out".into()))?,
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown pattern {other:?} (expected regular, uniform, jittered, or two-sensor)"
            )))
        }
    };
    Ok(match gaps {
        Some(text) => {
            let gaps = parse_gaps(text)?;
            if gaps.is_empty() {
                base
            } else {
                SamplingPattern::Gapped {
                    base: Box::new(base),
                    gaps,
                }
            }
        }
        None => base,
    })
}
