//! CSV formats.
//!
//! Three pinned formats, all comma-separated with `.` as the decimal point:
//!
//! * **Samples**: header `t1,...,tm,value`, one row per sample. `nan`
//!   (case-insensitive) is permitted in the `value` column only and marks a
//!   missing sample, dropped at ingestion. Values are written in the
//!   shortest representation that re-parses to the same bits.
//! * **Spectrum**: header
//!   `f1,...,fm,tau_star,a,b,amplitude,phase,psd,prob,fap`, full double
//!   precision (17 significant digits). Frequencies are always ordinary;
//!   `prob`/`fap` cells are empty when the statistic was unavailable.
//! * **Gridded field**: comment header block `# dims=`, `# shape=`,
//!   `# origin=`, `# spacing=` followed by `i1,...,im,value` rows covering
//!   every cell exactly once (row-major, last index fastest); `nan` marks
//!   missing cells.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::baselines::GriddedField;
use crate::error::{Error, Result};
use crate::types::{DegeneracyFlags, SampleSet, Spectrum, SpectrumPoint};

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a number, found {tok:?}"),
    })
}

/// Write a sample set in the pinned sample CSV format.
pub fn write_samples_to(w: &mut impl Write, samples: &SampleSet) -> Result<()> {
    for j in 1..=samples.dims() {
        write!(w, "t{j},")?;
    }
    writeln!(w, "value")?;
    for (coord, v) in samples.coords().zip(samples.values()) {
        for c in coord {
            write!(w, "{c},")?;
        }
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn write_samples_csv(path: impl AsRef<Path>, samples: &SampleSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_samples_to(&mut w, samples)?;
    w.flush()?;
    Ok(())
}

/// Read a sample CSV. Rows with a non-finite value are dropped as missing;
/// a non-finite coordinate is a format error.
pub fn read_samples_from(r: impl BufRead) -> Result<SampleSet> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = header?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let dims = cols.len().saturating_sub(1);
    if dims == 0 || cols.last() != Some(&"value") {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header t1,...,tm,value, found {header:?}"),
        });
    }
    for (j, col) in cols[..dims].iter().enumerate() {
        if *col != format!("t{}", j + 1) {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected column t{}, found {col:?}", j + 1),
            });
        }
    }
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.trim().split(',').collect();
        if toks.len() != dims + 1 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {} fields, found {}", dims + 1, toks.len()),
            });
        }
        for tok in &toks[..dims] {
            let c = parse_f64(tok, line_no)?;
            if !c.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "non-finite coordinate (nan is permitted in the value column only)"
                        .into(),
                });
            }
            coords.push(c);
        }
        values.push(parse_f64(toks[dims], line_no)?);
    }
    SampleSet::from_flat(dims, coords, values)
}

pub fn read_samples_csv(path: impl AsRef<Path>) -> Result<SampleSet> {
    read_samples_from(BufReader::new(File::open(path)?))
}

fn write_opt(w: &mut impl Write, v: Option<f64>) -> Result<()> {
    if let Some(x) = v {
        write!(w, "{x:.16e}")?;
    }
    Ok(())
}

/// Write a spectrum in the pinned spectrum CSV format (ordinary
/// frequencies, 17 significant digits).
pub fn write_spectrum_to(w: &mut impl Write, spectrum: &Spectrum) -> Result<()> {
    for j in 1..=spectrum.dims {
        write!(w, "f{j},")?;
    }
    writeln!(w, "tau_star,a,b,amplitude,phase,psd,prob,fap")?;
    for p in &spectrum.points {
        let freq = match spectrum.convention {
            crate::types::FrequencyConvention::Ordinary => p.freq.clone(),
            crate::types::FrequencyConvention::Angular => {
                p.freq.iter().map(|f| f / std::f64::consts::TAU).collect()
            }
        };
        for f in &freq {
            write!(w, "{f:.16e},")?;
        }
        write!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},",
            p.tau_star, p.a, p.b, p.amplitude, p.phase, p.psd
        )?;
        write_opt(w, p.prob_exceed)?;
        write!(w, ",")?;
        write_opt(w, p.fap)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_spectrum_csv(path: impl AsRef<Path>, spectrum: &Spectrum) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_spectrum_to(&mut w, spectrum)?;
    w.flush()?;
    Ok(())
}

/// Read spectrum points back from CSV. Returns the dimensionality and the
/// points, with frequencies in ordinary units; degeneracy flags are not
/// serialized and come back clear.
pub fn read_spectrum_from(r: impl BufRead) -> Result<(usize, Vec<SpectrumPoint>)> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = header?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    const TAIL: [&str; 8] = [
        "tau_star",
        "a",
        "b",
        "amplitude",
        "phase",
        "psd",
        "prob",
        "fap",
    ];
    if cols.len() <= TAIL.len() || cols[cols.len() - TAIL.len()..] != TAIL {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected spectrum header {header:?}"),
        });
    }
    let dims = cols.len() - TAIL.len();
    let mut points = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.trim().split(',').collect();
        if toks.len() != dims + TAIL.len() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "expected {} fields, found {}",
                    dims + TAIL.len(),
                    toks.len()
                ),
            });
        }
        let freq: Vec<f64> = toks[..dims]
            .iter()
            .map(|t| parse_f64(t, line_no))
            .collect::<Result<_>>()?;
        let num = |k: usize| parse_f64(toks[dims + k], line_no);
        let opt = |k: usize| -> Result<Option<f64>> {
            let t = toks[dims + k].trim();
            if t.is_empty() {
                Ok(None)
            } else {
                parse_f64(t, line_no).map(Some)
            }
        };
        let (a, b) = (num(1)?, num(2)?);
        points.push(SpectrumPoint {
            freq,
            tau_star: num(0)?,
            a,
            b,
            amplitude: num(3)?,
            phase: num(4)?,
            psd: num(5)?,
            prob_exceed: opt(6)?,
            fap: opt(7)?,
            flags: DegeneracyFlags::default(),
        });
    }
    Ok((dims, points))
}

pub fn read_spectrum_csv(path: impl AsRef<Path>) -> Result<(usize, Vec<SpectrumPoint>)> {
    read_spectrum_from(BufReader::new(File::open(path)?))
}

/// Write a gridded field: `#`-prefixed lattice header, then one row per
/// cell in row-major order with `nan` for missing cells.
pub fn write_field_to(w: &mut impl Write, field: &GriddedField) -> Result<()> {
    writeln!(w, "# dims={}", field.dims())?;
    writeln!(w, "# shape={}", join(field.shape().iter()))?;
    writeln!(w, "# origin={}", join(field.origin().iter()))?;
    writeln!(w, "# spacing={}", join(field.spacing().iter()))?;
    for j in 1..=field.dims() {
        write!(w, "i{j},")?;
    }
    writeln!(w, "value")?;
    let dims = field.dims();
    let shape = field.shape();
    let mut idx = vec![0usize; dims];
    for &v in field.values() {
        for i in &idx {
            write!(w, "{i},")?;
        }
        if v.is_finite() {
            writeln!(w, "{v}")?;
        } else {
            writeln!(w, "nan")?;
        }
        let mut j = dims;
        while j > 0 {
            j -= 1;
            idx[j] += 1;
            if idx[j] < shape[j] {
                break;
            }
            idx[j] = 0;
        }
    }
    Ok(())
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_field_csv(path: impl AsRef<Path>, field: &GriddedField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field_to(&mut w, field)?;
    w.flush()?;
    Ok(())
}

/// Read a gridded field. Every cell must appear exactly once.
pub fn read_field_from(r: impl BufRead) -> Result<GriddedField> {
    let mut shape: Option<Vec<usize>> = None;
    let mut origin: Option<Vec<f64>> = None;
    let mut spacing: Option<Vec<f64>> = None;
    let mut dims: Option<usize> = None;
    let mut values: Option<Vec<Option<f64>>> = None;
    let mut header_seen = false;

    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let (key, val) = rest.split_once('=').ok_or(Error::Parse {
                line: line_no,
                msg: format!("expected `# key=value`, found {trimmed:?}"),
            })?;
            let val = val.trim();
            match key.trim() {
                "dims" => {
                    dims = Some(val.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("bad dims {val:?}"),
                    })?)
                }
                "shape" => {
                    shape = Some(
                        val.split(',')
                            .map(|t| {
                                t.trim().parse().map_err(|_| Error::Parse {
                                    line: line_no,
                                    msg: format!("bad shape entry {t:?}"),
                                })
                            })
                            .collect::<Result<_>>()?,
                    )
                }
                "origin" => {
                    origin = Some(
                        val.split(',')
                            .map(|t| parse_f64(t, line_no))
                            .collect::<Result<_>>()?,
                    )
                }
                "spacing" => {
                    spacing = Some(
                        val.split(',')
                            .map(|t| parse_f64(t, line_no))
                            .collect::<Result<_>>()?,
                    )
                }
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unknown field header {other:?}"),
                    })
                }
            }
            continue;
        }
        if !header_seen {
            // the i1,...,im,value column row
            header_seen = true;
            let d = dims.ok_or(Error::Parse {
                line: line_no,
                msg: "missing `# dims=` header".into(),
            })?;
            let expected: Vec<String> = (1..=d)
                .map(|j| format!("i{j}"))
                .chain(std::iter::once("value".into()))
                .collect();
            let cols: Vec<&str> = trimmed.split(',').collect();
            if cols != expected.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unexpected field columns {trimmed:?}"),
                });
            }
            let s = shape.as_ref().ok_or(Error::Parse {
                line: line_no,
                msg: "missing `# shape=` header".into(),
            })?;
            values = Some(vec![None; s.iter().product()]);
            continue;
        }
        let d = dims.unwrap();
        let s = shape.as_ref().unwrap();
        let slots = values.as_mut().unwrap();
        let toks: Vec<&str> = trimmed.split(',').collect();
        if toks.len() != d + 1 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {} fields, found {}", d + 1, toks.len()),
            });
        }
        let mut flat = 0usize;
        for (j, tok) in toks[..d].iter().enumerate() {
            let idx: usize = tok.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad cell index {tok:?}"),
            })?;
            if idx >= s[j] {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("cell index {idx} out of range for axis {j}"),
                });
            }
            flat = flat * s[j] + idx;
        }
        if slots[flat].is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: "duplicate cell".into(),
            });
        }
        slots[flat] = Some(parse_f64(toks[d], line_no)?);
    }

    let (shape, origin, spacing, values) = match (shape, origin, spacing, values) {
        (Some(s), Some(o), Some(d), Some(v)) => (s, o, d, v),
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "incomplete field file (need dims, shape, origin, spacing, cells)".into(),
            })
        }
    };
    let mut dense = Vec::with_capacity(values.len());
    for (i, v) in values.into_iter().enumerate() {
        match v {
            Some(x) => dense.push(x),
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("cell {i} missing from field file"),
                })
            }
        }
    }
    GriddedField::new(shape, origin, spacing, dense)
}

pub fn read_field_csv(path: impl AsRef<Path>) -> Result<GriddedField> {
    read_field_from(BufReader::new(File::open(path)?))
}
