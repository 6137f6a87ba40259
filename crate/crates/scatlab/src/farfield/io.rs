//! Pattern and matrix CSV files.
//!
//! Pattern file: `# k=`, `# d_angle=`, `# M=` header lines, then M rows
//! `angle_rad,re,im` with ascending angles 2*pi*m/M. Matrix file: `# k=`,
//! `# M=`, `# L=`, then rows `obs_angle,inc_angle,re,im` in row-major
//! order (observation outer). Floats carry 17 significant digits so a
//! write/read round trip is bit exact.

use super::{DirectionGrid, FarFieldMatrix, FarFieldPattern, FieldError};
use num_complex::Complex64;
use std::io::{BufRead, BufReader, Read, Write};

/// Fixed-width scientific format with 17 significant digits.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

pub fn write_pattern<W: Write>(w: &mut W, p: &FarFieldPattern) -> Result<(), FieldError> {
    writeln!(w, "# k={}", fmt_f64(p.k))?;
    writeln!(w, "# d_angle={}", fmt_f64(p.d_angle))?;
    writeln!(w, "# M={}", p.grid.len())?;
    for (i, s) in p.samples.iter().enumerate() {
        writeln!(w, "{},{},{}", fmt_f64(p.grid.angle(i)), fmt_f64(s.re), fmt_f64(s.im))?;
    }
    Ok(())
}

pub fn read_pattern<R: Read>(r: R) -> Result<FarFieldPattern, FieldError> {
    let reader = BufReader::new(r);
    let mut k = None;
    let mut d_angle = None;
    let mut m = None;
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("k=") {
                k = Some(parse_f64(v, lineno)?);
            } else if let Some(v) = rest.strip_prefix("d_angle=") {
                d_angle = Some(parse_f64(v, lineno)?);
            } else if let Some(v) = rest.strip_prefix("M=") {
                m = Some(parse_usize(v, lineno)?);
            }
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 3 {
            return Err(FieldError::Parse {
                line: lineno,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let re = parse_f64(fields[1], lineno)?;
        let im = parse_f64(fields[2], lineno)?;
        samples.push(Complex64::new(re, im));
    }
    let k = k.ok_or_else(|| missing("k"))?;
    let d_angle = d_angle.ok_or_else(|| missing("d_angle"))?;
    let m = m.ok_or_else(|| missing("M"))?;
    if samples.len() != m {
        return Err(FieldError::Parse {
            line: 0,
            message: format!("header says M={} but found {} rows", m, samples.len()),
        });
    }
    FarFieldPattern::new(k, d_angle, DirectionGrid::new(m)?, samples)
}

pub fn write_matrix<W: Write>(w: &mut W, mat: &FarFieldMatrix) -> Result<(), FieldError> {
    writeln!(w, "# k={}", fmt_f64(mat.k))?;
    writeln!(w, "# M={}", mat.obs.len())?;
    writeln!(w, "# L={}", mat.inc.len())?;
    for mo in 0..mat.obs.len() {
        for li in 0..mat.inc.len() {
            let s = mat.at(mo, li);
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(mat.obs.angle(mo)),
                fmt_f64(mat.inc.angle(li)),
                fmt_f64(s.re),
                fmt_f64(s.im)
            )?;
        }
    }
    Ok(())
}

pub fn read_matrix<R: Read>(r: R) -> Result<FarFieldMatrix, FieldError> {
    let reader = BufReader::new(r);
    let mut k = None;
    let mut m = None;
    let mut l = None;
    let mut values = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("k=") {
                k = Some(parse_f64(v, lineno)?);
            } else if let Some(v) = rest.strip_prefix("M=") {
                m = Some(parse_usize(v, lineno)?);
            } else if let Some(v) = rest.strip_prefix("L=") {
                l = Some(parse_usize(v, lineno)?);
            }
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 4 {
            return Err(FieldError::Parse {
                line: lineno,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let re = parse_f64(fields[2], lineno)?;
        let im = parse_f64(fields[3], lineno)?;
        values.push(Complex64::new(re, im));
    }
    let k = k.ok_or_else(|| missing("k"))?;
    let m = m.ok_or_else(|| missing("M"))?;
    let l = l.ok_or_else(|| missing("L"))?;
    if values.len() != m * l {
        return Err(FieldError::Parse {
            line: 0,
            message: format!("header says {}x{} but found {} rows", m, l, values.len()),
        });
    }
    Ok(FarFieldMatrix { k, obs: DirectionGrid::new(m)?, inc: DirectionGrid::new(l)?, samples: values })
}

fn parse_f64(s: &str, line: usize) -> Result<f64, FieldError> {
    s.trim().parse::<f64>().map_err(|e| FieldError::Parse { line, message: format!("bad float {:?}: {}", s, e) })
}

fn parse_usize(s: &str, line: usize) -> Result<usize, FieldError> {
    s.trim()
        .parse::<usize>()
        .map_err(|e| FieldError::Parse { line, message: format!("bad integer {:?}: {}", s, e) })
}

fn missing(field: &str) -> FieldError {
    FieldError::Parse { line: 0, message: format!("missing header field {}", field) }
}
