//! CSV emission for experiment data files.
//!
//! Trial file rows: `index,k,d_angle,delta,excluded`. Scan file rows:
//! `k,delta` (NaN delta for excluded points keeps the row count equal to
//! the grid size). Floats carry 17 significant digits; the files are
//! byte-stable across reruns of the same configuration.

use super::{KScanReport, TrialRecord};
use std::io::Write;

fn fmt(v: f64) -> String {
    format!("{:.16e}", v)
}

pub fn write_trials_csv<W: Write>(w: &mut W, records: &[TrialRecord]) -> std::io::Result<()> {
    writeln!(w, "index,k,d_angle,delta,excluded")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.index,
            fmt(r.k),
            fmt(r.d_angle),
            fmt(r.delta),
            if r.excluded { 1 } else { 0 }
        )?;
    }
    Ok(())
}

pub fn write_kscan_csv<W: Write>(w: &mut W, report: &KScanReport) -> std::io::Result<()> {
    writeln!(w, "k,delta")?;
    for p in &report.points {
        writeln!(w, "{},{}", fmt(p.k), fmt(p.delta))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trials_csv_has_header_and_one_row_per_trial() {
        let records = vec![
            TrialRecord {
                index: 0,
                k: 1.25,
                d_angle: 0.5,
                delta: 1e-3,
                excluded: false,
                note: None,
                seconds: 0.0,
            },
            TrialRecord {
                index: 1,
                k: 2.0,
                d_angle: 1.0,
                delta: f64::NAN,
                excluded: true,
                note: Some("failed".into()),
                seconds: 0.0,
            },
        ];
        let mut buf = Vec::new();
        write_trials_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "index,k,d_angle,delta,excluded");
        assert!(lines[1].ends_with(",0"));
        assert!(lines[2].ends_with(",1"));
    }
}
