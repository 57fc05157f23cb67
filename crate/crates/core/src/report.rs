//! CSV and JSON output for sweep results.

use std::io::Write;

use serde::Serialize;

use crate::analysis::SweepPoint;
use crate::dsl::format_real;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 9] = [
    "alpha",
    "n",
    "m",
    "mode",
    "fidelity",
    "p_success_sim",
    "p_success_theory",
    "false_vacuum_total",
    "term_count",
];

/// Parse `START:STOP:STEP` into `start + k·step` for `k = 0 ..= ⌊(stop−start)/step⌋`.
pub fn parse_alpha_range(range: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parameter(format!(
            "alpha range `{range}` must look like START:STOP:STEP"
        )));
    }
    let nums = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parameter(format!("bad number `{p}` in alpha range")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 {
        return Err(Error::Parameter(format!(
            "alpha step must be positive, got {step}"
        )));
    }
    if stop < start {
        return Err(Error::Parameter(format!(
            "alpha range is empty: {start} > {stop}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(Error::Parameter(format!("alpha range has {count} points")));
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Domain(format!("write failed: {e}"))
}

pub fn write_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for p in points {
        w.write_record([
            format_real(p.alpha),
            p.n_logical.to_string(),
            p.m_physical.to_string(),
            p.selection_mode.clone(),
            format_real(p.fidelity),
            format_real(p.p_success_sim),
            format_real(p.p_success_theory),
            format_real(p.false_vacuum_total),
            p.term_count.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Serialize)]
struct JsonReport<'a> {
    version: u32,
    points: &'a [SweepPoint],
}

pub fn write_json<W: Write>(points: &[SweepPoint], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &JsonReport { version: 1, points }).map_err(io_err)?;
    writeln!(out).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(alpha: f64) -> SweepPoint {
        SweepPoint {
            alpha,
            n_logical: 2,
            m_physical: 2,
            selection_mode: "branch".into(),
            fidelity: 1.0 - 1.234e-7,
            p_success_sim: 0.125,
            p_success_theory: 0.125,
            false_vacuum_total: 3.3546262790251185e-4,
            term_count: 4,
        }
    }

    #[test]
    fn range_examples() {
        assert_eq!(parse_alpha_range("1:4:0.5").unwrap().len(), 7);
        assert_eq!(parse_alpha_range("0.1:0.3:0.1").unwrap().len(), 3);
        assert_eq!(parse_alpha_range("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_alpha_range("1:4").is_err());
        assert!(parse_alpha_range("1:4:0").is_err());
        assert!(parse_alpha_range("4:1:1").is_err());
        assert!(parse_alpha_range("a:1:1").is_err());
    }

    #[test]
    fn csv_and_json_agree() {
        let pts = vec![point(1.0), point(1.5)];
        let mut csv_buf = Vec::new();
        write_csv(&pts, &mut csv_buf).unwrap();
        let text = String::from_utf8(csv_buf).unwrap();
        assert!(text.starts_with(&CSV_HEADER.join(",")));
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let from_csv: Vec<SweepPoint> = rdr.deserialize().map(|r| r.unwrap()).collect();

        let mut json_buf = Vec::new();
        write_json(&pts, &mut json_buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json_buf).unwrap();
        assert_eq!(v["version"], 1);
        let from_json: Vec<SweepPoint> = serde_json::from_value(v["points"].clone()).unwrap();
        for (a, b) in from_csv.iter().zip(&from_json) {
            assert_eq!(a.fidelity.to_bits(), b.fidelity.to_bits());
            assert_eq!(
                a.false_vacuum_total.to_bits(),
                b.false_vacuum_total.to_bits()
            );
            assert_eq!(a, b);
        }
        assert_eq!(from_json, pts);
    }
}
