//! Sweep CSV: `#` comment lines, one header line, one row per point.
//!
//! Numbers are written in scientific notation with 17 significant digits so
//! every `f64` survives a write/parse round trip unchanged.

use std::io::{self, Write};

use crate::analysis::SweepResult;
use crate::keyrate::{Scenario, ScenarioRates};

pub const HEADER: &str = "scenario,distance_km,q_total,e_total,q1,e1,rate,rate_clamped";

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_row(r: &ScenarioRates) -> String {
    let nums = [
        r.distance_km,
        r.q_total,
        r.e_total,
        r.q1,
        r.e1,
        r.rate,
        r.rate_clamped,
    ];
    let mut row = r.scenario.name().to_string();
    for x in nums {
        row.push(',');
        row.push_str(&format_number(x));
    }
    row
}

/// Writes comments (each prefixed `# `), the header and all rows.
pub fn write_sweep_csv<W: Write>(out: &mut W, comments: &[String], result: &SweepResult) -> io::Result<()> {
    for line in comments {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "{HEADER}")?;
    for point in result.points() {
        writeln!(out, "{}", format_row(point))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("CSV line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

/// Parses rows written by [`write_sweep_csv`], skipping comments and blanks.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<ScenarioRates>, CsvError> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        let err = |message: String| CsvError { line: i + 1, message };
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(err(format!("expected header '{HEADER}'")));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(err(format!("expected 8 fields, found {}", fields.len())));
        }
        let scenario: Scenario = fields[0].parse().map_err(err)?;
        let mut nums = [0.0; 7];
        for (slot, field) in nums.iter_mut().zip(&fields[1..]) {
            *slot = field
                .parse()
                .map_err(|_| err(format!("cannot parse '{field}' as a number")))?;
        }
        rows.push(ScenarioRates {
            scenario,
            distance_km: nums[0],
            q_total: nums[1],
            e_total: nums[2],
            q1: nums[3],
            e1: nums[4],
            rate: nums[5],
            rate_clamped: nums[6],
        });
    }
    if !seen_header {
        return Err(CsvError {
            line: 0,
            message: "missing header".to_string(),
        });
    }
    Ok(rows)
}
