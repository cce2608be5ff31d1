//! Photon timestamp files and CSV curves.

use std::path::Path;

use g2beam::montecarlo::PhotonEvent;

use crate::{CliError, Result};

pub const TIMESTAMP_HEADER: &str = "# photon-timestamps v1";

/// Shortest round-trip decimal, padded to at least nine fractional digits.
pub fn format_time(t: f64) -> String {
    let mut s = t.to_string();
    let frac = match s.find('.') {
        Some(i) => s.len() - i - 1,
        None => {
            s.push('.');
            0
        }
    };
    for _ in frac..9 {
        s.push('0');
    }
    s
}

pub fn write_timestamps(events: &[PhotonEvent]) -> String {
    let mut out = String::with_capacity(TIMESTAMP_HEADER.len() + 1 + events.len() * 16);
    out.push_str(TIMESTAMP_HEADER);
    out.push('\n');
    for e in events {
        out.push_str(&format_time(e.time));
        out.push(',');
        out.push_str(&e.detector.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_timestamps(text: &str, path: &Path) -> Result<Vec<PhotonEvent>> {
    let fail = |line: usize, reason: String| CliError::Format {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines();
    if lines.next() != Some(TIMESTAMP_HEADER) {
        return Err(fail(1, format!("expected header `{TIMESTAMP_HEADER}`")));
    }
    let mut events = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let (t, d) = line
            .split_once(',')
            .ok_or_else(|| fail(n, "expected `time_s,detector`".into()))?;
        let time: f64 = t.parse().map_err(|_| fail(n, format!("bad time `{t}`")))?;
        if !time.is_finite() || time < 0.0 {
            return Err(fail(
                n,
                format!("time must be finite and non-negative, got `{t}`"),
            ));
        }
        if time < last {
            return Err(fail(n, "times must be nondecreasing".into()));
        }
        let detector = match d {
            "0" => 0,
            "1" => 1,
            _ => return Err(fail(n, format!("detector must be 0 or 1, got `{d}`"))),
        };
        last = time;
        events.push(PhotonEvent { time, detector });
    }
    Ok(events)
}

/// CSV with a fixed set of named numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFile {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CurveFile {
    pub fn new(header: &[&str], columns: Vec<Vec<f64>>) -> Result<Self> {
        assert_eq!(header.len(), columns.len(), "one header per column");
        let rows = columns.first().map_or(0, Vec::len);
        for (name, col) in header.iter().zip(&columns) {
            assert_eq!(col.len(), rows, "column `{name}` has the wrong length");
            if let Some(x) = col.iter().find(|x| !x.is_finite()) {
                return Err(g2beam::Error::NumericFailure(format!(
                    "non-finite value {x} in column `{name}`"
                ))
                .into());
            }
        }
        Ok(CurveFile {
            header: header.iter().map(|s| s.to_string()).collect(),
            columns,
        })
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(&self.columns[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in 0..self.rows() {
            let row: Vec<String> = self.columns.iter().map(|c| c[r].to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let fail = |line: usize, reason: String| CliError::Format {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| fail(1, "missing header".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut columns = vec![Vec::new(); header.len()];
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(fail(i + 2, format!("expected {} fields", header.len())));
            }
            for (col, f) in columns.iter_mut().zip(fields) {
                let x: f64 = f
                    .parse()
                    .map_err(|_| fail(i + 2, format!("bad number `{f}`")))?;
                if !x.is_finite() {
                    return Err(fail(i + 2, format!("non-finite value `{f}`")));
                }
                col.push(x);
            }
        }
        Ok(CurveFile { header, columns })
    }
}
