//! Fit reports as text records and CSV.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub parameter: String,
    pub value: f64,
    pub std_error: f64,
    pub unit: String,
}

impl ReportRow {
    pub fn new(parameter: &str, value: f64, std_error: f64, unit: &str) -> Self {
        ReportRow { parameter: parameter.into(), value, std_error, unit: unit.into() }
    }
}

impl fmt::Display for ReportRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<16} {:>14.6e} +/- {:<12.3e} {}", self.parameter, self.value, self.std_error, self.unit)
    }
}

/// One line per row.
pub fn report_text(rows: &[ReportRow]) -> String {
    rows.iter().map(|r| format!("{r}\n")).collect()
}

/// CSV with columns `parameter, value, std_error, unit`.
pub fn write_report_csv<W: Write>(rows: &[ReportRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header() {
        let mut buf = Vec::new();
        write_report_csv(&[ReportRow::new("gamma", 0.2, 0.01, "1/us")], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("parameter,value,std_error,unit"));
        assert!(report_text(&[ReportRow::new("t0", 1.0, 0.0, "us")]).contains("us"));
    }
}
