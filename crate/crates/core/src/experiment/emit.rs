//! Writing reports to CSV and JSON.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::Format;
use super::report::{Cell, ExperimentReport, Section};

/// `%.12g`: twelve significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e12)`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Null => String::new(),
        Cell::Bool(b) => b.to_string(),
        Cell::UInt(v) => v.to_string(),
        Cell::Int(v) => v.to_string(),
        Cell::Real(v) => format_real(*v),
        Cell::Text(s) => s.clone(),
    }
}

/// One section as CSV text with LF line endings.
pub fn section_csv(section: &Section) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::IoFailure(e.to_string());
    w.write_record(&section.columns).map_err(io)?;
    for row in &section.rows {
        w.write_record(row.iter().map(cell_text)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::IoFailure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::IoFailure(e.to_string()))
}

pub fn report_json(report: &ExperimentReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn report_from_json(text: &str) -> Result<ExperimentReport> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        pos: e.column(),
        msg: e.to_string(),
    })
}

/// Writes `<kind>_<section>.csv` files and/or `<kind>_report.json` under
/// `dir`, returning the paths written.
pub fn emit(report: &ExperimentReport, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let kind = report.config.kind.name();
    let mut written = Vec::new();
    if matches!(format, Format::Csv | Format::Both) {
        for section in &report.sections {
            let path = dir.join(format!("{kind}_{}.csv", section.name));
            fs::write(&path, section_csv(section)?)?;
            written.push(path);
        }
    }
    if matches!(format, Format::Json | Format::Both) {
        let path = dir.join(format!("{kind}_report.json"));
        fs::write(&path, report_json(report))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_real(0.5), "0.5");
        assert_eq!(format_real(2.0), "2");
        assert_eq!(format_real(-1.25), "-1.25");
        assert_eq!(format_real(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_real(180.90169943749474), "180.901699437");
        assert_eq!(format_real(1e-7), "1e-07");
        assert_eq!(format_real(1.5e13), "1.5e+13");
        assert_eq!(format_real(123456789012.0), "123456789012");
        assert_eq!(format_real(0.000123), "0.000123");
        assert_eq!(format_real(9.9999999999999), "10");
    }

    #[test]
    fn csv_layout() {
        let mut s = Section::new("t", &["a", "b", "c"]);
        s.push(vec![Cell::from(1u64), Cell::real(0.25), Cell::text("x, y")]);
        s.push(vec![Cell::Null, Cell::from(false), Cell::int(-2)]);
        assert_eq!(section_csv(&s).unwrap(), "a,b,c\n1,0.25,\"x, y\"\n,false,-2\n");
    }
}
