//! Bit-stable JSON and CSV output.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;
use wcomp_core::{Error, Result};

use crate::analysis::{AnalysisReport, EntryStatus};

/// Compact JSON formatter that writes every float with 17 significant digits.
struct FixedFloat;

impl Formatter for FixedFloat {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

/// JSON with fixed field order and `{:.16e}` floats; non-finite
/// floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat);
    value.serialize(&mut ser).map_err(|e| Error::Numerical(format!("report serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn parse_report(text: &str) -> Result<AnalysisReport> {
    serde_json::from_str(text).map_err(|e| Error::Spec(format!("report does not parse: {e}")))
}

pub fn write_json(report: &AnalysisReport, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(report)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes `<criterion>.csv` into `dir` for every completed criterion with a
/// probe profile. Returns the files written, in report order.
pub fn write_profiles(report: &AnalysisReport, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for entry in &report.criteria {
        let Some(r) = entry.report.as_ref().filter(|r| entry.status == EntryStatus::Completed && !r.points.is_empty())
        else {
            continue;
        };
        let path = dir.join(format!("{}.csv", entry.criterion.name()));
        std::fs::write(&path, r.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_are_fixed_width_and_roundtrip() {
        let xs = vec![0.1, 1.0, -2.5e-300, 1.0 / 3.0, f64::MAX, 5e-324];
        let s = to_json(&xs).unwrap();
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("1.0000000000000000e0"));
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, xs);
        assert_eq!(to_json(&vec![f64::NAN]).unwrap(), "[null]\n");
    }
}
