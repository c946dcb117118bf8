//! Shared text formatting for CSV outputs.

use std::path::Path;

use crate::error::{Error, Result};

/// 17 significant digits: parses back to the identical `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn parse_f64(field: &str, path: &Path, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(path, format!("line {line}: '{field}' is not a number")))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Serializes rows of floats as CSV with the given header.
pub fn rows_to_csv<'a>(header: &[String], rows: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(row.iter().map(|x| fmt_f64(*x))).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV output is ASCII")
}

/// Parses a CSV of floats, returning header and rows.
pub fn csv_to_rows(text: &str, path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::parse(path, e))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(Error::parse(path, "missing header row"));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        if rec.len() != header.len() {
            return Err(Error::parse(path, format!("line {}: expected {} fields", i + 2, header.len())));
        }
        rows.push(rec.iter().map(|f| parse_f64(f, path, i + 2)).collect::<Result<Vec<_>>>()?);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn float_text_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
            prop_assert_eq!(fmt_f64(back), s);
        }
    }

    #[test]
    fn csv_round_trip() {
        let header = vec!["a".to_string(), "b".to_string()];
        let rows = [vec![1.0, -2.5], vec![0.1, 1e-300]];
        let text = rows_to_csv(&header, rows.iter().map(|r| r.as_slice()));
        let (h, back) = csv_to_rows(&text, Path::new("mem")).unwrap();
        assert_eq!(h, header);
        assert_eq!(back, rows);
        assert_eq!(rows_to_csv(&h, back.iter().map(|r| r.as_slice())), text);
    }
}
