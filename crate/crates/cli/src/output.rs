//! Canonical JSON, CSV and atomic file output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::CliError;

/// Floats with 17 significant digits, which round-trip every `f64`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // JSON has no representation; CSV readers accept these spellings
        format!("{v}")
    }
}

struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Sorted keys, 17-digit floats, trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    // routing through Value sorts object keys
    let value = serde_json::to_value(value).map_err(|e| CliError::Io(format!("serialize: {e}")))?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    value.serialize(&mut ser).map_err(|e| CliError::Io(format!("serialize: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_atomic(path, &canonical_json(value)?)
}

/// A CSV table; every cell is already formatted.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Io(format!("csv: {e}"));
        w.write_record(&self.header).map_err(err)?;
        for row in &self.rows {
            w.write_record(row).map_err(err)?;
        }
        w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
    }
}

/// Writes the table and a `<name>.manifest.json` sidecar holding `manifest`.
pub fn write_csv<M: Serialize>(path: &Path, table: &Table, manifest: &M) -> Result<(), CliError> {
    write_atomic(path, &table.to_bytes()?)?;
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".manifest.json");
    let mut doc = BTreeMap::new();
    doc.insert("manifest", serde_json::to_value(manifest).map_err(|e| CliError::Io(e.to_string()))?);
    doc.insert("file", serde_json::Value::from(path.file_name().and_then(|f| f.to_str()).unwrap_or_default()));
    write_json(Path::new(&sidecar), &doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, 5e-324] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn keys_are_sorted() {
        let v = serde_json::json!({"b": 1, "a": {"d": 0.5, "c": [1.0]}});
        let s = String::from_utf8(canonical_json(&v).unwrap()).unwrap();
        assert_eq!(s, "{\"a\":{\"c\":[1.0000000000000000e0],\"d\":5.0000000000000000e-1},\"b\":1}\n");
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = Table::new(vec!["m", "cylinder"]);
        t.rows.push(vec!["1".into(), "0 1".into()]);
        t.rows.push(vec!["2".into(), "a,b".into()]);
        assert_eq!(t.to_bytes().unwrap(), b"m,cylinder\r\n1,0 1\r\n2,\"a,b\"\r\n");
    }
}
