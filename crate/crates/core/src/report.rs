//! Output plumbing: CSV tables (RFC 4180 records, 17-significant-digit
//! floats), a JSON writer with the same float convention, and the body hash
//! used by the reproducibility contract.
//!
//! Every CSV file starts with one `# timestamp:` comment line followed by
//! the header row; the recorded SHA-256 covers everything after that first
//! line, so re-runs of the same configuration are byte-identical in the
//! hashed body.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// A float with 17 significant digits; round-trips f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else {
        "null".to_string()
    }
}

fn escape_csv(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Render header and rows as the hashable CSV body (CRLF records).
pub fn csv_body(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut body = String::new();
    body.push_str(&header.iter().map(|h| escape_csv(h)).collect::<Vec<_>>().join(","));
    body.push_str("\r\n");
    for row in rows {
        body.push_str(&row.iter().map(|f| escape_csv(f)).collect::<Vec<_>>().join(","));
        body.push_str("\r\n");
    }
    body
}

pub fn sha256_hex(data: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write `<path>` with a timestamp comment line plus the CSV body; returns
/// the SHA-256 of the body (timestamp excluded).
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let body = csv_body(header, rows);
    let hash = sha256_hex(&body);
    let ts = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "# timestamp: {ts}")?;
    file.write_all(body.as_bytes())?;
    Ok(hash)
}

/// Read a CSV artifact back and hash its body (everything after the first
/// line); used to verify reproducibility.
pub fn hash_csv_file(path: &Path) -> Result<String> {
    let content = std::fs::read_to_string(path)?;
    let body = match content.find('\n') {
        Some(i) => &content[i + 1..],
        None => "",
    };
    Ok(sha256_hex(body))
}

struct SigDigitFormatter;

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{}", fmt_f64(value))
    }
}

/// Serialise to JSON with 17-significant-digit floats (pretty layout is not
/// needed; outputs are machine-read).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("json is utf-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let s = to_json_string(value)?;
    std::fs::write(path, s)?;
    Ok(())
}
