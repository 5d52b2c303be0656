//! Deterministic artifact writers. CSV uses `,` separators, `.` decimals
//! and scientific notation with 15 significant digits; JSON is pretty
//! printed with stable field order; SVG is plain polylines and axes.

pub mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Format a float for CSV: scientific, 15 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.14e}")
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(content.as_bytes())?;
    Ok(path)
}

pub fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> std::io::Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).expect("json serialization");
    text.push('\n');
    write_text(dir, name, &text)
}
