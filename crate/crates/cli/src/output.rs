//! Deterministic file and stdout emission: atomic writes (temp + rename),
//! values rounded to 12 significant digits before JSON serialization, no
//! timestamps anywhere.

use std::path::{Path, PathBuf};

use paramp_core::{Error, Result};

/// Write a file atomically: contents land under a temporary name in the
/// same directory and are renamed into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Render a serializable value as pretty JSON with a trailing newline.
pub fn to_json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::ParseError(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text.into_bytes())
}

/// Round for JSON output; keeps summaries at the same 12-significant-digit
/// precision as the CSV interchange files.
pub fn sig12(x: f64) -> f64 {
    paramp_core::round_sig12(x)
}

/// Optional value rounded the same way.
pub fn sig12_opt(x: Option<f64>) -> Option<f64> {
    x.map(sig12)
}
