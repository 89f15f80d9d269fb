//! Reading documents and writing outputs atomically.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::error::Result;
use crate::json;

pub fn read_json(path: &Path) -> Result<Value> {
    json::parse(&fs::read_to_string(path)?)
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place, so an interrupted run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    // temporary files are created owner-only
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let mode = fs::metadata(path).map(|m| m.permissions().mode()).unwrap_or(0o644);
        tmp.as_file().set_permissions(fs::Permissions::from_mode(mode))?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Canonical JSON to `path`.
pub fn save_json(path: &Path, v: &Value) -> Result<()> {
    write_atomic(path, json::to_canonical_string(v)?.as_bytes())
}
