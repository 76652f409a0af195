use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::CliError;

/// Reads and validates a JSON file; parse and schema errors carry the line
/// and column reported by the parser.
pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {what} file {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("invalid {what} file {}: {e}", path.display())))
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(contents.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io(format!("cannot write to stdout: {e}")));
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::io(format!("cannot create temporary file in {}: {e}", dir.display())))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.flush())
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path).map_err(|e| CliError::io(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}
