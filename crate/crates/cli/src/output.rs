//! Output emission: everything goes through an atomic temp-file + rename so
//! partially written results never appear under the final name.

use std::path::{Path, PathBuf};

use serde::Serialize;

use intermit_core::error::CoreError;

pub fn ensure_dir(dir: &Path) -> Result<(), CoreError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CoreError::config(format!("cannot create output dir {}: {e}", dir.display())))
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CoreError> {
    let tmp: PathBuf = path.with_extension(format!(
        "{}.tmp-{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)
        .map_err(|e| CoreError::config(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CoreError::config(format!("cannot move {} into place: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CoreError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CoreError::config(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_atomic(path, &text)
}
