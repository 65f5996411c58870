use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Real numbers in CSV output: 17 significant digits, round-trip safe.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to `path` via a sibling temporary file, so a failed
/// write never leaves a truncated file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = tmp_path(path);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(contents.as_bytes()).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::Io {
            path: path.to_path_buf(),
            source: e,
        });
    }
    Ok(())
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}
