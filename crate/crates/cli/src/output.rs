use std::fs;
use std::path::{Path, PathBuf};

use dpxa_core::Error;

use crate::CliResult;

/// Writes `contents`, creating parent directories as needed.
pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| Error::from(e).context(format!("creating {}", dir.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| Error::from(e).context(format!("writing {}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// `prefix` with `ext` appended, e.g. `out/run` → `out/run.json`.
pub fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}
