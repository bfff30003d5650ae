use std::io::Write;
use std::path::Path;

use anyhow::Context;

/// Writes through a temporary file in the target directory, then renames it
/// into place, so a crash never leaves a truncated output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// One decimal place, as every printed metric uses.
pub fn percent(x: f64) -> String {
    format!("{x:.1}%")
}
