pub mod ber;
pub mod calibrate;
pub mod synthesize;
pub mod verify;

use std::path::{Path, PathBuf};

use crate::config::OutputFormat;

/// `out` if given, else `default_stem.<ext>`.
pub fn output_path(out: Option<&Path>, default_stem: &str, format: OutputFormat) -> PathBuf {
    out.map_or_else(|| PathBuf::from(format!("{default_stem}.{}", format.extension())), Path::to_path_buf)
}

/// Inserts `suffix` between the file stem and its extension.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}
