//! CSV files with `#` metadata lines, and the per-run metadata file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::CliResult;

pub type CsvWriter = csv::Writer<BufWriter<File>>;

/// Opens `dir/name`, writes each metadata line prefixed by `# `, and
/// returns a CSV writer positioned after them.
pub fn csv_with_metadata(dir: &Path, name: &str, metadata: &[String]) -> CliResult<(CsvWriter, PathBuf)> {
    let path = dir.join(name);
    let mut file = BufWriter::new(File::create(&path)?);
    for line in metadata {
        writeln!(file, "# {line}")?;
    }
    Ok((csv::Writer::from_writer(file), path))
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}
