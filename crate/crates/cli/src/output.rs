use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Energies and other reals are written with four decimals.
pub fn fixed4(x: f64) -> String {
    format!("{x:.4}")
}

pub fn optional4(x: Option<f64>) -> String {
    x.map(fixed4).unwrap_or_default()
}

/// Buffered writer to `path`, or to stdout when absent.
pub fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            let f = File::create(p).map_err(|e| CliError::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

pub fn csv_writer(path: Option<&Path>) -> CliResult<csv::Writer<Box<dyn Write>>> {
    Ok(csv::Writer::from_writer(sink(path)?))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Comma-separated vibrational labels such as "000,010".
pub fn parse_references(text: &str) -> CliResult<Vec<rovib::RovibBasisState>> {
    text.split(',')
        .map(|l| rovib::RovibBasisState::from_label(l.trim()).map_err(CliError::from))
        .collect()
}
