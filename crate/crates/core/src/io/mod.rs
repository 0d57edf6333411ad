//! File formats: signal CSV, C-MAPSS-style text, `PTK1` tensors, `PTKM`
//! models, result CSVs, and SVG/PGM plots.

mod binary;
mod pgm;
mod svg;
mod text;

pub use binary::{decode_tensor, encode_tensor, load_model, load_tensor, save_model, save_tensor};
pub use pgm::{encode_pgm, write_pgm};
pub use svg::{confusion_svg, line_plot_svg, roc_svg, scatter_svg, LineSeries, ScatterPoint};
pub use text::{
    load_cmapss_text, parse_cmapss, read_csv_table, read_feature_csv, read_signal_csv, write_cmapss_text,
    write_csv_table, write_feature_csv, write_fitness_csv, write_signal_csv, write_train_report, CsvTable,
};

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `bytes`, creating parent directories as needed.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
