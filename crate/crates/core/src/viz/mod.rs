// SPDX-License-Identifier: MIT OR Apache-2.0

//! Figure export. Each figure is a CSV holding every plotted value plus a
//! self-contained SVG 1.1 rendering of it.
//!
//! CSV files are comma-separated with a header row and LF line endings;
//! numbers use the shortest representation that parses back to the same
//! value, so plotted data is recoverable exactly.

mod bands;
mod curves;
mod heatmap;
mod parallel;
mod radar;
mod simplex;
mod svg;
mod tables;

use std::fs;
use std::path::{Path, PathBuf};

pub use bands::{confidence_bands, export_bands, resample, Band, BAND_GRID};
pub use curves::{export_load_curves, SPIKE_MARKER};
pub use heatmap::{export_heatmap, layer_matrix, LayerSignal};
pub use parallel::export_parallel_coords;
pub use radar::{export_radar, radar_vertices, RADAR_AXES};
pub use simplex::{export_simplex, simplex_project, SimplexPoint, V_EL, V_GL, V_IL};
pub use tables::{history_csv, phases_csv, points_csv, run_points_csv};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An exported figure: `<name>.csv` and `<name>.svg`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Figure {
    pub name: String,
    pub csv: String,
    pub svg: String,
}

impl Figure {
    /// Writes both files into `dir`, returning their paths (CSV first).
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<[PathBuf; 2]> {
        let dir = dir.as_ref();
        let csv = dir.join(format!("{}.csv", self.name));
        let svg = dir.join(format!("{}.svg", self.name));
        fs::write(&csv, &self.csv).map_err(|e| Error::io(&csv, e))?;
        fs::write(&svg, &self.svg).map_err(|e| Error::io(&svg, e))?;
        Ok([csv, svg])
    }
}

/// Builds CSV text row by row.
pub(crate) struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub(crate) fn new<I: IntoIterator<Item = T>, T: AsRef<[u8]>>(header: I) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub(crate) fn row<I: IntoIterator<Item = T>, T: AsRef<[u8]>>(&mut self, fields: I) {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub(crate) fn finish(self) -> String {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }
}

pub(crate) fn num<S: Scalar>(v: S) -> String {
    v.to_string()
}

pub(crate) fn check_unit<S: Scalar>(what: impl FnOnce() -> String, v: S) -> Result<()> {
    if v >= S::zero() && v <= S::one() {
        Ok(())
    } else {
        Err(Error::Range {
            what: what(),
            value: v.as_f64(),
        })
    }
}

pub(crate) fn require_points(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::TooFewPoints { needed: 1, got: 0 })
    } else {
        Ok(())
    }
}
