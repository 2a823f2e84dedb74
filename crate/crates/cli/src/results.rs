//! Result rows, their CSV form and the plot-data projection.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use quadlab_core::{AlgebraElement, ModulePoint};

use crate::error::{io_err, HarnessError, Result};

pub const RESULTS_HEADER: &str = "scenario,probe,norm_x,q_estimate,deviation,bound,margin,iterations,status";
pub const PLOT_HEADER: &str = "norm_x,deviation,bound";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    RejectedDivergent,
    RejectedOpenProblem,
}

impl Status {
    pub fn is_rejection(self) -> bool {
        matches!(self, Status::RejectedDivergent | Status::RejectedOpenProblem)
    }
}

/// One CSV line. Numeric columns are empty where an experiment has nothing
/// to put there. Stability rows pass iff `margin >= -tol`; rows from the
/// exact experiments carry zero slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub probe: String,
    pub norm_x: Option<f64>,
    pub q_estimate: String,
    pub deviation: Option<f64>,
    pub bound: Option<f64>,
    pub margin: Option<f64>,
    pub iterations: Option<usize>,
    pub status: Status,
}

impl ResultRow {
    pub fn labelled(scenario: &str, probe: impl Into<String>, status: Status) -> Self {
        Self {
            scenario: scenario.to_string(),
            probe: probe.into(),
            norm_x: None,
            q_estimate: String::new(),
            deviation: None,
            bound: None,
            margin: None,
            iterations: None,
            status,
        }
    }
}

fn format_element(a: &AlgebraElement) -> String {
    let scalar = |z: num_complex::Complex64| {
        if z.im == 0.0 {
            format!("{}", z.re)
        } else if z.im < 0.0 {
            format!("{}-{}i", z.re, -z.im)
        } else {
            format!("{}+{}i", z.re, z.im)
        }
    };
    if a.k() == 1 {
        return scalar(a.entry(0, 0));
    }
    let rows: Vec<String> = (0..a.k())
        .map(|i| (0..a.k()).map(|j| scalar(a.entry(i, j))).collect::<Vec<_>>().join(" "))
        .collect();
    format!("[{}]", rows.join("; "))
}

/// Coordinates separated by `;`, matrices as `[a b; c d]`.
pub fn format_point(x: &ModulePoint) -> String {
    x.coords().iter().map(format_element).collect::<Vec<_>>().join(";")
}

pub fn to_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(RESULTS_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read(path).map_err(io_err(path))?;
    let mut r = csv::Reader::from_reader(text.as_slice());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != RESULTS_HEADER {
        return Err(HarnessError::Invalid {
            path: path.display().to_string(),
            message: format!("expected header `{RESULTS_HEADER}`"),
        });
    }
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// `(||x||, deviation, bound)` for every row that has all three, sorted by
/// `||x||`.
pub fn emit_plotdata(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut triples: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter_map(|r| Some((r.norm_x?, r.deviation?, r.bound?)))
        .collect();
    if triples.is_empty() {
        let name = rows.first().map_or("input", |r| r.scenario.as_str());
        return Err(HarnessError::NoPlotRows(name.to_string()));
    }
    triples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(PLOT_HEADER.split(','))?;
    for t in triples {
        w.serialize(t)?;
    }
    w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}
