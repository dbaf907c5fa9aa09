//! Run reports: a CSV summary with one row per run and a JSON file with the
//! full reports.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::schemes::SimulationResult;

/// Column order of the summary table.
pub const SUMMARY_COLUMNS: [&str; 6] = [
    "scheme",
    "update",
    "robin_parameter",
    "mean_iterations",
    "eps_rel",
    "termination",
];

pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "report.json";

/// A config together with what running it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub result: SimulationResult,
}

impl RunReport {
    pub fn completed(&self) -> bool {
        self.result.termination.is_completed()
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes the summary table. Mean iterations stay empty for runs that did
/// not complete.
pub fn write_summary<W: Write>(reports: &[RunReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS).map_err(csv_error)?;
    for r in reports {
        let res = &r.result;
        let robin = res.robin_parameter.map(|a| format!("{a:e}")).unwrap_or_default();
        let mean = res.mean_iterations().map(|m| format!("{m:.2}")).unwrap_or_default();
        w.write_record([
            res.scheme.name(),
            res.update.name(),
            &robin,
            &mean,
            &format!("{:.6e}", res.eps_rel),
            res.termination.label(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_string(reports: &[RunReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_summary(reports, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub summary: PathBuf,
    pub report: PathBuf,
}

/// Writes `summary.csv` and `report.json` into `dir`, creating it if needed.
pub fn write_outputs(reports: &[RunReport], dir: &Path) -> Result<OutputFiles> {
    std::fs::create_dir_all(dir)?;
    let files = OutputFiles {
        summary: dir.join(SUMMARY_FILE),
        report: dir.join(REPORT_FILE),
    };
    write_summary(reports, std::fs::File::create(&files.summary)?)?;
    let mut json = serde_json::to_vec_pretty(reports).map_err(|e| Error::Io(e.to_string()))?;
    json.push(b'\n');
    std::fs::write(&files.report, json)?;
    Ok(files)
}
