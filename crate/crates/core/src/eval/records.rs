use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ProfileCurve;
use crate::error::{Error, Result};

/// One (instance, method) result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub instance: String,
    pub method: String,
    pub seed: u64,
    pub ub: Option<f64>,
    pub lb: Option<f64>,
    pub gap_l: Option<f64>,
    pub time_s: f64,
    pub feasible: bool,
}

pub const RESULTS_HEADER: &str = "instance,method,seed,ub,lb,gap_l,time_s,feasible";

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Writes rows sorted by (instance, method).
pub fn emit_results(records: &[BenchmarkRecord], path: &Path) -> Result<()> {
    let mut rows: Vec<&BenchmarkRecord> = records.iter().collect();
    rows.sort_by(|a, b| (&a.instance, &a.method).cmp(&(&b.instance, &b.method)));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(RESULTS_HEADER.split(','))
        .map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_results(path: &Path) -> Result<Vec<BenchmarkRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.join(",") != RESULTS_HEADER {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: format!("expected header `{RESULTS_HEADER}`"),
        });
    }
    r.deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| csv_err(path, e))
}

/// One `tau,theta` file per method, named `profile-<method>.csv`.
pub fn emit_profiles(curves: &[ProfileCurve], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for c in curves {
        let path = dir.join(format!("profile-{}.csv", c.method));
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        w.write_record(["tau", "theta"])
            .map_err(|e| csv_err(&path, e))?;
        for (tau, theta) in &c.points {
            w.write_record([tau.to_string(), theta.to_string()])
                .map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
