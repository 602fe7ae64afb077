//! Result files: `series.csv`, `summary.json` and `manifest.txt`.
//!
//! Floats are written in their shortest round-trip decimal form: positional for
//! magnitudes in `[1e-4, 1e15)`, scientific otherwise, `NaN`/`inf`/`-inf` for
//! non-finite values. Empty CSV cells mean "not available".

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use cgmem::analysis::{c0_constant, C0Term};
use cgmem::experiments::{CriterionResult, ExperimentOutput, Series};
use cgmem::kernels::SmallnessFlags;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{CliConfig, Format};

pub const SUMMARY_SCHEMA: &str = include_str!("../schema/summary.schema.json");
pub const SCHEMA_ID: &str = "cgmem-summary/1";

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn series_csv(series: &Series) -> String {
    let mut out = series.columns.join(",");
    out.push('\n');
    for row in &series.rows {
        let cells: Vec<String> = row.iter().map(|c| c.map(format_float).unwrap_or_default()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Constants {
    pub m_bulk: f64,
    pub m_boundary: f64,
    pub delta_bulk: f64,
    pub delta_boundary: f64,
    pub c0: Option<f64>,
    pub c0_active: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesInfo {
    pub file: Option<&'static str>,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<'a> {
    pub schema: &'static str,
    pub experiment: &'static str,
    pub passed: bool,
    pub config: &'a CliConfig,
    pub smallness: SmallnessFlags,
    pub constants: Constants,
    pub metrics: &'a BTreeMap<String, f64>,
    pub criteria: &'a [CriterionResult],
    pub series: SeriesInfo,
}

pub fn constants(config: &CliConfig) -> cgmem::Result<(SmallnessFlags, Constants)> {
    let problem = config.run.problem()?;
    let (kb, kg) = (&problem.kernel_bulk, &problem.kernel_boundary);
    let p = problem.op.params();
    let c0 = c0_constant(p.omega, p.beta, p.nu, kb.delta().min(kg.delta()), kg.mass()).ok();
    let constants = Constants {
        m_bulk: kb.mass(),
        m_boundary: kg.mass(),
        delta_bulk: kb.delta(),
        delta_boundary: kg.delta(),
        c0: c0.map(|c| c.value),
        c0_active: c0.map(|c| match c.active {
            C0Term::Diffusion => "diffusion",
            C0Term::Boundary => "boundary",
            C0Term::Kernel => "kernel",
        }),
    };
    Ok((problem.smallness, constants))
}

fn write(dir: &Path, name: &str, contents: &str) -> io::Result<(String, String)> {
    fs::write(dir.join(name), contents)?;
    Ok((name.to_string(), hex::encode(Sha256::digest(contents.as_bytes()))))
}

/// Writes the requested files and the manifest; returns the paths written.
pub fn write_outputs(dir: &Path, config: &CliConfig, output: &ExperimentOutput) -> Result<Vec<PathBuf>, crate::CliError> {
    let io_err = |source| crate::CliError::Io { path: dir.to_path_buf(), source };
    fs::create_dir_all(dir).map_err(io_err)?;
    let (smallness, constants) = constants(config)?;
    let csv = config.output.formats.contains(&Format::Csv);
    let mut hashes = Vec::new();
    if csv {
        hashes.push(write(dir, "series.csv", &series_csv(&output.series)).map_err(io_err)?);
    }
    if config.output.formats.contains(&Format::Json) {
        let summary = Summary {
            schema: SCHEMA_ID,
            experiment: output.experiment.name(),
            passed: output.passed(),
            config,
            smallness,
            constants,
            metrics: &output.metrics,
            criteria: &output.criteria,
            series: SeriesInfo {
                file: csv.then_some("series.csv"),
                columns: output.series.columns.clone(),
                rows: output.series.rows.len(),
            },
        };
        let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        text.push('\n');
        hashes.push(write(dir, "summary.json", &text).map_err(io_err)?);
    }
    hashes.sort();
    let manifest: String = hashes.iter().map(|(name, h)| format!("{h}  {name}\n")).collect();
    fs::write(dir.join("manifest.txt"), manifest).map_err(io_err)?;
    let mut paths: Vec<PathBuf> = hashes.into_iter().map(|(n, _)| dir.join(n)).collect();
    paths.push(dir.join("manifest.txt"));
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-7, -2.5e300, 123456.789, 5e-324, 1e15, 0.0001, f64::MAX] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(1e-7), "1e-7");
        assert_eq!(format_float(f64::NAN), "NaN");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_leaves_missing_cells_empty() {
        let mut s = Series::new(&["t", "dual"]);
        s.push(vec![Some(0.0), None]);
        s.push(vec![Some(0.01), Some(2.0)]);
        assert_eq!(series_csv(&s), "t,dual\n0,\n0.01,2\n");
    }
}
