use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{CliError, ExperimentConfig, SCHEMA};

/// A CSV file held in memory until the command has finished.
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Table {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(self.name);
        let io = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

#[derive(Serialize)]
struct Record<'a> {
    schema: &'static str,
    command: &'a str,
    config: &'a ExperimentConfig,
    points: serde_json::Value,
}

pub fn write_record(
    dir: &Path,
    command: &str,
    config: &ExperimentConfig,
    points: serde_json::Value,
) -> Result<PathBuf, CliError> {
    let path = dir.join("result.json");
    let record = Record {
        schema: SCHEMA,
        command,
        config,
        points,
    };
    let text = serde_json::to_string_pretty(&record).map_err(|e| CliError::Output(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    Ok(path)
}
