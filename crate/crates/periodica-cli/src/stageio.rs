//! On-disk formats shared by the pipeline stages, so each subcommand can
//! run standalone on a previous stage's files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use periodica::imputer::CompletedSet;
use periodica::missingness::MaskedSeries;
use periodica::series::{format_value, parse_series, TimeSeries};
use periodica::vbpbb::MedianVector;

use crate::error::{CliError, CliResult};

/// Records every file a stage writes, so a failing stage can retain its
/// partial outputs under a `.partial` suffix.
#[derive(Debug, Default)]
pub struct StageRecorder {
    pub files: Vec<PathBuf>,
}

impl StageRecorder {
    pub fn write(&mut self, path: &Path, contents: &str) -> CliResult<()> {
        std::fs::write(path, contents)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(path.to_path_buf());
        Ok(())
    }

    /// Renames everything written so far to `<name>.partial`.
    pub fn mark_partial(&self) {
        for f in &self.files {
            let mut partial = f.clone().into_os_string();
            partial.push(".partial");
            let _ = std::fs::rename(f, partial);
        }
    }
}

pub fn read_to_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

pub fn load_series(path: &Path, date_column: &str, value_column: &str) -> CliResult<TimeSeries> {
    let text = read_to_string(path)?;
    parse_series(&text, date_column, value_column).map_err(CliError::from)
}

/// Holdout file: `date,value` rows for every masked entry.
pub fn write_holdout(series: &TimeSeries, holdout: &BTreeMap<usize, f64>) -> String {
    let mut out = String::from("date,value\n");
    for (&i, v) in holdout {
        out.push_str(&format!(
            "{},{}\n",
            series.date_at(i).format("%Y-%m-%d"),
            format_value(*v)
        ));
    }
    out
}

pub fn load_holdout(path: &Path, series: &TimeSeries) -> CliResult<BTreeMap<usize, f64>> {
    let text = read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (row_no, line) in text.lines().enumerate() {
        if row_no == 0 {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (date_cell, value_cell) = line.split_once(',').ok_or_else(|| {
            CliError::Data(format!("holdout row {}: expected date,value", row_no + 1))
        })?;
        let date = NaiveDate::parse_from_str(date_cell.trim(), "%Y-%m-%d")
            .map_err(|_| CliError::Data(format!("holdout row {}: bad date", row_no + 1)))?;
        let value: f64 = value_cell.trim().parse().map_err(|_| {
            CliError::Data(format!("holdout row {}: bad value", row_no + 1))
        })?;
        let offset = (date - series.start_date()).num_days();
        if offset < 0 || offset as usize >= series.len() {
            return Err(CliError::Data(format!(
                "holdout date {date} outside the series range"
            )));
        }
        map.insert(offset as usize, value);
    }
    Ok(map)
}

pub fn assemble_masked(
    observed: TimeSeries,
    holdout: BTreeMap<usize, f64>,
) -> CliResult<MaskedSeries> {
    MaskedSeries::from_parts(observed, holdout).map_err(CliError::from)
}

/// Component summary persisted between the components and impute stages.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub name: String,
    pub period: usize,
    pub harmonics: Vec<u32>,
    pub window: usize,
    pub iterations: usize,
    pub significant: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentsFile {
    pub components: Vec<ComponentSummary>,
    /// Advisory periodogram peaks (frequency per day), when nominated.
    #[serde(default)]
    pub nominated_peaks: Vec<f64>,
}

pub fn load_components_file(path: &Path) -> CliResult<ComponentsFile> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn load_median(path: &Path) -> CliResult<MedianVector> {
    let text = read_to_string(path)?;
    let mut values = Vec::new();
    for (row_no, line) in text.lines().enumerate() {
        if row_no == 0 || line.trim().is_empty() {
            continue;
        }
        let (_, value_cell) = line.split_once(',').ok_or_else(|| {
            CliError::Data(format!("median row {}: expected phase,median", row_no + 1))
        })?;
        let value: f64 = value_cell.trim().parse().map_err(|_| {
            CliError::Data(format!("median row {}: bad value", row_no + 1))
        })?;
        values.push(value);
    }
    if values.is_empty() {
        return Err(CliError::Data(format!(
            "median file {} has no rows",
            path.display()
        )));
    }
    Ok(MedianVector { values })
}

/// Combined-imputation CSV: date, value, was_missing, and the Rubin parts
/// W, Bv, T on missing rows.
pub fn write_combined(series: &TimeSeries, set: &CompletedSet) -> String {
    let mut out = String::from("date,value,was_missing,W,Bv,T\n");
    let mut cell_of_row: BTreeMap<usize, usize> = BTreeMap::new();
    for (cell, &row) in set.missing_rows.iter().enumerate() {
        cell_of_row.insert(row, cell);
    }
    for i in 0..series.len() {
        let date = series.date_at(i).format("%Y-%m-%d");
        match cell_of_row.get(&i) {
            Some(&cell) => out.push_str(&format!(
                "{date},{},true,{},{},{}\n",
                format_value(set.combined[i]),
                format_value(set.within[cell]),
                format_value(set.between[cell]),
                format_value(set.total[cell])
            )),
            None => out.push_str(&format!(
                "{date},{},false,,,\n",
                format_value(set.combined[i])
            )),
        }
    }
    out
}

/// Reads a combined CSV back as (series, missing-rows).
pub fn load_combined(path: &Path) -> CliResult<(TimeSeries, Vec<usize>)> {
    let text = read_to_string(path)?;
    let mut start: Option<NaiveDate> = None;
    let mut values: Vec<Option<f64>> = Vec::new();
    let mut missing_rows = Vec::new();
    for (row_no, line) in text.lines().enumerate() {
        if row_no == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 3 {
            return Err(CliError::Data(format!(
                "{} row {}: expected at least 3 fields",
                path.display(),
                row_no + 1
            )));
        }
        let date = NaiveDate::parse_from_str(fields[0].trim(), "%Y-%m-%d")
            .map_err(|_| CliError::Data(format!("{} row {}: bad date", path.display(), row_no + 1)))?;
        if start.is_none() {
            start = Some(date);
        }
        let value: f64 = fields[1].trim().parse().map_err(|_| {
            CliError::Data(format!("{} row {}: bad value", path.display(), row_no + 1))
        })?;
        if fields[2].trim() == "true" {
            missing_rows.push(values.len());
        }
        values.push(Some(value));
    }
    let start = start.ok_or_else(|| CliError::Data(format!("{} is empty", path.display())))?;
    let series = TimeSeries::new(start, values).map_err(CliError::from)?;
    Ok((series, missing_rows))
}
