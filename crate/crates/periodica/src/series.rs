//! Daily time series with explicit missing entries, plus CSV ingestion and
//! emission.
//!
//! The series cadence is fixed at one day: index `i` corresponds to
//! `start_date + i` days. A value is either a finite real or missing; NaN is
//! never stored as data.

use chrono::{Datelike, Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Day of week, Sunday through Saturday.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Weekday {
    Sunday,
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Sunday,
        Weekday::Monday,
        Weekday::Tuesday,
        Weekday::Wednesday,
        Weekday::Thursday,
        Weekday::Friday,
        Weekday::Saturday,
    ];

    /// Index 0..7 with Sunday = 0.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_weekend(self) -> bool {
        matches!(self, Weekday::Saturday | Weekday::Sunday)
    }

    /// Three-letter abbreviation (`Sun`..`Sat`).
    pub fn abbrev(self) -> &'static str {
        match self {
            Weekday::Sunday => "Sun",
            Weekday::Monday => "Mon",
            Weekday::Tuesday => "Tue",
            Weekday::Wednesday => "Wed",
            Weekday::Thursday => "Thu",
            Weekday::Friday => "Fri",
            Weekday::Saturday => "Sat",
        }
    }
}

/// Day of week for a Gregorian calendar date.
pub fn weekday_of(date: NaiveDate) -> Weekday {
    // chrono numbers days from Sunday via num_days_from_sunday.
    Weekday::ALL[date.weekday().num_days_from_sunday() as usize]
}

/// Uniformly sampled daily series; each entry is a finite value or missing.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    start_date: NaiveDate,
    values: Vec<Option<f64>>,
}

impl TimeSeries {
    /// Builds a series, rejecting empty input and non-finite values.
    pub fn new(start_date: NaiveDate, values: Vec<Option<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        for (i, v) in values.iter().enumerate() {
            if let Some(x) = v {
                if !x.is_finite() {
                    return Err(Error::InvalidParam(format!(
                        "non-finite value {x} at index {i}"
                    )));
                }
            }
        }
        Ok(Self { start_date, values })
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Value at index `i`; `None` means missing.
    pub fn get(&self, i: usize) -> Option<f64> {
        self.values[i]
    }

    pub fn date_at(&self, i: usize) -> NaiveDate {
        self.start_date
            .checked_add_days(Days::new(i as u64))
            .expect("date arithmetic overflow")
    }

    pub fn weekday_at(&self, i: usize) -> Weekday {
        weekday_of(self.date_at(i))
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|v| v.is_some())
    }

    pub fn missing_indices(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.is_none().then_some(i))
            .collect()
    }

    pub fn n_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Replaces the values, keeping the calendar anchor.
    pub fn with_values(&self, values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::InvalidParam(format!(
                "replacement length {} != series length {}",
                values.len(),
                self.values.len()
            )));
        }
        Self::new(self.start_date, values)
    }

    /// Values of a complete series as plain reals.
    pub fn complete_values(&self) -> Result<Vec<f64>> {
        self.values
            .iter()
            .map(|v| v.ok_or(Error::IncompleteInput))
            .collect()
    }
}

/// Formats a value with 17 significant digits so it round-trips bit-exactly.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses a two-column CSV into a daily series.
///
/// Expects a header row naming `date_column` and `value_column`. Dates must
/// be ISO-8601 and advance by exactly one day per row. An empty or `NA`
/// value cell becomes a missing entry.
pub fn parse_series(csv_text: &str, date_column: &str, value_column: &str) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(csv_text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    let date_idx = headers
        .iter()
        .position(|h| h == date_column)
        .ok_or_else(|| Error::MissingColumn(date_column.to_string()))?;
    let value_idx = headers
        .iter()
        .position(|h| h == value_column)
        .ok_or_else(|| Error::MissingColumn(value_column.to_string()))?;

    let mut start_date: Option<NaiveDate> = None;
    let mut prev_date: Option<NaiveDate> = None;
    let mut values: Vec<Option<f64>> = Vec::new();

    for (row_no, record) in reader.records().enumerate() {
        let row = row_no + 1; // 1-based data row
        let record = record.map_err(|e| Error::Csv {
            row,
            message: e.to_string(),
        })?;
        let date_cell = record.get(date_idx).ok_or_else(|| Error::Csv {
            row,
            message: "missing date cell".to_string(),
        })?;
        let date = NaiveDate::parse_from_str(date_cell.trim(), "%Y-%m-%d").map_err(|_| {
            Error::Csv {
                row,
                message: format!("unparsable ISO-8601 date '{date_cell}'"),
            }
        })?;

        if let Some(prev) = prev_date {
            let delta = (date - prev).num_days();
            if delta == 0 {
                return Err(Error::DuplicateDate(date));
            }
            if delta < 0 {
                return Err(Error::NonDailySpacing(date));
            }
            if delta > 1 {
                // Report the first absent calendar day.
                let gap = prev.checked_add_days(Days::new(1)).expect("date overflow");
                return Err(Error::DateGap(gap));
            }
        } else {
            start_date = Some(date);
        }
        prev_date = Some(date);

        let value_cell = record
            .get(value_idx)
            .ok_or_else(|| Error::Csv {
                row,
                message: "missing value cell".to_string(),
            })?
            .trim();
        if value_cell.is_empty() || value_cell == "NA" {
            values.push(None);
        } else {
            let x: f64 = value_cell.parse().map_err(|_| Error::Csv {
                row,
                message: format!("unparsable numeric '{value_cell}'"),
            })?;
            if !x.is_finite() {
                return Err(Error::Csv {
                    row,
                    message: format!("non-finite value '{value_cell}'"),
                });
            }
            values.push(Some(x));
        }
    }

    let start = start_date.ok_or(Error::EmptySeries)?;
    TimeSeries::new(start, values)
}

/// Emits a series as CSV with header `date,<value_column>`, LF line ends,
/// missing entries as empty cells, and 17-significant-digit values.
pub fn write_series(series: &TimeSeries, value_column: &str) -> String {
    let mut out = String::with_capacity(series.len() * 32);
    out.push_str("date,");
    out.push_str(value_column);
    out.push('\n');
    for i in 0..series.len() {
        out.push_str(&series.date_at(i).format("%Y-%m-%d").to_string());
        out.push(',');
        if let Some(x) = series.get(i) {
            out.push_str(&format_value(x));
        }
        out.push('\n');
    }
    out
}
