//! Tidy long-format plot data for external plotting tools.

use periodica::missingness::{describe_missingness, MaskedSeries};
use periodica::series::{format_value, TimeSeries};

use crate::config::PipelineConfig;
use crate::error::CliResult;
use crate::pipeline::{files, out_path_for};
use crate::stageio::StageRecorder;

fn push_series(out: &mut String, name: &str, series: &TimeSeries) {
    for i in 0..series.len() {
        if let Some(v) = series.get(i) {
            out.push_str(&format!(
                "{},{},{}\n",
                series.date_at(i).format("%Y-%m-%d"),
                name,
                format_value(v)
            ));
        }
    }
}

/// Emits series.csv (date, series_name, value) and missing_by_weekday.csv.
/// Missing entries produce no row, so the masked series contributes only
/// its observed days.
pub fn emit_plot_data(
    cfg: &PipelineConfig,
    masked: &MaskedSeries,
    combined: &[(String, TimeSeries)],
    smoothed: &[(String, TimeSeries)],
    recorder: &mut StageRecorder,
) -> CliResult<()> {
    let mut series_csv = String::from("date,series_name,value\n");
    let truth = masked.restore();
    if truth.is_complete() && masked.n_masked() > 0 {
        push_series(&mut series_csv, "original", &truth);
    }
    push_series(&mut series_csv, "masked", &masked.observed);
    for (label, series) in combined {
        push_series(&mut series_csv, label, series);
    }
    for (label, series) in smoothed {
        push_series(&mut series_csv, label, series);
    }
    recorder.write(&out_path_for(cfg, files::SERIES), &series_csv)?;

    let report = describe_missingness(&masked.observed);
    let mut weekday_csv = String::from("weekday,count\n");
    for day in periodica::Weekday::ALL {
        let count = report.count(day);
        weekday_csv.push_str(&format!("{},{count}\n", day.abbrev()));
    }
    recorder.write(&out_path_for(cfg, files::MISSING_BY_WEEKDAY), &weekday_csv)?;
    Ok(())
}
