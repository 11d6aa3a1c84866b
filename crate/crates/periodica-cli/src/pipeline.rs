//! Stage orchestration: simulate -> components -> impute -> smooth ->
//! evaluate -> plot-data, with a manifest tying the run together.
//!
//! Every stage is also runnable standalone on the previous stages' files.
//! Stage seeds derive from the global seed and fixed stream ids, so a run
//! is reproducible from the single seed regardless of thread count.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use periodica::evaluation::{self, EvalReport, Scope};
use periodica::imputer::{
    bootstrap_em_impute, build_design_matrix, CompletedSet, DrawMode, ImputationConfig,
    MatrixMode,
};
use periodica::missingness::{apply_mar_mask, describe_missingness, MarSpec, MaskedSeries};
use periodica::seeding::derive_seed;
use periodica::series::{write_series, TimeSeries};
use periodica::smoothing::{loess, moving_average, LoessParams};
use periodica::spectral::{periodogram, top_peaks};
use periodica::vbpbb::{analyze_component, tile_median, BootstrapConfig, ComponentAnalysis};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::plotdata;
use crate::stageio::{
    assemble_masked, load_combined, load_components_file, load_holdout, load_median,
    load_series, write_combined, write_holdout, ComponentsFile, ComponentSummary, StageRecorder,
};

pub const STREAM_MAR: u64 = 1;
pub const STREAM_COMPONENT: u64 = 16;
pub const STREAM_ENHANCED: u64 = 32;
pub const STREAM_BASELINE: u64 = 33;

/// Canonical artifact names inside the output directory.
pub mod files {
    pub const ORIGINAL: &str = "original.csv";
    pub const MASKED: &str = "masked.csv";
    pub const HOLDOUT: &str = "holdout.csv";
    pub const MISSINGNESS: &str = "missingness.json";
    pub const COMPONENTS: &str = "components.json";
    pub const PERIODOGRAM: &str = "periodogram.csv";
    pub const METRICS_CSV: &str = "metrics.csv";
    pub const METRICS_JSON: &str = "metrics.json";
    pub const METRICS_PER_IMPUTATION: &str = "metrics_per_imputation.csv";
    pub const SERIES: &str = "series.csv";
    pub const MISSING_BY_WEEKDAY: &str = "missing_by_weekday.csv";
    pub const MANIFEST: &str = "manifest.json";

    pub fn component(name: &str) -> String {
        format!("component_{name}.csv")
    }

    pub fn ci_band(name: &str) -> String {
        format!("ci_band_{name}.csv")
    }

    pub fn median(name: &str) -> String {
        format!("median_{name}.csv")
    }

    pub fn imputed(condition: &str, j: usize) -> String {
        format!("imputed_{condition}_{j}.csv")
    }

    pub fn combined(condition: &str) -> String {
        format!("imputed_{condition}_combined.csv")
    }

    pub fn loess(condition: &str) -> String {
        format!("loess_{condition}.csv")
    }

    pub fn ma(condition: &str) -> String {
        format!("ma_{condition}.csv")
    }
}

fn ensure_out_dir(cfg: &PipelineConfig) -> CliResult<()> {
    std::fs::create_dir_all(&cfg.output)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", cfg.output.display())))
}

fn out_path(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.output.join(name)
}

pub fn load_input(cfg: &PipelineConfig) -> CliResult<TimeSeries> {
    if !cfg.input.path.exists() {
        return Err(CliError::Config(format!(
            "input path {} does not exist",
            cfg.input.path.display()
        )));
    }
    load_series(&cfg.input.path, &cfg.input.date_column, &cfg.input.value_column)
}

/// Simulate stage: inject the MAR mask (when configured) or adopt the
/// input's own gaps plus any separately supplied holdout.
pub fn stage_simulate(
    cfg: &PipelineConfig,
    input: &TimeSeries,
    recorder: &mut StageRecorder,
) -> CliResult<MaskedSeries> {
    let masked = match &cfg.mar {
        Some(mar) => {
            let spec = MarSpec {
                total_rate: mar.total_rate,
                weekend_share: mar.weekend_share,
                seed: derive_seed(cfg.seed, STREAM_MAR),
            };
            apply_mar_mask(input, &spec)?
        }
        None => {
            let holdout = match &cfg.input.holdout {
                Some(path) => load_holdout(path, input)?,
                None => BTreeMap::new(),
            };
            assemble_masked(input.clone(), holdout)?
        }
    };

    let truth = masked.restore();
    if truth.is_complete() {
        recorder.write(&out_path(cfg, files::ORIGINAL), &write_series(&truth, "value"))?;
    }
    recorder.write(
        &out_path(cfg, files::MASKED),
        &write_series(&masked.observed, "value"),
    )?;
    recorder.write(
        &out_path(cfg, files::HOLDOUT),
        &write_holdout(&masked.observed, &masked.holdout),
    )?;
    let report = describe_missingness(&masked.observed);
    recorder.write(
        &out_path(cfg, files::MISSINGNESS),
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(masked)
}

/// Components stage: bandpass-extract and bootstrap every configured
/// component of the observed (gappy) series.
pub fn stage_components(
    cfg: &PipelineConfig,
    observed: &TimeSeries,
    recorder: &mut StageRecorder,
) -> CliResult<Vec<ComponentAnalysis>> {
    let mut analyses = Vec::with_capacity(cfg.components.len());
    for (i, component) in cfg.components.iter().enumerate() {
        let spec = component.to_spec();
        let bootstrap = BootstrapConfig {
            replicates: cfg.bootstrap.replicates,
            seed: derive_seed(cfg.seed, STREAM_COMPONENT + i as u64),
            ci_level: cfg.bootstrap.ci_level,
        };
        let analysis = analyze_component(observed, &spec, &bootstrap)?;

        let values: Vec<Option<f64>> = analysis.component.values.iter().map(|&v| Some(v)).collect();
        let component_series = observed.with_values(values)?;
        recorder.write(
            &out_path(cfg, &files::component(&spec.name)),
            &write_series(&component_series, "value"),
        )?;
        recorder.write(&out_path(cfg, &files::ci_band(&spec.name)), &analysis.band.to_csv())?;
        recorder.write(&out_path(cfg, &files::median(&spec.name)), &analysis.median.to_csv())?;
        analyses.push(analysis);
    }

    let mut nominated_peaks = Vec::new();
    if let Some(spectral) = &cfg.spectral {
        if spectral.nominate {
            let pg = periodogram(observed)?;
            recorder.write(&out_path(cfg, files::PERIODOGRAM), &pg.to_csv())?;
            nominated_peaks = top_peaks(&pg, spectral.peak_count, spectral.min_separation);
        }
    }

    let summary = ComponentsFile {
        components: analyses
            .iter()
            .map(|a| ComponentSummary {
                name: a.spec.name.clone(),
                period: a.spec.period,
                harmonics: a.spec.harmonics.clone(),
                window: a.spec.window,
                iterations: a.spec.iterations,
                significant: a.significant,
            })
            .collect(),
        nominated_peaks,
    };
    recorder.write(
        &out_path(cfg, files::COMPONENTS),
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok(analyses)
}

/// Tiled auxiliary columns of the significant components.
pub fn significant_columns(
    analyses: &[ComponentAnalysis],
    n: usize,
) -> Vec<(String, Vec<f64>)> {
    analyses
        .iter()
        .filter(|a| a.significant)
        .map(|a| (a.spec.name.clone(), tile_median(&a.median, n, 0)))
        .collect()
}

pub struct ImputeOutcome {
    pub enhanced: Option<CompletedSet>,
    pub baseline: Option<CompletedSet>,
    pub warnings: Vec<String>,
}

/// Impute stage: build the design matrices and run the configured
/// conditions.
pub fn stage_impute(
    cfg: &PipelineConfig,
    masked: &MaskedSeries,
    components: &[(String, Vec<f64>)],
    recorder: &mut StageRecorder,
) -> CliResult<ImputeOutcome> {
    let mut outcome = ImputeOutcome {
        enhanced: None,
        baseline: None,
        warnings: Vec::new(),
    };
    let conditions: Vec<(&str, MatrixMode, u64)> = [
        cfg.imputation
            .mode
            .runs_enhanced()
            .then_some(("enhanced", MatrixMode::Enhanced, STREAM_ENHANCED)),
        cfg.imputation
            .mode
            .runs_baseline()
            .then_some(("baseline", MatrixMode::Baseline, STREAM_BASELINE)),
    ]
    .into_iter()
    .flatten()
    .collect();

    for (label, mode, stream) in conditions {
        let dm = build_design_matrix(masked, components, mode)?;
        outcome
            .warnings
            .extend(dm.warnings.iter().map(|w| format!("{label}: {w}")));
        let imputation = ImputationConfig {
            imputations: cfg.imputation.imputations,
            seed: derive_seed(cfg.seed, stream),
            em: cfg.imputation.em_config(),
            draw: DrawMode::Stochastic,
            resample: true,
        };
        let set = bootstrap_em_impute(&dm, &imputation)?;

        for (j, completion) in set.completions.iter().enumerate() {
            let values: Vec<Option<f64>> = completion.iter().map(|&v| Some(v)).collect();
            let series = masked.observed.with_values(values)?;
            recorder.write(
                &out_path(cfg, &files::imputed(label, j + 1)),
                &write_series(&series, "value"),
            )?;
        }
        recorder.write(
            &out_path(cfg, &files::combined(label)),
            &write_combined(&masked.observed, &set),
        )?;
        match mode {
            MatrixMode::Enhanced => outcome.enhanced = Some(set),
            MatrixMode::Baseline => outcome.baseline = Some(set),
        }
    }
    Ok(outcome)
}

/// Smooth stage: LOESS and centered moving average of each combined series.
pub fn stage_smooth(
    cfg: &PipelineConfig,
    combined: &[(String, TimeSeries)],
    recorder: &mut StageRecorder,
) -> CliResult<(Vec<(String, TimeSeries)>, Vec<String>)> {
    let mut smoothed = Vec::new();
    let mut warnings = Vec::new();
    for (label, series) in combined {
        let ma = moving_average(series, cfg.smoothing.ma_window)?;
        recorder.write(&out_path(cfg, &files::ma(label)), &write_series(&ma, "value"))?;
        smoothed.push((format!("ma_{label}"), ma));

        let fit = loess(
            series,
            &LoessParams {
                span: cfg.smoothing.loess_span,
                degree: cfg.smoothing.loess_degree,
            },
        )?;
        warnings.extend(fit.warnings.iter().map(|w| format!("loess {label}: {w}")));
        recorder.write(
            &out_path(cfg, &files::loess(label)),
            &write_series(&fit.series, "value"),
        )?;
        smoothed.push((format!("loess_{label}"), fit.series));
    }
    Ok((smoothed, warnings))
}

fn per_imputation_reports(
    truth: &TimeSeries,
    label: &str,
    set: &CompletedSet,
) -> CliResult<Vec<(usize, EvalReport)>> {
    let truth_values = truth.complete_values()?;
    let mut rows = Vec::new();
    for (j, completion) in set.completions.iter().enumerate() {
        for scope in [Scope::MissingCellsOnly, Scope::FullSeries] {
            let indices: Vec<usize> = match scope {
                Scope::MissingCellsOnly => set.missing_rows.clone(),
                Scope::FullSeries => (0..truth_values.len()).collect(),
            };
            if indices.is_empty() {
                continue;
            }
            let pair = evaluation::EvalPair::new(
                indices.iter().map(|&i| truth_values[i]).collect(),
                indices.iter().map(|&i| completion[i]).collect(),
            )?;
            rows.push((
                j + 1,
                EvalReport {
                    condition: label.to_string(),
                    scope,
                    mae: evaluation::mae(&pair),
                    rmse: evaluation::rmse(&pair),
                    pearson_r: evaluation::pearson(&pair)?,
                    n: pair.len(),
                },
            ));
        }
    }
    Ok(rows)
}

/// Evaluate stage: score combined (and per-imputation) series against the
/// held-out truth. Returns None, with a warning, when there is nothing to
/// score.
pub fn stage_evaluate(
    cfg: &PipelineConfig,
    masked: &MaskedSeries,
    enhanced: Option<&CompletedSet>,
    baseline: Option<&CompletedSet>,
    recorder: &mut StageRecorder,
    warnings: &mut Vec<String>,
) -> CliResult<Option<Vec<EvalReport>>> {
    if masked.n_masked() == 0 {
        warnings.push("evaluation skipped: n_miss=0, nothing to score".into());
        return Ok(None);
    }
    let truth = masked.restore();
    if !truth.is_complete() {
        warnings.push(
            "evaluation skipped: truth incomplete (input gaps without holdout values)".into(),
        );
        return Ok(None);
    }

    let reports = match (enhanced, baseline) {
        (Some(e), Some(b)) => evaluation::compare_conditions(&truth, e, b)?,
        (Some(e), None) => vec![
            evaluation::score_condition(&truth, e, "enhanced", Scope::MissingCellsOnly)?,
            evaluation::score_condition(&truth, e, "enhanced", Scope::FullSeries)?,
        ],
        (None, Some(b)) => vec![
            evaluation::score_condition(&truth, b, "baseline", Scope::MissingCellsOnly)?,
            evaluation::score_condition(&truth, b, "baseline", Scope::FullSeries)?,
        ],
        (None, None) => {
            warnings.push("evaluation skipped: no imputation outputs".into());
            return Ok(None);
        }
    };

    recorder.write(&out_path(cfg, files::METRICS_CSV), &evaluation::reports_to_csv(&reports))?;
    recorder.write(
        &out_path(cfg, files::METRICS_JSON),
        &serde_json::to_string_pretty(&reports).expect("reports serialize"),
    )?;

    let mut per_imp = String::from("condition,imputation,scope,mae,rmse,pearson_r,n\n");
    for (label, set) in [("enhanced", enhanced), ("baseline", baseline)] {
        if let Some(set) = set {
            for (j, r) in per_imputation_reports(&truth, label, set)? {
                per_imp.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.condition,
                    j,
                    r.scope.label(),
                    periodica::series::format_value(r.mae),
                    periodica::series::format_value(r.rmse),
                    periodica::series::format_value(r.pearson_r),
                    r.n
                ));
            }
        }
    }
    recorder.write(&out_path(cfg, files::METRICS_PER_IMPUTATION), &per_imp)?;
    Ok(Some(reports))
}

/// Runs every stage in order, collecting timings, warnings, verdicts, and
/// file checksums into the manifest. A failing stage renames its partial
/// outputs to `.partial` and aborts with the stage name.
pub fn run_pipeline(cfg: &PipelineConfig) -> CliResult<RunManifest> {
    ensure_out_dir(cfg)?;
    let mut manifest = RunManifest::new(
        serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))?,
    );
    let mut all_files: Vec<PathBuf> = Vec::new();

    let run_stage = |name: &str,
                         manifest: &mut RunManifest,
                         all_files: &mut Vec<PathBuf>,
                         body: &mut dyn FnMut(&mut StageRecorder) -> CliResult<()>|
     -> CliResult<()> {
        let mut recorder = StageRecorder::default();
        let start = Instant::now();
        match body(&mut recorder) {
            Ok(()) => {
                manifest.record_stage(name, start.elapsed().as_millis() as u64);
                all_files.append(&mut recorder.files);
                Ok(())
            }
            Err(e) => {
                recorder.mark_partial();
                Err(e.in_stage(name))
            }
        }
    };

    let input = load_input(cfg)?;

    let mut masked_slot: Option<MaskedSeries> = None;
    run_stage("simulate", &mut manifest, &mut all_files, &mut |rec| {
        masked_slot = Some(stage_simulate(cfg, &input, rec)?);
        Ok(())
    })?;
    let masked = masked_slot.expect("simulate stage ran");
    manifest.warnings.extend(masked.warnings.clone());

    let mut analyses: Vec<ComponentAnalysis> = Vec::new();
    run_stage("components", &mut manifest, &mut all_files, &mut |rec| {
        analyses = stage_components(cfg, &masked.observed, rec)?;
        Ok(())
    })?;
    manifest.significant_components = analyses
        .iter()
        .filter(|a| a.significant)
        .map(|a| a.spec.name.clone())
        .collect();

    let columns = significant_columns(&analyses, masked.observed.len());
    let mut impute_slot: Option<ImputeOutcome> = None;
    run_stage("impute", &mut manifest, &mut all_files, &mut |rec| {
        impute_slot = Some(stage_impute(cfg, &masked, &columns, rec)?);
        Ok(())
    })?;
    let outcome = impute_slot.expect("impute stage ran");
    manifest.warnings.extend(outcome.warnings.clone());

    let mut combined: Vec<(String, TimeSeries)> = Vec::new();
    for (label, set) in [
        ("enhanced", outcome.enhanced.as_ref()),
        ("baseline", outcome.baseline.as_ref()),
    ] {
        if let Some(set) = set {
            let values: Vec<Option<f64>> = set.combined.iter().map(|&v| Some(v)).collect();
            combined.push((label.to_string(), masked.observed.with_values(values)?));
        }
    }

    let mut smoothed: Vec<(String, TimeSeries)> = Vec::new();
    let mut smooth_warnings: Vec<String> = Vec::new();
    run_stage("smooth", &mut manifest, &mut all_files, &mut |rec| {
        let (series, warns) = stage_smooth(cfg, &combined, rec)?;
        smoothed = series;
        smooth_warnings = warns;
        Ok(())
    })?;
    manifest.warnings.append(&mut smooth_warnings);

    let mut eval_warnings: Vec<String> = Vec::new();
    run_stage("evaluate", &mut manifest, &mut all_files, &mut |rec| {
        stage_evaluate(
            cfg,
            &masked,
            outcome.enhanced.as_ref(),
            outcome.baseline.as_ref(),
            rec,
            &mut eval_warnings,
        )?;
        Ok(())
    })?;
    manifest.warnings.append(&mut eval_warnings);

    run_stage("plot-data", &mut manifest, &mut all_files, &mut |rec| {
        plotdata::emit_plot_data(cfg, &masked, &combined, &smoothed, rec)
    })?;

    manifest.record_files(&cfg.output, &all_files)?;
    let manifest_json = manifest.to_json();
    std::fs::write(out_path(cfg, files::MANIFEST), manifest_json)
        .map_err(|e| CliError::Data(format!("cannot write manifest: {e}")))?;
    Ok(manifest)
}

// --- standalone subcommand entry points ---

pub fn cmd_simulate(cfg: &PipelineConfig) -> CliResult<()> {
    ensure_out_dir(cfg)?;
    let input = load_input(cfg)?;
    let mut recorder = StageRecorder::default();
    match stage_simulate(cfg, &input, &mut recorder) {
        Ok(masked) => {
            for w in &masked.warnings {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Err(e) => {
            recorder.mark_partial();
            Err(e.in_stage("simulate"))
        }
    }
}

/// Loads the masked series written by the simulate stage.
pub fn load_masked(cfg: &PipelineConfig) -> CliResult<MaskedSeries> {
    let masked_path = out_path(cfg, files::MASKED);
    if !masked_path.exists() {
        return Err(CliError::Data(format!(
            "{} not found; run the simulate stage first",
            masked_path.display()
        )));
    }
    let observed = load_series(&masked_path, "date", "value")?;
    let holdout_path = out_path(cfg, files::HOLDOUT);
    let holdout = if holdout_path.exists() {
        load_holdout(&holdout_path, &observed)?
    } else {
        BTreeMap::new()
    };
    assemble_masked(observed, holdout)
}

pub fn cmd_components(cfg: &PipelineConfig) -> CliResult<()> {
    ensure_out_dir(cfg)?;
    let masked = load_masked(cfg)?;
    let mut recorder = StageRecorder::default();
    match stage_components(cfg, &masked.observed, &mut recorder) {
        Ok(analyses) => {
            for a in &analyses {
                println!(
                    "component {}: significant = {}",
                    a.spec.name, a.significant
                );
            }
            Ok(())
        }
        Err(e) => {
            recorder.mark_partial();
            Err(e.in_stage("components"))
        }
    }
}

pub fn cmd_impute(cfg: &PipelineConfig) -> CliResult<()> {
    ensure_out_dir(cfg)?;
    let masked = load_masked(cfg)?;
    let summary = load_components_file(&out_path(cfg, files::COMPONENTS))?;
    let n = masked.observed.len();
    let mut columns = Vec::new();
    for c in summary.components.iter().filter(|c| c.significant) {
        let median = load_median(&out_path(cfg, &files::median(&c.name)))?;
        columns.push((c.name.clone(), tile_median(&median, n, 0)));
    }
    let mut recorder = StageRecorder::default();
    match stage_impute(cfg, &masked, &columns, &mut recorder) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Err(e) => {
            recorder.mark_partial();
            Err(e.in_stage("impute"))
        }
    }
}

fn load_available_combined(cfg: &PipelineConfig) -> CliResult<Vec<(String, TimeSeries, Vec<usize>)>> {
    let mut out = Vec::new();
    for label in ["enhanced", "baseline"] {
        let path = out_path(cfg, &files::combined(label));
        if path.exists() {
            let (series, missing_rows) = load_combined(&path)?;
            out.push((label.to_string(), series, missing_rows));
        }
    }
    if out.is_empty() {
        return Err(CliError::Data(
            "no imputed_*_combined.csv found; run the impute stage first".into(),
        ));
    }
    Ok(out)
}

pub fn cmd_smooth(cfg: &PipelineConfig) -> CliResult<()> {
    ensure_out_dir(cfg)?;
    let combined: Vec<(String, TimeSeries)> = load_available_combined(cfg)?
        .into_iter()
        .map(|(label, series, _)| (label, series))
        .collect();
    let mut recorder = StageRecorder::default();
    match stage_smooth(cfg, &combined, &mut recorder) {
        Ok((_, warns)) => {
            for w in &warns {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Err(e) => {
            recorder.mark_partial();
            Err(e.in_stage("smooth"))
        }
    }
}

/// Rebuilds completion sets from combined files for standalone evaluation.
/// Only the combined series and mask matter for scoring, so Rubin parts and
/// per-imputation completions are not reconstructed.
fn completed_from_combined(series: &TimeSeries, missing_rows: Vec<usize>) -> CompletedSet {
    let combined: Vec<f64> = series.values().iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    CompletedSet {
        completions: vec![combined.clone()],
        fits: Vec::new(),
        combined,
        missing_rows,
        within: Vec::new(),
        between: Vec::new(),
        total: Vec::new(),
    }
}

pub fn cmd_evaluate(cfg: &PipelineConfig) -> CliResult<()> {
    ensure_out_dir(cfg)?;
    let masked = load_masked(cfg)?;
    let loaded = load_available_combined(cfg)?;
    let mut enhanced = None;
    let mut baseline = None;
    for (label, series, missing_rows) in loaded {
        let set = completed_from_combined(&series, missing_rows);
        if label == "enhanced" {
            enhanced = Some(set);
        } else {
            baseline = Some(set);
        }
    }
    let mut recorder = StageRecorder::default();
    let mut warnings = Vec::new();
    match stage_evaluate(
        cfg,
        &masked,
        enhanced.as_ref(),
        baseline.as_ref(),
        &mut recorder,
        &mut warnings,
    ) {
        Ok(reports) => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            if let Some(reports) = reports {
                print!("{}", evaluation::reports_to_csv(&reports));
            }
            Ok(())
        }
        Err(e) => {
            recorder.mark_partial();
            Err(e.in_stage("evaluate"))
        }
    }
}

pub fn cmd_plotdata(cfg: &PipelineConfig) -> CliResult<()> {
    ensure_out_dir(cfg)?;
    let masked = load_masked(cfg)?;
    let combined: Vec<(String, TimeSeries)> = load_available_combined(cfg)
        .unwrap_or_default()
        .into_iter()
        .map(|(label, series, _)| (label, series))
        .collect();
    let mut smoothed = Vec::new();
    for label in ["enhanced", "baseline"] {
        for (kind, file) in [("loess", files::loess(label)), ("ma", files::ma(label))] {
            let path = out_path(cfg, &file);
            if path.exists() {
                let series = load_series(&path, "date", "value")?;
                smoothed.push((format!("{kind}_{label}"), series));
            }
        }
    }
    let mut recorder = StageRecorder::default();
    match plotdata::emit_plot_data(cfg, &masked, &combined, &smoothed, &mut recorder) {
        Ok(()) => Ok(()),
        Err(e) => {
            recorder.mark_partial();
            Err(e.in_stage("plot-data"))
        }
    }
}

pub fn manifest_path(cfg: &PipelineConfig) -> PathBuf {
    out_path(cfg, files::MANIFEST)
}

/// Output path helper for tests and the binary.
pub fn artifact_path(cfg: &PipelineConfig, name: &str) -> PathBuf {
    out_path(cfg, name)
}

pub fn stage_file_exists(cfg: &PipelineConfig, name: &str) -> bool {
    out_path(cfg, name).exists()
}

/// Re-export for the plot-data module.
pub(crate) fn out_path_for(cfg: &PipelineConfig, name: &str) -> PathBuf {
    out_path(cfg, name)
}
