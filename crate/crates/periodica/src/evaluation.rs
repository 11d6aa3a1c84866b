//! Imputation scoring: MAE, RMSE, Pearson correlation, and the
//! enhanced-vs-baseline comparison table.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imputer::CompletedSet;
use crate::series::{format_value, TimeSeries};

/// Truth/estimate pair for scoring.
#[derive(Debug, Clone)]
pub struct EvalPair {
    truth: Vec<f64>,
    estimate: Vec<f64>,
}

impl EvalPair {
    pub fn new(truth: Vec<f64>, estimate: Vec<f64>) -> Result<Self> {
        if truth.is_empty() || truth.len() != estimate.len() {
            return Err(Error::EvalMismatch(format!(
                "lengths {} vs {}",
                truth.len(),
                estimate.len()
            )));
        }
        if truth
            .iter()
            .chain(estimate.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::EvalMismatch("non-finite entries".into()));
        }
        Ok(Self { truth, estimate })
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }
}

/// Mean absolute error (1/n) sum |y_i - yhat_i|.
pub fn mae(pair: &EvalPair) -> f64 {
    let n = pair.len() as f64;
    pair.truth
        .iter()
        .zip(&pair.estimate)
        .map(|(y, yhat)| (y - yhat).abs())
        .sum::<f64>()
        / n
}

/// Root mean squared error sqrt((1/n) sum (y_i - yhat_i)^2).
pub fn rmse(pair: &EvalPair) -> f64 {
    let n = pair.len() as f64;
    (pair
        .truth
        .iter()
        .zip(&pair.estimate)
        .map(|(y, yhat)| (y - yhat) * (y - yhat))
        .sum::<f64>()
        / n)
        .sqrt()
}

/// Sample Pearson correlation; errors on constant input.
pub fn pearson(pair: &EvalPair) -> Result<f64> {
    let n = pair.len() as f64;
    let mean_y = pair.truth.iter().sum::<f64>() / n;
    let mean_e = pair.estimate.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (y, yhat) in pair.truth.iter().zip(&pair.estimate) {
        let dy = y - mean_y;
        let de = yhat - mean_e;
        sxy += dy * de;
        sxx += dy * dy;
        syy += de * de;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Scoring scope: masked cells only, or the whole series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    MissingCellsOnly,
    FullSeries,
}

impl Scope {
    pub fn label(self) -> &'static str {
        match self {
            Scope::MissingCellsOnly => "missing-cells-only",
            Scope::FullSeries => "full-series",
        }
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub condition: String,
    pub scope: Scope,
    pub mae: f64,
    pub rmse: f64,
    pub pearson_r: f64,
    pub n: usize,
}

/// Scores one completed set against the truth over the given scope.
pub fn score_condition(
    truth: &TimeSeries,
    completed: &CompletedSet,
    condition: &str,
    scope: Scope,
) -> Result<EvalReport> {
    let truth_values = truth.complete_values()?;
    if truth_values.len() != completed.combined.len() {
        return Err(Error::EvalMismatch(format!(
            "truth length {} vs completed length {}",
            truth_values.len(),
            completed.combined.len()
        )));
    }
    let indices: Vec<usize> = match scope {
        Scope::MissingCellsOnly => completed.missing_rows.clone(),
        Scope::FullSeries => (0..truth_values.len()).collect(),
    };
    if indices.is_empty() {
        return Err(Error::EvalMismatch("no cells in scope".into()));
    }
    let pair = EvalPair::new(
        indices.iter().map(|&i| truth_values[i]).collect(),
        indices.iter().map(|&i| completed.combined[i]).collect(),
    )?;
    Ok(EvalReport {
        condition: condition.to_string(),
        scope,
        mae: mae(&pair),
        rmse: rmse(&pair),
        pearson_r: pearson(&pair)?,
        n: pair.len(),
    })
}

/// Compares the enhanced and baseline conditions over both scopes. Both
/// completed sets must share the same mask.
pub fn compare_conditions(
    truth: &TimeSeries,
    enhanced: &CompletedSet,
    baseline: &CompletedSet,
) -> Result<Vec<EvalReport>> {
    if enhanced.missing_rows != baseline.missing_rows {
        return Err(Error::EvalMismatch(
            "conditions were imputed under different masks".into(),
        ));
    }
    let mut reports = Vec::with_capacity(4);
    for scope in [Scope::MissingCellsOnly, Scope::FullSeries] {
        reports.push(score_condition(truth, enhanced, "enhanced", scope)?);
        reports.push(score_condition(truth, baseline, "baseline", scope)?);
    }
    Ok(reports)
}

/// Comparison table as CSV: condition, scope, mae, rmse, pearson_r, n.
pub fn reports_to_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("condition,scope,mae,rmse,pearson_r,n\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.condition,
            r.scope.label(),
            format_value(r.mae),
            format_value(r.rmse),
            format_value(r.pearson_r),
            r.n
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair(y: &[f64], yhat: &[f64]) -> EvalPair {
        EvalPair::new(y.to_vec(), yhat.to_vec()).unwrap()
    }

    #[test]
    fn mae_worked_examples() {
        assert_eq!(mae(&pair(&[1.0, 2.0], &[1.0, 2.0])), 0.0);
        assert!((mae(&pair(&[1.0, 2.0], &[2.0, 4.0])) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rmse_worked_examples() {
        assert_eq!(rmse(&pair(&[5.0, 6.0], &[5.0, 6.0])), 0.0);
        let got = rmse(&pair(&[0.0, 0.0], &[3.0, 4.0]));
        assert!((got - 12.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pearson_worked_examples() {
        let y = [1.0, 2.0, 3.0];
        assert!((pearson(&pair(&y, &y)).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert!((pearson(&pair(&y, &neg)).unwrap() + 1.0).abs() < 1e-12);
        // Hand evaluation: centered cross product 3, variances 2 and 14/3.
        let got = pearson(&pair(&y, &[1.0, 2.0, 4.0])).unwrap();
        let expect = 3.0 / (2.0f64 * 14.0 / 3.0).sqrt();
        assert!((got - expect).abs() < 1e-12);
        assert!((expect - 0.98198).abs() < 1e-5);
    }

    #[test]
    fn pearson_constant_input_rejected() {
        assert!(matches!(
            pearson(&pair(&[2.0, 2.0], &[1.0, 3.0])),
            Err(Error::ConstantInput)
        ));
    }

    #[test]
    fn mae_bounded_by_rmse_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let n = rng.random_range(1..40);
            let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 20.0 - 10.0).collect();
            let yhat: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 20.0 - 10.0).collect();
            let p = pair(&y, &yhat);
            assert!(mae(&p) <= rmse(&p) + 1e-12);
        }
    }

    #[test]
    fn metrics_invariant_under_common_permutation() {
        let y = [1.0, 4.0, -2.0, 8.0];
        let yhat = [0.5, 5.0, -1.0, 7.0];
        let perm = [2usize, 0, 3, 1];
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let yhp: Vec<f64> = perm.iter().map(|&i| yhat[i]).collect();
        assert!((mae(&pair(&y, &yhat)) - mae(&pair(&yp, &yhp))).abs() < 1e-15);
        assert!((rmse(&pair(&y, &yhat)) - rmse(&pair(&yp, &yhp))).abs() < 1e-15);
    }

    #[test]
    fn rmse_shift_minimized_at_mean_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 50;
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0).collect();
        let yhat: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0).collect();
        let c_star: f64 =
            y.iter().zip(&yhat).map(|(a, b)| a - b).sum::<f64>() / n as f64;
        let shifted = |c: f64| -> f64 {
            let adj: Vec<f64> = yhat.iter().map(|v| v + c).collect();
            rmse(&pair(&y, &adj))
        };
        let best = shifted(c_star);
        for delta in [-0.5, -0.05, 0.05, 0.5] {
            assert!(shifted(c_star + delta) >= best - 1e-12);
        }
    }

    fn completed(values: Vec<f64>, missing_rows: Vec<usize>) -> CompletedSet {
        CompletedSet {
            completions: vec![values.clone()],
            fits: Vec::new(),
            combined: values,
            missing_rows,
            within: Vec::new(),
            between: Vec::new(),
            total: Vec::new(),
        }
    }

    #[test]
    fn identical_conditions_give_identical_rows() {
        let truth = crate::series::TimeSeries::new(
            chrono::NaiveDate::from_ymd_opt(2014, 1, 1).unwrap(),
            vec![Some(1.0), Some(2.0), Some(3.0), Some(4.0)],
        )
        .unwrap();
        let a = completed(vec![1.0, 2.5, 3.0, 3.5], vec![1, 3]);
        let b = completed(vec![1.0, 2.5, 3.0, 3.5], vec![1, 3]);
        let reports = compare_conditions(&truth, &a, &b).unwrap();
        assert_eq!(reports.len(), 4);
        for pair in reports.chunks(2) {
            assert_eq!(pair[0].mae, pair[1].mae);
            assert_eq!(pair[0].rmse, pair[1].rmse);
            assert_eq!(pair[0].pearson_r, pair[1].pearson_r);
            assert_eq!(pair[0].n, pair[1].n);
        }
    }

    #[test]
    fn one_cell_worse_by_delta_shifts_mae_by_delta_over_n() {
        let truth = crate::series::TimeSeries::new(
            chrono::NaiveDate::from_ymd_opt(2014, 1, 1).unwrap(),
            vec![Some(1.0), Some(2.0), Some(3.0), Some(4.0), Some(5.0)],
        )
        .unwrap();
        let missing = vec![1usize, 3];
        // Enhanced hits the truth exactly at masked cells; baseline misses
        // one cell by delta.
        let delta = 0.8;
        let enhanced = completed(vec![1.0, 2.0, 3.0, 4.0, 5.0], missing.clone());
        let baseline = completed(vec![1.0, 2.0, 3.0, 4.0 + delta, 5.0], missing.clone());
        let reports = compare_conditions(&truth, &enhanced, &baseline).unwrap();
        let find = |condition: &str| {
            reports
                .iter()
                .find(|r| r.condition == condition && r.scope == Scope::MissingCellsOnly)
                .unwrap()
        };
        let gap = find("baseline").mae - find("enhanced").mae;
        assert!((gap - delta / missing.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn mask_mismatch_rejected() {
        let truth = crate::series::TimeSeries::new(
            chrono::NaiveDate::from_ymd_opt(2014, 1, 1).unwrap(),
            vec![Some(1.0), Some(2.0), Some(3.0)],
        )
        .unwrap();
        let a = completed(vec![1.0, 2.0, 3.0], vec![1]);
        let b = completed(vec![1.0, 2.0, 3.0], vec![2]);
        assert!(matches!(
            compare_conditions(&truth, &a, &b),
            Err(Error::EvalMismatch(_))
        ));
    }

    #[test]
    fn pearson_invariant_under_positive_affine_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 30;
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let yhat: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let base = pearson(&pair(&y, &yhat)).unwrap();
        let y2: Vec<f64> = y.iter().map(|v| 3.5 * v + 7.0).collect();
        let yhat2: Vec<f64> = yhat.iter().map(|v| 0.2 * v - 4.0).collect();
        let moved = pearson(&pair(&y2, &yhat2)).unwrap();
        assert!((base - moved).abs() < 1e-12);
    }
}
