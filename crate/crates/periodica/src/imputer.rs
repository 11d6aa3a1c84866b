//! Bootstrapped-EM multiple imputation of a daily target series under MAR,
//! with tiled periodic median vectors as fully observed auxiliary
//! covariates.
//!
//! The model is a multivariate normal over [target, covariates]. Only the
//! target column may be missing. Each imputation resamples the rows with
//! replacement, fits (mu, Sigma) by EM on the resample, and draws every
//! missing cell of the original matrix from its conditional normal under
//! that fit. Completions are combined cell-wise, with Rubin's decomposition
//! of the imputation variance (total = within + (1 + 1/m) * between).

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::missingness::MaskedSeries;
use crate::seeding::derive_seed;

/// Which covariate set the design matrix carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixMode {
    /// Target, tiled periodic medians, trend terms.
    Enhanced,
    /// Target and trend terms only.
    Baseline,
}

/// Rows are time indices; column 0 is the (possibly missing) target, the
/// remaining columns are fully observed covariates.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    target: Vec<Option<f64>>,
    covariates: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl DesignMatrix {
    /// Assembles a matrix from a target column and named covariates,
    /// dropping constant covariates with a warning.
    pub fn new(target: Vec<Option<f64>>, covariates: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n = target.len();
        if n == 0 {
            return Err(Error::EmptySeries);
        }
        if target.iter().all(|v| v.is_none()) {
            return Err(Error::InvalidParam("target column entirely missing".into()));
        }
        let mut names = vec!["target".to_string()];
        let mut kept = Vec::new();
        let mut warnings = Vec::new();
        for (name, column) in covariates {
            if column.len() != n {
                return Err(Error::InvalidParam(format!(
                    "covariate '{name}' length {} != {n}",
                    column.len()
                )));
            }
            if column.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "covariate '{name}' has non-finite entries"
                )));
            }
            let (min, max) = column
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            if min == max {
                warnings.push(format!("dropped constant covariate column '{name}'"));
                continue;
            }
            names.push(name);
            kept.push(column);
        }
        Ok(Self {
            names,
            target,
            covariates: kept,
            warnings,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    /// Total column count including the target.
    pub fn n_cols(&self) -> usize {
        1 + self.covariates.len()
    }

    pub fn target(&self) -> &[Option<f64>] {
        &self.target
    }

    pub fn missing_rows(&self) -> Vec<usize> {
        self.target
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.is_none().then_some(i))
            .collect()
    }

    pub fn covariate_row(&self, i: usize) -> Vec<f64> {
        self.covariates.iter().map(|c| c[i]).collect()
    }

    fn resampled(&self, rng: &mut ChaCha8Rng) -> Self {
        let n = self.n_rows();
        let picks: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        Self {
            names: self.names.clone(),
            target: picks.iter().map(|&i| self.target[i]).collect(),
            covariates: self
                .covariates
                .iter()
                .map(|c| picks.iter().map(|&i| c[i]).collect())
                .collect(),
            warnings: Vec::new(),
        }
    }
}

/// Builds the design matrix for one imputation condition.
///
/// Enhanced mode appends one tiled median column per significant component;
/// both modes carry linear and quadratic trend terms t/n and (t/n)^2.
/// Enhanced mode with no surviving component falls back to the baseline
/// columns with a warning.
pub fn build_design_matrix(
    masked: &MaskedSeries,
    components: &[(String, Vec<f64>)],
    mode: MatrixMode,
) -> Result<DesignMatrix> {
    let n = masked.observed.len();
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let mut fallback_warning = None;
    if mode == MatrixMode::Enhanced {
        if components.is_empty() {
            fallback_warning = Some(
                "no significant components available; falling back to baseline columns"
                    .to_string(),
            );
        }
        for (name, tiled) in components {
            columns.push((format!("comp_{name}"), tiled.clone()));
        }
    }
    let trend: Vec<f64> = (0..n).map(|t| t as f64 / n as f64).collect();
    let trend_sq: Vec<f64> = trend.iter().map(|v| v * v).collect();
    columns.push(("t".to_string(), trend));
    columns.push(("t2".to_string(), trend_sq));

    let mut dm = DesignMatrix::new(masked.observed.values().to_vec(), columns)?;
    if let Some(w) = fallback_warning {
        dm.warnings.push(w);
    }
    Ok(dm)
}

/// EM stopping and stabilization parameters.
#[derive(Debug, Clone, Copy)]
pub struct EmConfig {
    /// Convergence threshold on the largest standardized parameter change.
    pub tol: f64,
    pub max_iter: usize,
    /// Diagonal inflation added each M-step, as a fraction of the average
    /// variance.
    pub ridge: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 500,
            ridge: 1e-4,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParam(format!("tol {} must be > 0", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParam("max_iter must be >= 1".into()));
        }
        if self.ridge < 0.0 {
            return Err(Error::InvalidParam(format!(
                "ridge {} must be >= 0",
                self.ridge
            )));
        }
        Ok(())
    }
}

/// Fitted multivariate-normal parameters with the convergence trace.
#[derive(Debug, Clone)]
pub struct EmFit {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub iterations: usize,
    /// Observed-data log-likelihood, one entry for the start values plus one
    /// per iteration.
    pub loglik: Vec<f64>,
    pub converged: bool,
}

impl EmFit {
    /// Conditional mean and variance of the target given a covariate row.
    pub fn conditional(&self, covariates: &[f64]) -> Result<(f64, f64)> {
        let d = self.mu.len();
        if covariates.len() != d - 1 {
            return Err(Error::InvalidParam(format!(
                "covariate row length {} != {}",
                covariates.len(),
                d - 1
            )));
        }
        if d == 1 {
            return Ok((self.mu[0], self.sigma[(0, 0)]));
        }
        let sigma_oo = self.sigma.view((1, 1), (d - 1, d - 1)).clone_owned();
        let sigma_ot = self.sigma.view((1, 0), (d - 1, 1)).clone_owned();
        let chol = Cholesky::new(sigma_oo).ok_or(Error::SingularCovariance)?;
        let beta = chol.solve(&sigma_ot);
        let centered = DVector::from_iterator(
            d - 1,
            covariates.iter().enumerate().map(|(j, &c)| c - self.mu[j + 1]),
        );
        let mean = self.mu[0] + beta.column(0).dot(&centered);
        let var = self.sigma[(0, 0)] - beta.column(0).dot(&sigma_ot.column(0));
        Ok((mean, var))
    }
}

fn log_density(
    x: &DVector<f64>,
    mu: &DVector<f64>,
    chol: &Cholesky<f64, nalgebra::Dyn>,
) -> f64 {
    let d = x.len() as f64;
    let centered = x - mu;
    let solved = chol.solve(&centered);
    let quad = centered.dot(&solved);
    let logdet: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
    -0.5 * (d * (2.0 * std::f64::consts::PI).ln() + logdet + quad)
}

struct Moments {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
}

/// Complete-case moments (rows with the target present); falls back to
/// available-case moments when fewer than two complete rows exist.
fn starting_moments(dm: &DesignMatrix) -> Moments {
    let d = dm.n_cols();
    let n = dm.n_rows();
    let complete: Vec<usize> = (0..n).filter(|&i| dm.target[i].is_some()).collect();
    if complete.len() >= 2 {
        let mut mu = DVector::zeros(d);
        for &i in &complete {
            mu[0] += dm.target[i].unwrap();
            for (j, c) in dm.covariates.iter().enumerate() {
                mu[j + 1] += c[i];
            }
        }
        mu /= complete.len() as f64;
        let mut sigma = DMatrix::zeros(d, d);
        let mut row = vec![0.0f64; d];
        for &i in &complete {
            row[0] = dm.target[i].unwrap() - mu[0];
            for (j, c) in dm.covariates.iter().enumerate() {
                row[j + 1] = c[i] - mu[j + 1];
            }
            for a in 0..d {
                for b in 0..d {
                    sigma[(a, b)] += row[a] * row[b] / complete.len() as f64;
                }
            }
        }
        Moments { mu, sigma }
    } else {
        // Available-case: per-column means over whatever is observed,
        // pairwise products where both entries exist.
        let mut mu = DVector::zeros(d);
        let observed: Vec<f64> = dm.target.iter().flatten().copied().collect();
        mu[0] = observed.iter().sum::<f64>() / observed.len() as f64;
        for (j, c) in dm.covariates.iter().enumerate() {
            mu[j + 1] = c.iter().sum::<f64>() / n as f64;
        }
        let mut sigma = DMatrix::zeros(d, d);
        let var_t = observed
            .iter()
            .map(|v| (v - mu[0]) * (v - mu[0]))
            .sum::<f64>()
            / observed.len() as f64;
        sigma[(0, 0)] = var_t.max(1e-12);
        for (j, cj) in dm.covariates.iter().enumerate() {
            for (k, ck) in dm.covariates.iter().enumerate() {
                let cov = (0..n)
                    .map(|i| (cj[i] - mu[j + 1]) * (ck[i] - mu[k + 1]))
                    .sum::<f64>()
                    / n as f64;
                sigma[(j + 1, k + 1)] = cov;
            }
        }
        for (i, &ti) in dm.target.iter().enumerate() {
            if let Some(t) = ti {
                for (j, c) in dm.covariates.iter().enumerate() {
                    sigma[(0, j + 1)] += (t - mu[0]) * (c[i] - mu[j + 1]);
                }
            }
        }
        for j in 1..d {
            sigma[(0, j)] /= observed.len() as f64;
            sigma[(j, 0)] = sigma[(0, j)];
        }
        Moments { mu, sigma }
    }
}

/// Multivariate-normal EM over a design matrix whose target column may be
/// missing. E-step: expected sufficient statistics with each missing target
/// replaced by its conditional mean plus conditional-variance correction.
/// M-step: maximum-likelihood moments (1/n) with ridge inflation of the
/// diagonal. Stops when the largest standardized parameter change falls
/// below `tol`.
pub fn em_fit(dm: &DesignMatrix, cfg: &EmConfig) -> Result<EmFit> {
    cfg.validate()?;
    let d = dm.n_cols();
    let n = dm.n_rows();
    let start = starting_moments(dm);
    let mut mu = start.mu;
    let mut sigma = start.sigma;
    if cfg.ridge > 0.0 {
        // Stabilize the start the same way as every M-step, so degenerate
        // starting moments cannot stall the first likelihood evaluation.
        let avg_var = sigma.diagonal().iter().sum::<f64>() / d as f64;
        let bump = cfg.ridge * avg_var;
        for j in 0..d {
            sigma[(j, j)] += bump;
        }
    }

    let mut loglik = Vec::with_capacity(cfg.max_iter + 1);
    loglik.push(observed_loglik(dm, &mu, &sigma)?);

    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_iter {
        iterations += 1;

        // E-step quantities shared by all missing rows, since the missing
        // pattern is always {target}.
        let (beta, cond_var) = target_regression(&sigma)?;

        let mut t1 = DVector::<f64>::zeros(d);
        let mut t2 = DMatrix::<f64>::zeros(d, d);
        let mut row = vec![0.0f64; d];
        for i in 0..n {
            for (j, c) in dm.covariates.iter().enumerate() {
                row[j + 1] = c[i];
            }
            row[0] = match dm.target[i] {
                Some(t) => t,
                None => {
                    let mut mean = mu[0];
                    for j in 0..d - 1 {
                        mean += beta[j] * (row[j + 1] - mu[j + 1]);
                    }
                    t2[(0, 0)] += cond_var;
                    mean
                }
            };
            for a in 0..d {
                t1[a] += row[a];
                for b in 0..d {
                    t2[(a, b)] += row[a] * row[b];
                }
            }
        }

        let mu_new = &t1 / n as f64;
        let mut sigma_new = t2 / n as f64 - &mu_new * mu_new.transpose();
        sigma_new = (&sigma_new + sigma_new.transpose()) * 0.5;
        if cfg.ridge > 0.0 {
            let avg_var = sigma_new.diagonal().iter().sum::<f64>() / d as f64;
            let bump = cfg.ridge * avg_var;
            for j in 0..d {
                sigma_new[(j, j)] += bump;
            }
        }

        let scale: Vec<f64> = (0..d)
            .map(|j| sigma_new[(j, j)].max(1e-12).sqrt())
            .collect();
        let mut delta: f64 = 0.0;
        for j in 0..d {
            delta = delta.max((mu_new[j] - mu[j]).abs() / scale[j]);
            for k in 0..d {
                delta = delta.max((sigma_new[(j, k)] - sigma[(j, k)]).abs() / (scale[j] * scale[k]));
            }
        }

        mu = mu_new;
        sigma = sigma_new;
        loglik.push(observed_loglik(dm, &mu, &sigma)?);

        if delta < cfg.tol {
            converged = true;
            break;
        }
    }

    Ok(EmFit {
        mu,
        sigma,
        iterations,
        loglik,
        converged,
    })
}

/// Regression of the target on the covariates implied by Sigma:
/// coefficients Sigma_oo^{-1} Sigma_ot and the conditional variance.
fn target_regression(sigma: &DMatrix<f64>) -> Result<(DVector<f64>, f64)> {
    let d = sigma.nrows();
    if d == 1 {
        return Ok((DVector::zeros(0), sigma[(0, 0)]));
    }
    let sigma_oo = sigma.view((1, 1), (d - 1, d - 1)).clone_owned();
    let sigma_ot = sigma.view((1, 0), (d - 1, 1)).clone_owned();
    let chol = Cholesky::new(sigma_oo).ok_or(Error::SingularCovariance)?;
    let beta = chol.solve(&sigma_ot);
    let cond_var = (sigma[(0, 0)] - beta.column(0).dot(&sigma_ot.column(0))).max(0.0);
    Ok((beta.column(0).clone_owned(), cond_var))
}

fn observed_loglik(dm: &DesignMatrix, mu: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<f64> {
    let d = dm.n_cols();
    let chol_full =
        Cholesky::new(sigma.clone()).ok_or(Error::SingularCovariance)?;
    let chol_obs = if d > 1 {
        Some(
            Cholesky::new(sigma.view((1, 1), (d - 1, d - 1)).clone_owned())
                .ok_or(Error::SingularCovariance)?,
        )
    } else {
        None
    };
    let mu_obs = mu.rows(1, d - 1).clone_owned();

    let mut total = 0.0;
    let mut full_row = DVector::zeros(d);
    let mut obs_row = DVector::zeros(d - 1);
    for i in 0..dm.n_rows() {
        match dm.target[i] {
            Some(t) => {
                full_row[0] = t;
                for (j, c) in dm.covariates.iter().enumerate() {
                    full_row[j + 1] = c[i];
                }
                total += log_density(&full_row, mu, &chol_full);
            }
            None => {
                if let Some(chol) = &chol_obs {
                    for (j, c) in dm.covariates.iter().enumerate() {
                        obs_row[j] = c[i];
                    }
                    total += log_density(&obs_row, &mu_obs, chol);
                }
            }
        }
    }
    Ok(total)
}

/// How missing cells are filled from the conditional distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrawMode {
    /// Draw from Normal(conditional mean, conditional variance).
    Stochastic,
    /// Return the conditional mean (variance forced to zero).
    Deterministic,
}

/// Completes one row: an observed target passes through unchanged, a
/// missing target is drawn from its conditional normal under `fit`.
pub fn conditional_draw(
    target: Option<f64>,
    covariates: &[f64],
    fit: &EmFit,
    rng: &mut ChaCha8Rng,
    mode: DrawMode,
) -> Result<f64> {
    if let Some(v) = target {
        return Ok(v);
    }
    let (mean, var) = fit.conditional(covariates)?;
    if var < -1e-10 {
        return Err(Error::NegativeVariance(var));
    }
    let var = var.max(0.0);
    match mode {
        DrawMode::Deterministic => Ok(mean),
        DrawMode::Stochastic => {
            let z: f64 = rng.sample(StandardNormal);
            Ok(mean + var.sqrt() * z)
        }
    }
}

/// Multiple-imputation settings.
#[derive(Debug, Clone, Copy)]
pub struct ImputationConfig {
    pub imputations: usize,
    pub seed: u64,
    pub em: EmConfig,
    pub draw: DrawMode,
    /// Row bootstrap before each EM fit; disabled only for degenerate
    /// single-imputation configurations.
    pub resample: bool,
}

impl Default for ImputationConfig {
    fn default() -> Self {
        Self {
            imputations: 5,
            seed: 0,
            em: EmConfig::default(),
            draw: DrawMode::Stochastic,
            resample: true,
        }
    }
}

/// The m completions plus combined series and Rubin variance parts.
#[derive(Debug, Clone)]
pub struct CompletedSet {
    /// One completed target column per imputation.
    pub completions: Vec<Vec<f64>>,
    pub fits: Vec<EmFit>,
    /// Cell-wise combination: observed cells keep their observed value,
    /// missing cells average the m draws.
    pub combined: Vec<f64>,
    pub missing_rows: Vec<usize>,
    /// Within-imputation variance per missing cell (aligned to
    /// `missing_rows`).
    pub within: Vec<f64>,
    /// Between-imputation variance per missing cell.
    pub between: Vec<f64>,
    /// Total variance per Rubin's rule: within + (1 + 1/m) * between.
    pub total: Vec<f64>,
}

struct Replicate {
    completed: Vec<f64>,
    cond_vars: Vec<f64>,
    fit: EmFit,
}

fn run_replicate(dm: &DesignMatrix, cfg: &ImputationConfig, j: usize) -> Result<Replicate> {
    let attempts = 4;
    let mut last_err = None;
    for attempt in 0..attempts {
        let stream = (j as u64) * 2 * attempts as u64 + 2 * attempt as u64;
        let mut resample_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, stream));
        let mut draw_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, stream + 1));

        let fit_input = if cfg.resample {
            dm.resampled(&mut resample_rng)
        } else {
            dm.clone()
        };
        match em_fit(&fit_input, &cfg.em) {
            Ok(fit) => {
                let mut completed = Vec::with_capacity(dm.n_rows());
                let mut cond_vars = Vec::new();
                for i in 0..dm.n_rows() {
                    let covs = dm.covariate_row(i);
                    if dm.target[i].is_none() {
                        let (_, var) = fit.conditional(&covs)?;
                        cond_vars.push(var.max(0.0));
                    }
                    completed.push(conditional_draw(
                        dm.target[i],
                        &covs,
                        &fit,
                        &mut draw_rng,
                        cfg.draw,
                    )?);
                }
                return Ok(Replicate {
                    completed,
                    cond_vars,
                    fit,
                });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::ReplicateFailed {
        replicate: j + 1,
        attempts,
        cause: last_err.map_or_else(|| "unknown".into(), |e| e.to_string()),
    })
}

/// Bootstrapped-EM multiple imputation: for each of m imputations, resample
/// rows with replacement, fit EM on the resample, and draw the missing
/// cells of the original matrix under that fit. A replicate whose EM fails
/// is retried with fresh sub-seeds up to three times before aborting.
pub fn bootstrap_em_impute(dm: &DesignMatrix, cfg: &ImputationConfig) -> Result<CompletedSet> {
    if cfg.imputations == 0 {
        return Err(Error::InvalidParam("imputations must be >= 1".into()));
    }
    cfg.em.validate()?;

    let replicates: Vec<Replicate> = (0..cfg.imputations)
        .into_par_iter()
        .map(|j| run_replicate(dm, cfg, j))
        .collect::<Result<Vec<_>>>()?;

    let n = dm.n_rows();
    let missing_rows = dm.missing_rows();
    let m = cfg.imputations as f64;

    let mut combined = Vec::with_capacity(n);
    for i in 0..n {
        match dm.target[i] {
            Some(v) => combined.push(v),
            None => {
                let sum: f64 = replicates.iter().map(|r| r.completed[i]).sum();
                combined.push(sum / m);
            }
        }
    }

    let mut within = Vec::with_capacity(missing_rows.len());
    let mut between = Vec::with_capacity(missing_rows.len());
    let mut total = Vec::with_capacity(missing_rows.len());
    for (cell, &row) in missing_rows.iter().enumerate() {
        let w = replicates.iter().map(|r| r.cond_vars[cell]).sum::<f64>() / m;
        let mean_draw = combined[row];
        let b = if cfg.imputations > 1 {
            replicates
                .iter()
                .map(|r| {
                    let d = r.completed[row] - mean_draw;
                    d * d
                })
                .sum::<f64>()
                / (m - 1.0)
        } else {
            0.0
        };
        within.push(w);
        between.push(b);
        total.push(w + (1.0 + 1.0 / m) * b);
    }

    let (completions, fits) = replicates
        .into_iter()
        .map(|r| (r.completed, r.fit))
        .unzip();

    Ok(CompletedSet {
        completions,
        fits,
        combined,
        missing_rows,
        within,
        between,
        total,
    })
}
