//! Post-imputation diagnostic smoothing: centered moving average and LOESS.
//!
//! Both smoothers require complete input; they run on completed series, so a
//! missing entry means a stage was skipped upstream and is rejected rather
//! than silently filled.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// LOESS neighborhood fraction and local polynomial degree.
#[derive(Debug, Clone, Copy)]
pub struct LoessParams {
    /// Fraction of points per local fit, in (0, 1].
    pub span: f64,
    /// Local polynomial degree, 1 or 2.
    pub degree: usize,
}

impl Default for LoessParams {
    fn default() -> Self {
        Self {
            span: 0.1,
            degree: 1,
        }
    }
}

/// LOESS output plus any fallback warnings.
#[derive(Debug, Clone)]
pub struct LoessFit {
    pub series: TimeSeries,
    pub warnings: Vec<String>,
}

/// Centered moving average with odd window `w`; edge windows shrink and
/// renormalize over the available points.
pub fn moving_average(series: &TimeSeries, w: usize) -> Result<TimeSeries> {
    if w == 0 || w % 2 == 0 {
        return Err(Error::InvalidParam(format!("window {w} must be odd")));
    }
    if w > series.len() {
        return Err(Error::SeriesTooShort {
            need: w,
            got: series.len(),
        });
    }
    let x = series.complete_values()?;
    let n = x.len();
    let half = (w - 1) / 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        let window = &x[lo..=hi];
        let sum: f64 = window.iter().sum();
        out.push(Some(sum / window.len() as f64));
    }
    series.with_values(out)
}

/// Tricube weight (1 - (d/d_max)^3)^3 for d in [0, d_max].
pub fn tricube(d: f64, d_max: f64) -> f64 {
    if d_max <= 0.0 {
        return 1.0;
    }
    let u = (d / d_max).clamp(0.0, 1.0);
    let t = 1.0 - u * u * u;
    t * t * t
}

/// LOESS: at each index, a tricube-weighted least-squares polynomial over
/// the nearest `ceil(span * n)` indices, evaluated at that index. No
/// robustness iterations. A singular local system falls back to the local
/// weighted mean and records a warning.
pub fn loess(series: &TimeSeries, params: &LoessParams) -> Result<LoessFit> {
    if !(params.span > 0.0 && params.span <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "span {} outside (0, 1]",
            params.span
        )));
    }
    if params.degree == 0 || params.degree > 2 {
        return Err(Error::InvalidParam(format!(
            "degree {} must be 1 or 2",
            params.degree
        )));
    }
    let x = series.complete_values()?;
    let n = x.len();
    let q = (params.span * n as f64).ceil() as usize;
    if q < params.degree + 2 {
        return Err(Error::InvalidParam(format!(
            "span {} gives window {q}, need at least {}",
            params.span,
            params.degree + 2
        )));
    }
    let q = q.min(n);

    let mut out = Vec::with_capacity(n);
    let mut warnings = Vec::new();
    for t in 0..n {
        // Contiguous q-point window around t, clipped at the edges.
        let lo = t.saturating_sub((q - 1) / 2).min(n - q);
        let hi = lo + q - 1;
        let d_max = ((t - lo).max(hi - t)) as f64;

        let weights: Vec<f64> = (lo..=hi)
            .map(|i| tricube((i as f64 - t as f64).abs(), d_max))
            .collect();

        match weighted_polyfit_at_zero(&x[lo..=hi], &weights, t - lo, params.degree) {
            Some(v) => out.push(Some(v)),
            None => {
                let wsum: f64 = weights.iter().sum();
                let mean = if wsum > 0.0 {
                    weights
                        .iter()
                        .zip(&x[lo..=hi])
                        .map(|(w, v)| w * v)
                        .sum::<f64>()
                        / wsum
                } else {
                    x[lo..=hi].iter().sum::<f64>() / q as f64
                };
                warnings.push(format!(
                    "singular local fit at index {t}; used weighted mean"
                ));
                out.push(Some(mean));
            }
        }
    }
    Ok(LoessFit {
        series: series.with_values(out)?,
        warnings,
    })
}

/// Weighted least squares of y on centered offsets, returning the fitted
/// value at offset zero (the intercept). `center` is the in-window position
/// of the evaluation index.
fn weighted_polyfit_at_zero(
    y: &[f64],
    weights: &[f64],
    center: usize,
    degree: usize,
) -> Option<f64> {
    let d = degree + 1;
    let mut xtx = DMatrix::<f64>::zeros(d, d);
    let mut xty = DVector::<f64>::zeros(d);
    for (i, (&yi, &wi)) in y.iter().zip(weights).enumerate() {
        if wi == 0.0 {
            continue;
        }
        let u = i as f64 - center as f64;
        let mut powers = [0.0f64; 3];
        powers[0] = 1.0;
        for a in 1..d {
            powers[a] = powers[a - 1] * u;
        }
        for a in 0..d {
            for b in 0..d {
                xtx[(a, b)] += wi * powers[a] * powers[b];
            }
            xty[a] += wi * powers[a] * yi;
        }
    }
    // The intercept is the fit at the evaluation index.
    xtx.lu().solve(&xty).map(|coef| coef[0])
}
