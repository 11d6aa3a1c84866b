//! Periodogram computation and peak nomination for candidate periodic
//! components.
//!
//! Missing entries are mean-filled for detection only; imputation proper is
//! the imputer module's job. Detected peaks are advisory — the pipeline's
//! default component set is fixed, with nomination as an optional mode.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::series::{format_value, TimeSeries};

/// Power at the Fourier grid frequencies j/n, j = 1..floor(n/2).
#[derive(Debug, Clone)]
pub struct Periodogram {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

impl Periodogram {
    /// Tidy CSV: frequency, period_days, power.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frequency,period_days,power\n");
        for (f, p) in self.frequencies.iter().zip(&self.power) {
            out.push_str(&format!(
                "{},{},{}\n",
                format_value(*f),
                format_value(1.0 / f),
                format_value(*p)
            ));
        }
        out
    }
}

/// Centered periodogram I(f_j) = |sum_t (x_t - mean) e^{-i 2 pi f_j t}|^2 / n
/// over the Fourier grid, DC excluded. Missing entries are mean-filled.
pub fn periodogram(series: &TimeSeries) -> Result<Periodogram> {
    let n = series.len();
    if n < 4 {
        return Err(Error::SeriesTooShort { need: 4, got: n });
    }
    let observed: Vec<f64> = series.values().iter().flatten().copied().collect();
    if observed.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;

    // Mean-filled and centered: missing entries become exactly zero.
    let mut buffer: Vec<Complex64> = series
        .values()
        .iter()
        .map(|v| Complex64::new(v.map_or(0.0, |x| x - mean), 0.0))
        .collect();

    let fft = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut buffer);

    let half = n / 2;
    let mut frequencies = Vec::with_capacity(half);
    let mut power = Vec::with_capacity(half);
    for j in 1..=half {
        frequencies.push(j as f64 / n as f64);
        power.push(buffer[j].norm_sqr() / n as f64);
    }
    Ok(Periodogram { frequencies, power })
}

/// Greedy peak selection: local maxima by power, no two peaks within
/// `min_separation`, ordered by descending power with ties broken toward the
/// lower frequency. Returns at most `count` frequencies.
pub fn top_peaks(pg: &Periodogram, count: usize, min_separation: f64) -> Vec<f64> {
    let k = pg.power.len();
    if count == 0 || k == 0 {
        return Vec::new();
    }
    let mut candidates: Vec<usize> = (0..k)
        .filter(|&i| {
            let left_ok = i == 0 || pg.power[i] >= pg.power[i - 1];
            let right_ok = i + 1 == k || pg.power[i] >= pg.power[i + 1];
            left_ok && right_ok
        })
        .collect();
    candidates.sort_by(|&a, &b| {
        pg.power[b]
            .partial_cmp(&pg.power[a])
            .unwrap()
            .then(pg.frequencies[a].partial_cmp(&pg.frequencies[b]).unwrap())
    });

    let mut selected: Vec<f64> = Vec::new();
    for i in candidates {
        if selected.len() == count {
            break;
        }
        let f = pg.frequencies[i];
        if selected.iter().all(|&s| (s - f).abs() >= min_separation) {
            selected.push(f);
        }
    }
    selected
}
