//! Kolmogorov-Zurbenko filtering: k-fold iteration of a centered width-m
//! uniform moving average, and its bandpass form (KZFT) built by complex
//! demodulation.
//!
//! Missing entries are handled by per-window renormalization: each average
//! is taken over the valid in-window points only, and a window with no valid
//! point yields a missing output. Edges use the same rule with a shrinking
//! window, so the filter is defined at every index of the input.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Window and iteration count of the base KZ smoother.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KzParams {
    /// Odd window length in samples.
    pub window: usize,
    /// Number of filter iterations.
    pub iterations: usize,
}

impl KzParams {
    pub fn new(window: usize, iterations: usize) -> Result<Self> {
        let p = Self { window, iterations };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window % 2 == 0 {
            return Err(Error::InvalidParam(format!(
                "window {} must be odd and positive",
                self.window
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParam("iterations must be >= 1".into()));
        }
        Ok(())
    }

    pub fn half_width(&self) -> usize {
        (self.window - 1) / 2
    }

    /// Total half-support of the iterated filter, k*(m-1)/2.
    pub fn support_half_width(&self) -> usize {
        self.iterations * self.half_width()
    }
}

/// KZ parameters plus the bandpass center frequency in cycles/sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KzftParams {
    pub window: usize,
    pub iterations: usize,
    /// Center frequency, 0 <= nu <= 0.5.
    pub nu: f64,
}

impl KzftParams {
    pub fn new(window: usize, iterations: usize, nu: f64) -> Result<Self> {
        let p = Self {
            window,
            iterations,
            nu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.kz().validate()?;
        if !self.nu.is_finite() || self.nu < 0.0 || self.nu > 0.5 {
            return Err(Error::InvalidParam(format!(
                "frequency {} outside [0, 0.5]",
                self.nu
            )));
        }
        Ok(())
    }

    pub fn kz(&self) -> KzParams {
        KzParams {
            window: self.window,
            iterations: self.iterations,
        }
    }
}

fn ma_pass<T>(x: &[Option<T>], half: usize) -> Vec<Option<T>>
where
    T: Copy + Default + std::ops::AddAssign + std::ops::Div<f64, Output = T>,
{
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        let mut sum = T::default();
        let mut count = 0usize;
        for v in &x[lo..=hi] {
            if let Some(v) = v {
                sum += *v;
                count += 1;
            }
        }
        out.push(if count == 0 {
            None
        } else {
            Some(sum / count as f64)
        });
    }
    out
}

fn kz_iterate<T>(values: &[Option<T>], params: &KzParams) -> Vec<Option<T>>
where
    T: Copy + Default + std::ops::AddAssign + std::ops::Div<f64, Output = T>,
{
    let half = params.half_width();
    let mut current = values.to_vec();
    for _ in 0..params.iterations {
        current = ma_pass(&current, half);
    }
    current
}

/// KZ smoothing of a real series.
pub fn kz_smooth(values: &[Option<f64>], params: &KzParams) -> Result<Vec<Option<f64>>> {
    params.validate()?;
    Ok(kz_iterate(values, params))
}

/// KZ smoothing of a complex series.
pub fn kz_smooth_complex(
    values: &[Option<Complex64>],
    params: &KzParams,
) -> Result<Vec<Option<Complex64>>> {
    params.validate()?;
    Ok(kz_iterate(values, params))
}

/// Bandpass extraction of the component at frequency `nu` by complex
/// demodulation: shift the band of interest to DC, KZ-smooth, shift back.
/// For nu > 0 the reconstruction doubles the real part to recover the full
/// cosine amplitude; the DC band (nu = 0) is not doubled.
pub fn kzft_bandpass(values: &[Option<f64>], params: &KzftParams) -> Result<Vec<Option<f64>>> {
    params.validate()?;
    if values.len() <= params.window {
        return Err(Error::SeriesTooShort {
            need: params.window,
            got: values.len(),
        });
    }

    let demodulated: Vec<Option<Complex64>> = values
        .iter()
        .enumerate()
        .map(|(t, v)| {
            v.map(|x| Complex64::from_polar(1.0, -2.0 * PI * params.nu * t as f64) * x)
        })
        .collect();

    let smoothed = kz_smooth_complex(&demodulated, &params.kz())?;

    Ok(smoothed
        .iter()
        .enumerate()
        .map(|(t, z)| {
            z.map(|z| {
                let w = z * Complex64::from_polar(1.0, 2.0 * PI * params.nu * t as f64);
                if params.nu > 0.0 {
                    2.0 * w.re
                } else {
                    w.re
                }
            })
        })
        .collect())
}

/// Impulse response of the k-iterated uniform width-m moving average: the
/// k-fold self-convolution of the uniform kernel.
pub(crate) fn iterated_uniform_kernel(m: usize, k: usize) -> Vec<f64> {
    let uniform = vec![1.0 / m as f64; m];
    let mut kernel = uniform.clone();
    for _ in 1..k {
        let mut next = vec![0.0; kernel.len() + m - 1];
        for (i, &a) in kernel.iter().enumerate() {
            for (j, &b) in uniform.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        kernel = next;
    }
    kernel
}

/// Gain of the k-iterated centered uniform moving average at a frequency
/// offset `f` (cycles/sample) from the passband center:
/// |sin(pi m f) / (m sin(pi f))|^k, with limit 1 at f = 0.
pub fn transfer_gain(m: usize, k: usize, f: f64) -> f64 {
    let f = f.abs();
    let denom = (PI * f).sin();
    let single = if denom == 0.0 {
        1.0
    } else {
        ((PI * m as f64 * f).sin() / (m as f64 * denom)).abs()
    };
    single.powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn complete(values: &[f64]) -> Vec<Option<f64>> {
        values.iter().map(|&v| Some(v)).collect()
    }

    #[test]
    fn constant_series_stays_constant() {
        let x = vec![Some(3.5); 50];
        for (m, k) in [(5, 1), (9, 3), (1, 2)] {
            let y = kz_smooth(&x, &KzParams::new(m, k).unwrap()).unwrap();
            for v in y {
                assert!((v.unwrap() - 3.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn window_one_is_identity() {
        let x = complete(&[1.0, -2.0, 3.0, 7.5]);
        let y = kz_smooth(&x, &KzParams::new(1, 4).unwrap()).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn linear_ramp_unchanged_in_interior() {
        let n = 100;
        let x: Vec<Option<f64>> = (0..n).map(|t| Some(t as f64)).collect();
        let params = KzParams::new(7, 3).unwrap();
        let y = kz_smooth(&x, &params).unwrap();
        let guard = params.support_half_width();
        for t in guard..n - guard {
            assert!(
                (y[t].unwrap() - t as f64).abs() < 1e-9,
                "ramp moved at {t}: {}",
                y[t].unwrap()
            );
        }
    }

    #[test]
    fn even_window_rejected() {
        assert!(kz_smooth(&complete(&[1.0, 2.0]), &KzParams { window: 4, iterations: 1 }).is_err());
        assert!(KzftParams::new(4, 1, 0.1).is_err());
    }

    #[test]
    fn nyquist_violation_rejected() {
        assert!(KzftParams::new(3, 1, 0.51).is_err());
        assert!(KzftParams::new(3, 1, -0.01).is_err());
    }

    #[test]
    fn all_missing_window_yields_missing() {
        let mut x = complete(&[1.0; 20]);
        for v in x.iter_mut().take(9) {
            *v = None;
        }
        // Window 5 centered at index 1 covers 0..=3, all missing.
        let y = kz_smooth(&x, &KzParams::new(5, 1).unwrap()).unwrap();
        assert!(y[1].is_none());
        assert!(y[8].is_some()); // window 6..=10 reaches valid index 9
    }

    #[test]
    fn renormalization_matches_direct_average() {
        let x = vec![Some(2.0), None, Some(4.0), Some(6.0), None];
        let y = kz_smooth(&x, &KzParams::new(3, 1).unwrap()).unwrap();
        assert!((y[0].unwrap() - 2.0).abs() < 1e-12); // {2.0}
        assert!((y[1].unwrap() - 3.0).abs() < 1e-12); // {2.0, 4.0}
        assert!((y[2].unwrap() - 5.0).abs() < 1e-12); // {4.0, 6.0}
        assert!((y[4].unwrap() - 6.0).abs() < 1e-12); // {6.0}
    }

    #[test]
    fn smoothing_is_linear_on_complete_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 60;
        let params = KzParams::new(9, 2).unwrap();
        for _ in 0..10 {
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let (a, b) = (rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0);
            let combo: Vec<f64> = x.iter().zip(&y).map(|(&u, &v)| a * u + b * v).collect();
            let sx = kz_smooth(&complete(&x), &params).unwrap();
            let sy = kz_smooth(&complete(&y), &params).unwrap();
            let sc = kz_smooth(&complete(&combo), &params).unwrap();
            for i in 0..n {
                let expect = a * sx[i].unwrap() + b * sy[i].unwrap();
                assert!((sc[i].unwrap() - expect).abs() < 1e-10);
            }
        }
    }

    /// Brute-force oracle: on complete input the iterated moving average
    /// equals convolution with the k-fold self-convolution of the uniform
    /// width-m kernel, at indices far enough from both edges.
    fn iterated_kernel(m: usize, k: usize) -> Vec<f64> {
        let uniform = vec![1.0 / m as f64; m];
        let mut kernel = uniform.clone();
        for _ in 1..k {
            let mut next = vec![0.0; kernel.len() + m - 1];
            for (i, &a) in kernel.iter().enumerate() {
                for (j, &b) in uniform.iter().enumerate() {
                    next[i + j] += a * b;
                }
            }
            kernel = next;
        }
        kernel
    }

    #[test]
    fn interior_matches_convolution_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(m, k) in &[(3usize, 1usize), (5, 2), (7, 3), (11, 2)] {
            let n = 150;
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
            let smoothed = kz_smooth(&complete(&x), &KzParams::new(m, k).unwrap()).unwrap();
            let kernel = iterated_kernel(m, k);
            let half = kernel.len() / 2;
            for t in half..n - half {
                let direct: f64 = kernel
                    .iter()
                    .enumerate()
                    .map(|(j, &w)| w * x[t + j - half])
                    .sum();
                assert!(
                    (smoothed[t].unwrap() - direct).abs() < 1e-10,
                    "mismatch at t={t} for (m,k)=({m},{k})"
                );
            }
        }
    }

    #[test]
    fn bandpass_reproduces_onband_cosine() {
        let n = 2200;
        let nu = 1.0 / 365.0;
        let amplitude = 7.0;
        let phase = 0.7;
        let x: Vec<Option<f64>> = (0..n)
            .map(|t| Some(amplitude * (2.0 * PI * nu * t as f64 + phase).cos()))
            .collect();
        let params = KzftParams::new(731, 1, nu).unwrap();
        let y = kzft_bandpass(&x, &params).unwrap();
        let guard = params.kz().support_half_width();
        let mut worst: f64 = 0.0;
        for t in guard..n - guard {
            worst = worst.max((y[t].unwrap() - x[t].unwrap()).abs());
        }
        // Residual is the image of the cosine at 2*nu, attenuated by the
        // Dirichlet gain (~1.4e-3 here).
        assert!(
            worst / amplitude < 0.01,
            "relative error {}",
            worst / amplitude
        );
        let predicted = transfer_gain(731, 1, 2.0 * nu);
        assert!(worst / amplitude < 2.0 * predicted + 1e-9);
    }

    #[test]
    fn bandpass_suppresses_constant() {
        let n = 2200;
        let c = 5.0;
        let x = vec![Some(c); n];
        let params = KzftParams::new(731, 1, 1.0 / 365.0).unwrap();
        let y = kzft_bandpass(&x, &params).unwrap();
        let guard = params.kz().support_half_width();
        let bound = transfer_gain(731, 1, 1.0 / 365.0) * c * 2.0;
        for t in guard..n - guard {
            assert!(
                y[t].unwrap().abs() <= bound * (1.0 + 1e-9),
                "constant leak {} at {t}",
                y[t].unwrap()
            );
        }
    }

    #[test]
    fn bandpass_attenuates_offband_cosine() {
        let n = 3000;
        let tone = 1.0 / 7.0;
        let x: Vec<Option<f64>> = (0..n)
            .map(|t| Some((2.0 * PI * tone * t as f64).cos()))
            .collect();
        let params = KzftParams::new(731, 2, 1.0 / 365.0).unwrap();
        let y = kzft_bandpass(&x, &params).unwrap();
        let guard = params.kz().support_half_width();
        let worst = (guard..n - guard)
            .map(|t| y[t].unwrap().abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-3, "off-band leak {worst}");
    }

    #[test]
    fn reconstruction_is_real() {
        // The remodulated value w plus its conjugate has no imaginary
        // residue; the bandpass output equals its real part.
        let n = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<Option<f64>> = (0..n).map(|_| Some(rng.random::<f64>())).collect();
        let params = KzftParams::new(7, 2, 0.12).unwrap();
        let demod: Vec<Option<Complex64>> = x
            .iter()
            .enumerate()
            .map(|(t, v)| v.map(|v| Complex64::from_polar(1.0, -2.0 * PI * 0.12 * t as f64) * v))
            .collect();
        let z = kz_smooth_complex(&demod, &params.kz()).unwrap();
        let y = kzft_bandpass(&x, &params).unwrap();
        for t in 0..n {
            let w = z[t].unwrap() * Complex64::from_polar(1.0, 2.0 * PI * 0.12 * t as f64);
            let sum = w + w.conj();
            assert!(sum.im.abs() < 1e-12);
            assert!((y[t].unwrap() - sum.re).abs() < 1e-12);
        }
    }

    #[test]
    fn dc_band_uses_unit_factor() {
        let x = vec![Some(4.0); 40];
        let params = KzftParams::new(5, 1, 0.0).unwrap();
        let y = kzft_bandpass(&x, &params).unwrap();
        for v in y {
            assert!((v.unwrap() - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transfer_gain_values() {
        assert_eq!(transfer_gain(5, 1, 0.0), 1.0);
        assert!(transfer_gain(3, 1, 1.0 / 3.0) < 1e-15);
        let g = transfer_gain(731, 1, 2.0 / 365.0);
        assert!(g > 1.3e-3 && g < 1.5e-3, "gain {g}");
        // Iteration exponent.
        let g2 = transfer_gain(731, 2, 2.0 / 365.0);
        assert!((g2 - g * g).abs() < 1e-15);
        assert!(transfer_gain(7, 1, 0.05) <= 1.0);
    }

    #[test]
    fn bandpass_requires_length_above_window() {
        let x = vec![Some(1.0); 10];
        assert!(matches!(
            kzft_bandpass(&x, &KzftParams::new(11, 1, 0.1).unwrap()),
            Err(Error::SeriesTooShort { .. })
        ));
    }
}
