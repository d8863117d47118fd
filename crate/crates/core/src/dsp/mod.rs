//! Signal-processing building blocks: STFT with exact overlap-add
//! reconstruction, zero-phase IIR filtering and windowing helpers.

pub mod filter;
pub mod stft;

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

pub use stft::{istft, stft, Stft, StftParams};

/// Periodic Hann window of length `n`.
pub fn hann_periodic<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|i| {
            T::of(0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        })
        .collect()
}

/// Symmetric Hann window of length `n`.
pub fn hann_symmetric<T: Real>(n: usize) -> Vec<T> {
    if n < 2 {
        return vec![T::one(); n];
    }
    (0..n)
        .map(|i| {
            T::of(0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        })
        .collect()
}

pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

pub(crate) fn forward_plan<T: Real>(n: usize) -> Arc<dyn Fft<T>> {
    FftPlanner::new().plan_fft_forward(n)
}

pub(crate) fn inverse_plan<T: Real>(n: usize) -> Arc<dyn Fft<T>> {
    FftPlanner::new().plan_fft_inverse(n)
}

/// Unnormalized DFT of a real sequence, non-negative frequencies only.
pub fn real_spectrum<T: Real>(x: &[T]) -> Vec<Complex<T>> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
    forward_plan::<T>(n).process(&mut buf);
    buf.truncate(n / 2 + 1);
    buf
}

/// Per-bin noise magnitude of a magnitude spectrogram (`mags[frame][bin]`).
///
/// Each bin's `percentile` over time, then a running median across
/// `2 * smooth_bins + 1` neighbouring bins. The median keeps a stationary
/// tone from being mistaken for noise in its own bin.
pub fn noise_floor<T: Real>(mags: &[Vec<T>], percentile: f64, smooth_bins: usize) -> Vec<f64> {
    let Some(first) = mags.first() else {
        return Vec::new();
    };
    let bins = first.len();
    let mut col = Vec::with_capacity(mags.len());
    let per_bin: Vec<f64> = (0..bins)
        .map(|k| {
            col.clear();
            col.extend(mags.iter().map(|f| f[k].as_f64()));
            crate::stats::quantile_in_place(&mut col, percentile)
        })
        .collect();
    if smooth_bins == 0 {
        return per_bin;
    }
    let mut win = Vec::with_capacity(2 * smooth_bins + 1);
    (0..bins)
        .map(|k| {
            let lo = k.saturating_sub(smooth_bins);
            let hi = (k + smooth_bins + 1).min(bins);
            win.clear();
            win.extend_from_slice(&per_bin[lo..hi]);
            crate::stats::quantile_in_place(&mut win, 0.5)
        })
        .collect()
}

/// `c[lag + max_lag] = sum_t a[t] * b[t + lag]` for `lag` in
/// `-max_lag..=max_lag`, computed with one FFT pair.
pub fn cross_correlation(a: &[f64], b: &[f64], max_lag: usize) -> Vec<f64> {
    let n = next_pow2(a.len() + b.len());
    let pad = |x: &[f64]| {
        let mut v: Vec<Complex<f64>> = x.iter().map(|&s| Complex::new(s, 0.0)).collect();
        v.resize(n, Complex::new(0.0, 0.0));
        v
    };
    let (mut fa, mut fb) = (pad(a), pad(b));
    let fwd = forward_plan::<f64>(n);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    let mut prod: Vec<Complex<f64>> = fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect();
    inverse_plan::<f64>(n).process(&mut prod);
    let scale = 1.0 / n as f64;
    let m = max_lag as i64;
    (-m..=m)
        .map(|lag| {
            let idx = lag.rem_euclid(n as i64) as usize;
            prod[idx].re * scale
        })
        .collect()
}

#[cfg(test)]
mod xcorr_tests {
    use super::*;

    #[test]
    fn matches_direct_sum() {
        let a: Vec<f64> = (0..37).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let b: Vec<f64> = (0..37).map(|i| ((i * 5) % 13) as f64 - 6.0).collect();
        let c = cross_correlation(&a, &b, 6);
        for (k, lag) in (-6i64..=6).enumerate() {
            let direct: f64 = (0..37i64)
                .filter(|t| (0..37).contains(&(t + lag)))
                .map(|t| a[t as usize] * b[(t + lag) as usize])
                .sum();
            assert!((c[k] - direct).abs() < 1e-9, "lag {lag}");
        }
    }
}
