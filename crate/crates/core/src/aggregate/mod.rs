//! Combining per-block motion into one waveform.
//!
//! Averaging block signals in time cancels components whose phase differs
//! between blocks. [`aggregate`] instead works per STFT cell: it sums the
//! weighted magnitudes of all blocks and takes the phase of the best block.

mod spectrogram;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::audio::AudioSignal;
use crate::dsp::{istft, noise_floor, stft, StftParams};
use crate::error::{Error, Result};
use crate::motion::DisplacementSignal;
use crate::Real;

pub use spectrogram::Spectrogram;

/// Projects (dx, dy) onto the dominant motion axis, the first principal
/// component of the mean-removed sample cloud. The axis sign makes the first
/// nonzero projected sample positive.
pub fn project_axis<T: Real>(signal: &DisplacementSignal<T>, sample_rate: f64) -> Result<AudioSignal<T>> {
    if signal.is_empty() {
        return Err(Error::Empty("displacement signal".into()));
    }
    let dx: Vec<f64> = signal.samples.iter().map(|s| s.dx.as_f64()).collect();
    let dy: Vec<f64> = signal.samples.iter().map(|s| s.dy.as_f64()).collect();
    let n = dx.len() as f64;
    let (mx, my) = (dx.iter().sum::<f64>() / n, dy.iter().sum::<f64>() / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in dx.iter().zip(&dy) {
        let (x, y) = (x - mx, y - my);
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    // leading eigenvector of [[sxx, sxy], [sxy, syy]]
    let axis = if sxy == 0.0 {
        if syy > sxx {
            (0.0, 1.0)
        } else {
            (1.0, 0.0)
        }
    } else {
        let tr = 0.5 * (sxx + syy);
        let det = sxx * syy - sxy * sxy;
        let lambda = tr + (tr * tr - det).max(0.0).sqrt();
        let (ux, uy) = (sxy, lambda - sxx);
        let norm = ux.hypot(uy);
        (ux / norm, uy / norm)
    };
    let mut out: Vec<f64> = dx.iter().zip(&dy).map(|(x, y)| x * axis.0 + y * axis.1).collect();
    if out.iter().find(|v| **v != 0.0).is_some_and(|v| *v < 0.0) {
        out.iter_mut().for_each(|v| *v = -*v);
    }
    AudioSignal::new(sample_rate, out.into_iter().map(T::of).collect())
}

/// Normalized non-negative weights proportional to `max(score, 0)`; equal
/// weights when no score is positive.
pub fn score_weights(scores: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = scores.iter().map(|s| if s.is_finite() { s.max(0.0) } else { 0.0 }).collect();
    let total: f64 = clipped.iter().sum();
    if total > 0.0 {
        clipped.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / scores.len().max(1) as f64; scores.len()]
    }
}

/// Below this fraction of the strongest weighted coefficient in a cell the
/// reference phase is treated as undefined.
const REFERENCE_PHASE_FLOOR: f64 = 1e-3;

/// How block spectra are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Combination {
    /// Weighted magnitude sum with the reference block's phase. Cells where
    /// the reference is negligible take the phase of the strongest block.
    #[default]
    ReferencePhase,
    /// Rotates each block's bin by one global phase that best aligns it with
    /// the reference, then sums the complex coefficients.
    BinPhaseAlign,
}

fn check_inputs<T: Real>(signals: &[AudioSignal<T>], scores: &[f64]) -> Result<(usize, f64)> {
    let first = signals.first().ok_or_else(|| Error::Empty("no signals to combine".into()))?;
    if scores.len() != signals.len() {
        return Err(Error::LengthMismatch {
            expected: signals.len(),
            actual: scores.len(),
        });
    }
    for s in signals {
        if s.len() != first.len() {
            return Err(Error::LengthMismatch {
                expected: first.len(),
                actual: s.len(),
            });
        }
        if s.sample_rate() != first.sample_rate() {
            return Err(Error::InvalidArgument("signals have different sample rates".into()));
        }
    }
    Ok((first.len(), first.sample_rate()))
}

fn reference_index(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.total_cmp(&scores[best]).is_gt() {
            best = i;
        }
    }
    best
}

/// Merges equal-length block signals; `scores` rank them and set weights.
pub fn aggregate<T: Real>(signals: &[AudioSignal<T>], scores: &[f64], params: StftParams) -> Result<AudioSignal<T>> {
    aggregate_with(signals, scores, params, Combination::ReferencePhase)
}

pub fn aggregate_with<T: Real>(
    signals: &[AudioSignal<T>],
    scores: &[f64],
    params: StftParams,
    combination: Combination,
) -> Result<AudioSignal<T>> {
    let (len, fs) = check_inputs(signals, scores)?;
    if len < params.window {
        return Err(Error::InvalidArgument(format!(
            "signal of {len} samples is shorter than the {}-sample window",
            params.window
        )));
    }
    let weights = score_weights(scores);
    let r = reference_index(scores);
    let spectra: Vec<_> = signals.iter().map(|s| stft(s.samples(), params)).collect();
    let reference = &spectra[r];
    let (frames, bins) = (reference.frame_count(), reference.bins());
    let mut out = vec![vec![Complex::new(T::zero(), T::zero()); bins]; frames];

    match combination {
        Combination::ReferencePhase => {
            // strongest weighted block per cell, the phase source wherever
            // the reference itself carries (almost) nothing
            let mut strongest = vec![vec![(T::zero(), 0usize); bins]; frames];
            for (b, (spec, w)) in spectra.iter().zip(&weights).enumerate() {
                let w = T::of(*w);
                for ((acc, best), frame) in out.iter_mut().zip(strongest.iter_mut()).zip(&spec.frames) {
                    for ((a, s), c) in acc.iter_mut().zip(best.iter_mut()).zip(frame) {
                        let m = w * c.norm();
                        a.re = a.re + m;
                        if m > s.0 {
                            *s = (m, b);
                        }
                    }
                }
            }
            let negligible = T::of(REFERENCE_PHASE_FLOOR);
            for (t, (acc, best)) in out.iter_mut().zip(&strongest).enumerate() {
                for (k, (a, s)) in acc.iter_mut().zip(best).enumerate() {
                    let mag = a.re;
                    let rc = reference.frames[t][k];
                    let c = if rc.norm() * T::of(weights[r]) < negligible * s.0 {
                        spectra[s.1].frames[t][k]
                    } else {
                        rc
                    };
                    let norm = c.norm();
                    *a = if norm > T::zero() {
                        Complex::new(c.re * mag / norm, c.im * mag / norm)
                    } else {
                        Complex::new(mag, T::zero())
                    };
                }
            }
        }
        Combination::BinPhaseAlign => {
            for (spec, w) in spectra.iter().zip(&weights) {
                let w = T::of(*w);
                for k in 0..bins {
                    let mut cross = Complex::new(T::zero(), T::zero());
                    for (rf, f) in reference.frames.iter().zip(&spec.frames) {
                        cross = cross + rf[k] * f[k].conj();
                    }
                    let norm = cross.norm();
                    let rot = if norm > T::zero() {
                        cross.unscale(norm)
                    } else {
                        Complex::new(T::one(), T::zero())
                    };
                    for (acc, f) in out.iter_mut().zip(&spec.frames) {
                        acc[k] = acc[k] + f[k] * rot.scale(w);
                    }
                }
            }
        }
    }
    let merged = reference.with_frames(out)?;
    AudioSignal::new(fs, istft(&merged))
}

/// Weighted time-domain mean, the baseline that suffers from cancellation.
pub fn naive_average<T: Real>(signals: &[AudioSignal<T>], scores: &[f64]) -> Result<AudioSignal<T>> {
    let (len, fs) = check_inputs(signals, scores)?;
    let weights = score_weights(scores);
    let mut out = vec![T::zero(); len];
    for (s, w) in signals.iter().zip(&weights) {
        let w = T::of(*w);
        for (o, v) in out.iter_mut().zip(s.samples()) {
            *o = *o + w * *v;
        }
    }
    AudioSignal::new(fs, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseParams {
    pub alpha: f64,
    pub beta: f64,
    /// Per-bin noise magnitude quantile over time.
    pub noise_percentile: f64,
    /// Half-width, in bins, of the median that smooths the noise floor.
    pub smooth_bins: usize,
    #[serde(default)]
    pub stft: Option<StftParams>,
}

impl Default for DenoiseParams {
    fn default() -> Self {
        DenoiseParams {
            alpha: 2.0,
            beta: 0.05,
            noise_percentile: 0.1,
            smooth_bins: 4,
            stft: None,
        }
    }
}

/// Spectral subtraction: `|S'| = max(|S| - alpha * noise, beta * |S|)`,
/// phase kept.
pub fn denoise<T: Real>(signal: &AudioSignal<T>, params: &DenoiseParams) -> Result<AudioSignal<T>> {
    let p = params.stft.unwrap_or_else(|| StftParams::for_sample_rate(signal.sample_rate()));
    if signal.len() < 8 * p.window {
        return Err(Error::InvalidArgument(format!(
            "denoising needs at least {} samples, got {}",
            8 * p.window,
            signal.len()
        )));
    }
    let spec = stft(signal.samples(), p);
    let noise = noise_floor(&spec.magnitudes(), params.noise_percentile, params.smooth_bins);
    let (alpha, beta) = (T::of(params.alpha), T::of(params.beta));
    let frames = spec
        .frames
        .iter()
        .map(|f| {
            f.iter()
                .zip(&noise)
                .map(|(c, n)| {
                    let mag = c.norm();
                    if mag == T::zero() {
                        return *c;
                    }
                    let target = (mag - alpha * T::of(*n)).max(beta * mag);
                    c.scale(target / mag)
                })
                .collect()
        })
        .collect();
    AudioSignal::new(signal.sample_rate(), istft(&spec.with_frames(frames)?))
}
