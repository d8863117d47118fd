//! Quality of a recovered waveform against a reference: segmental SNR and
//! the LPC log-likelihood ratio, after cross-correlation alignment.

use serde::{Deserialize, Serialize};

use crate::audio::AudioSignal;
use crate::dsp::{cross_correlation, hann_symmetric};
use crate::error::{Error, Result};
use crate::Real;

pub const SEG_SNR_FLOOR: f64 = -10.0;
pub const SEG_SNR_CEILING: f64 = 35.0;
const FRAME_SECONDS: f64 = 0.03;
const LPC_ORDER: usize = 10;

/// Reference and test trimmed to their common support after shifting.
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    pub reference: Vec<f64>,
    pub test: Vec<f64>,
    /// Samples by which the test lags the reference.
    pub lag: i64,
    pub sample_rate: f64,
}

fn to_f64<T: Real>(s: &AudioSignal<T>) -> Vec<f64> {
    s.samples().iter().map(|v| v.as_f64()).collect()
}

/// Shifts `test` by the lag in `-max_lag..=max_lag` that maximizes the
/// cross-correlation (ties to the smaller |lag|) and trims both signals to
/// the overlap, which must cover at least half the reference.
pub fn align<T: Real>(reference: &AudioSignal<T>, test: &AudioSignal<T>, max_lag: usize) -> Result<Aligned> {
    if reference.sample_rate() != test.sample_rate() {
        return Err(Error::InvalidArgument("reference and test sample rates differ".into()));
    }
    let r = to_f64(reference);
    let t = to_f64(test);
    if r.is_empty() || t.is_empty() {
        return Err(Error::Empty("signal to align".into()));
    }
    let max_lag = max_lag.min(r.len().max(t.len()) - 1);
    let c = cross_correlation(&r, &t, max_lag);
    let m = max_lag as i64;
    let mut best = max_lag;
    for i in 0..c.len() {
        let (lag, cur) = (i as i64 - m, best as i64 - m);
        if c[i] > c[best] || (c[i] == c[best] && lag.abs() < cur.abs()) {
            best = i;
        }
    }
    let lag = best as i64 - m;
    // reference index i pairs with test index i + lag
    let start = (-lag).max(0) as usize;
    let end = (r.len() as i64).min(t.len() as i64 - lag).max(0) as usize;
    let overlap = end.saturating_sub(start);
    let required = r.len().div_ceil(2);
    if overlap < required {
        return Err(Error::InsufficientOverlap { overlap, required });
    }
    let ts = (start as i64 + lag) as usize;
    Ok(Aligned {
        reference: r[start..end].to_vec(),
        test: t[ts..ts + overlap].to_vec(),
        lag,
        sample_rate: reference.sample_rate(),
    })
}

impl Aligned {
    /// Scales the test to the reference RMS.
    pub fn gain_matched(mut self) -> Self {
        let rms = |x: &[f64]| (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt();
        let (rr, rt) = (rms(&self.reference), rms(&self.test));
        if rt > 0.0 {
            let g = rr / rt;
            self.test.iter_mut().for_each(|v| *v *= g);
        }
        self
    }
}

fn frames(len: usize, sample_rate: f64) -> Result<(usize, usize)> {
    let frame = (FRAME_SECONDS * sample_rate).round().max(2.0) as usize;
    if len < frame {
        return Err(Error::InvalidArgument(format!("signal of {len} samples is shorter than one {frame}-sample frame")));
    }
    Ok((frame, frame / 2))
}

/// Mean over 30 ms frames (50% overlap) of the per-frame SNR in dB, each
/// clamped to [-10, 35]. Frames whose reference energy is below 1e-8 of the
/// loudest frame are skipped. Returns `(snr, frames_used)`.
pub fn segmental_snr(reference: &[f64], test: &[f64], sample_rate: f64) -> Result<(f64, usize)> {
    if reference.len() != test.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            actual: test.len(),
        });
    }
    let (frame, hop) = frames(reference.len(), sample_rate)?;
    let starts: Vec<usize> = (0..=reference.len() - frame).step_by(hop).collect();
    let energies: Vec<f64> = starts.iter().map(|s| reference[*s..s + frame].iter().map(|v| v * v).sum()).collect();
    let peak = energies.iter().cloned().fold(0.0, f64::max);
    let mut total = 0.0;
    let mut used = 0;
    for (s, e) in starts.iter().zip(&energies) {
        if peak == 0.0 || *e < 1e-8 * peak {
            continue;
        }
        let err: f64 = reference[*s..s + frame]
            .iter()
            .zip(&test[*s..s + frame])
            .map(|(r, t)| (r - t) * (r - t))
            .sum();
        let snr = if err == 0.0 { SEG_SNR_CEILING } else { 10.0 * (e / err).log10() };
        total += snr.clamp(SEG_SNR_FLOOR, SEG_SNR_CEILING);
        used += 1;
    }
    if used == 0 {
        return Err(Error::NoUsableFrames("every reference frame is silent".into()));
    }
    Ok((total / used as f64, used))
}

fn autocorrelation(x: &[f64], order: usize) -> Vec<f64> {
    (0..=order).map(|k| x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum()).collect()
}

/// Levinson-Durbin: prediction polynomial `[1, a1, .., ap]`, or `None` when
/// the autocorrelation is not positive definite.
fn levinson(r: &[f64]) -> Option<Vec<f64>> {
    let p = r.len() - 1;
    if !(r[0] > 0.0) {
        return None;
    }
    let mut a = vec![0.0; p + 1];
    a[0] = 1.0;
    let mut err = r[0];
    for i in 1..=p {
        let acc: f64 = (0..i).map(|j| a[j] * r[i - j]).sum();
        let k = -acc / err;
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if !(err > 1e-12 * r[0]) {
            return None;
        }
    }
    Some(a)
}

fn quadratic_form(a: &[f64], r: &[f64]) -> f64 {
    let p = a.len();
    let mut s = 0.0;
    for i in 0..p {
        for j in 0..p {
            s += a[i] * r[i.abs_diff(j)] * a[j];
        }
    }
    s
}

/// Mean over the lowest 95% of per-frame log-likelihood ratios between the
/// order-10 LPC models of test and reference. Returns `(llr, frames_used)`.
pub fn mean_llr(reference: &[f64], test: &[f64], sample_rate: f64) -> Result<(f64, usize)> {
    if reference.len() != test.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            actual: test.len(),
        });
    }
    if sample_rate < 2000.0 {
        return Err(Error::InvalidArgument(format!("LLR needs a sample rate of at least 2 kHz, got {sample_rate}")));
    }
    let (frame, hop) = frames(reference.len(), sample_rate)?;
    let win: Vec<f64> = hann_symmetric(frame);
    let mut values = Vec::new();
    for s in (0..=reference.len() - frame).step_by(hop) {
        let wr: Vec<f64> = reference[s..s + frame].iter().zip(&win).map(|(v, w)| v * w).collect();
        let wt: Vec<f64> = test[s..s + frame].iter().zip(&win).map(|(v, w)| v * w).collect();
        let rr = autocorrelation(&wr, LPC_ORDER);
        let rt = autocorrelation(&wt, LPC_ORDER);
        let (Some(ar), Some(at)) = (levinson(&rr), levinson(&rt)) else {
            continue;
        };
        let num = quadratic_form(&at, &rr);
        let den = quadratic_form(&ar, &rr);
        if num > 0.0 && den > 0.0 {
            values.push((num / den).ln().max(0.0));
        }
    }
    if values.is_empty() {
        return Err(Error::NoUsableFrames("no frame has a stable LPC model".into()));
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let keep = ((values.len() as f64 * 0.95).ceil() as usize).max(1);
    Ok((values[..keep].iter().sum::<f64>() / keep as f64, keep))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    pub max_lag: usize,
    /// Scale the aligned test to the reference RMS before scoring.
    pub match_gain: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            max_lag: 2000,
            match_gain: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub seg_snr: f64,
    pub mean_llr: f64,
    pub alignment_lag: i64,
    pub frames_used: usize,
    /// Left for externally computed PESQ values.
    pub pesq: Option<f64>,
}

/// Aligns `test` to `reference` and computes both metrics.
pub fn evaluate<T: Real>(reference: &AudioSignal<T>, test: &AudioSignal<T>, config: &MetricsConfig) -> Result<MetricReport> {
    let mut aligned = align(reference, test, config.max_lag)?;
    if config.match_gain {
        aligned = aligned.gain_matched();
    }
    let (seg_snr, frames_used) = segmental_snr(&aligned.reference, &aligned.test, aligned.sample_rate)?;
    let (mean_llr, _) = mean_llr(&aligned.reference, &aligned.test, aligned.sample_rate)?;
    Ok(MetricReport {
        seg_snr,
        mean_llr,
        alignment_lag: aligned.lag,
        frames_used,
        pesq: None,
    })
}
