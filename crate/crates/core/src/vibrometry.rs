//! Vibration modes of a clamped rod and the Young's modulus they imply.
//!
//! The first bending mode of a clamped-free Euler-Bernoulli beam satisfies
//!
//! ```text
//! E = (2 pi f1 / lambda1^2)^2 * rho * A * L^4 / I,   lambda1 = 1.87510407
//! ```

use serde::{Deserialize, Serialize};

use crate::audio::{remove_mean, AudioSignal};
use crate::dsp::filter::ZeroPhaseFilter;
use crate::dsp::{hann_periodic, real_spectrum};
use crate::error::{Error, Result};
use crate::stats::median;
use crate::Real;

/// First root of `1 + cos(x) cosh(x) = 0`.
pub const LAMBDA_1: f64 = 1.875_104_07;

/// Solid circular rod clamped at one end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RodSpec {
    /// Free length in meters.
    pub length: f64,
    /// Density in kg/m^3.
    pub density: f64,
    /// Diameter in meters.
    pub diameter: f64,
}

impl RodSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("length", self.length), ("density", self.density), ("diameter", self.diameter)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("rod {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.diameter * self.diameter / 4.0
    }

    pub fn second_moment(&self) -> f64 {
        std::f64::consts::PI * self.diameter.powi(4) / 64.0
    }
}

/// Young's modulus in Pa from the first-mode frequency.
pub fn youngs_modulus(fundamental_hz: f64, rod: &RodSpec) -> Result<f64> {
    rod.validate()?;
    if !(fundamental_hz.is_finite() && fundamental_hz > 0.0) {
        return Err(Error::InvalidArgument(format!("fundamental {fundamental_hz} Hz must be positive")));
    }
    let k = std::f64::consts::TAU * fundamental_hz / (LAMBDA_1 * LAMBDA_1);
    Ok(k * k * rod.density * rod.area() * rod.length.powi(4) / rod.second_moment())
}

/// Inverse of [`youngs_modulus`].
pub fn fundamental_frequency(youngs_modulus_pa: f64, rod: &RodSpec) -> Result<f64> {
    rod.validate()?;
    if !(youngs_modulus_pa.is_finite() && youngs_modulus_pa > 0.0) {
        return Err(Error::InvalidArgument("Young's modulus must be positive".into()));
    }
    let k = (youngs_modulus_pa * rod.second_moment() / (rod.density * rod.area() * rod.length.powi(4))).sqrt();
    Ok(k * LAMBDA_1 * LAMBDA_1 / std::f64::consts::TAU)
}

/// Welch estimate with a periodic Hann window and 50% overlap. Returns
/// `(frequencies, one-sided power)`.
pub fn welch_psd<T: Real>(x: &[T], sample_rate: f64, segment: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if segment < 4 || x.len() < segment {
        return Err(Error::InvalidArgument(format!(
            "Welch segment {segment} does not fit a signal of {} samples",
            x.len()
        )));
    }
    let hop = segment / 2;
    let win: Vec<f64> = hann_periodic(segment);
    let wpow: f64 = win.iter().map(|w| w * w).sum();
    let bins = segment / 2 + 1;
    let mut psd = vec![0.0; bins];
    let mut count = 0;
    let mut start = 0;
    let v: Vec<f64> = remove_mean(x).iter().map(|s| s.as_f64()).collect();
    while start + segment <= v.len() {
        let frame: Vec<f64> = v[start..start + segment].iter().zip(&win).map(|(a, w)| a * w).collect();
        let spec = real_spectrum(&frame);
        for (p, c) in psd.iter_mut().zip(&spec) {
            *p += c.norm_sqr();
        }
        count += 1;
        start += hop;
    }
    let scale = 1.0 / (count as f64 * wpow * sample_rate);
    for (k, p) in psd.iter_mut().enumerate() {
        *p *= scale;
        if k != 0 && !(segment % 2 == 0 && k == bins - 1) {
            *p *= 2.0;
        }
    }
    let freqs = (0..bins).map(|k| k as f64 * sample_rate / segment as f64).collect();
    Ok((freqs, psd))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    /// Minimum height above the local median PSD.
    pub prominence_db: f64,
    /// Half-width of the median neighbourhood relative to the frequency.
    pub neighborhood: f64,
    /// Lower bound, in bins, on the neighbourhood half-width.
    pub min_neighborhood_bins: usize,
    /// Peaks at or below this frequency are ignored.
    pub min_hz: f64,
    /// Welch segment; defaults to `2^ceil(log2 fs)` (about one second).
    #[serde(default)]
    pub segment: Option<usize>,
}

impl Default for ModeParams {
    fn default() -> Self {
        ModeParams {
            prominence_db: 12.0,
            neighborhood: 0.1,
            min_neighborhood_bins: 8,
            min_hz: 1.0,
            segment: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Refined by a parabola through the log power of the peak bin and its
    /// neighbours.
    pub frequency_hz: f64,
    pub power: f64,
    pub power_db: f64,
    pub prominence_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub frequencies: Vec<f64>,
    pub psd: Vec<f64>,
    /// Ascending frequency.
    pub peaks: Vec<Peak>,
    pub fundamental: f64,
}

impl ModeSpectrum {
    /// `{fundamental_hz, peaks: [{hz, power_db, prominence_db}], youngs_modulus_pa?}`.
    pub fn report(&self, youngs_modulus_pa: Option<f64>) -> serde_json::Value {
        let peaks: Vec<_> = self
            .peaks
            .iter()
            .map(|p| serde_json::json!({"hz": p.frequency_hz, "power_db": p.power_db, "prominence_db": p.prominence_db}))
            .collect();
        let mut v = serde_json::json!({"fundamental_hz": self.fundamental, "peaks": peaks});
        if let Some(e) = youngs_modulus_pa {
            v["youngs_modulus_pa"] = serde_json::json!(e);
        }
        v
    }
}

pub fn default_segment(sample_rate: f64) -> usize {
    (sample_rate.max(4.0).ceil() as usize).next_power_of_two()
}

/// Welch PSD and its prominent peaks; the fundamental is the lowest one.
pub fn mode_spectrum<T: Real>(signal: &AudioSignal<T>, params: &ModeParams) -> Result<ModeSpectrum> {
    let fs = signal.sample_rate();
    let segment = params.segment.unwrap_or_else(|| default_segment(fs));
    let needed = segment * 5 / 2;
    if signal.len() < needed {
        return Err(Error::InvalidArgument(format!(
            "mode analysis needs {needed} samples (four Welch segments), got {}",
            signal.len()
        )));
    }
    let (freqs, psd) = welch_psd(signal.samples(), fs, segment)?;
    let bin_hz = fs / segment as f64;
    let nyquist = fs / 2.0;
    let db = |p: f64| 10.0 * p.max(1e-300).log10();
    let mut peaks = Vec::new();
    for k in 1..psd.len() - 1 {
        let f = freqs[k];
        if f <= params.min_hz || f >= nyquist || !(psd[k] > psd[k - 1] && psd[k] >= psd[k + 1]) {
            continue;
        }
        let half = ((params.neighborhood * f / bin_hz).round() as usize).max(params.min_neighborhood_bins);
        let lo = k.saturating_sub(half);
        let hi = (k + half + 1).min(psd.len());
        let local = median(&psd[lo..hi]);
        let prominence = db(psd[k]) - db(local);
        if prominence < params.prominence_db {
            continue;
        }
        let (l, c, r) = (psd[k - 1].max(1e-300).ln(), psd[k].max(1e-300).ln(), psd[k + 1].max(1e-300).ln());
        let denom = l - 2.0 * c + r;
        let delta = if denom < 0.0 { (0.5 * (l - r) / denom).clamp(-0.5, 0.5) } else { 0.0 };
        peaks.push(Peak {
            frequency_hz: (k as f64 + delta) * bin_hz,
            power: psd[k],
            power_db: db(psd[k]),
            prominence_db: prominence,
        });
    }
    let fundamental = peaks.first().map(|p| p.frequency_hz).ok_or(Error::NoModeFound)?;
    Ok(ModeSpectrum {
        frequencies: freqs,
        psd,
        peaks,
        fundamental,
    })
}

/// Splits `signal` into its first mode (zero-phase resonator, +-5% of the
/// fundamental) and the residual. `mode1 + residual == signal`.
pub fn first_mode_decompose<T: Real>(signal: &AudioSignal<T>, fundamental_hz: f64) -> Result<(AudioSignal<T>, AudioSignal<T>)> {
    let fs = signal.sample_rate();
    if !(fundamental_hz.is_finite() && fundamental_hz > 0.0 && fundamental_hz < fs / 2.0) {
        return Err(Error::InvalidArgument(format!("fundamental {fundamental_hz} Hz outside (0, {})", fs / 2.0)));
    }
    let mode = ZeroPhaseFilter::resonator(fundamental_hz, 0.05, fs).apply(signal.samples());
    let residual: Vec<T> = signal.samples().iter().zip(&mode).map(|(x, m)| *x - *m).collect();
    Ok((AudioSignal::new(fs, mode)?, AudioSignal::new(fs, residual)?))
}
