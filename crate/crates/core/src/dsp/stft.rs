use num_complex::Complex;

use super::{forward_plan, hann_periodic, inverse_plan};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Window length (power of two) and hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StftParams {
    pub window: usize,
    pub hop: usize,
}

impl StftParams {
    /// Window of `window` samples with 75% overlap.
    pub fn new(window: usize) -> Result<Self> {
        Self::with_hop(window, window / 4)
    }

    pub fn with_hop(window: usize, hop: usize) -> Result<Self> {
        if window < 4 || !window.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "STFT window {window} must be a power of two >= 4"
            )));
        }
        if hop == 0 || hop > window / 2 {
            return Err(Error::InvalidArgument(format!(
                "STFT hop {hop} must lie in 1..={}",
                window / 2
            )));
        }
        Ok(StftParams { window, hop })
    }

    /// Roughly 50 ms analysis windows: 256 samples at 2.2 kHz, 1024 at 20 kHz.
    pub fn for_sample_rate(sample_rate: f64) -> Self {
        let target = (0.05 * sample_rate).round().max(1.0) as usize;
        let window = target.next_power_of_two().max(256);
        StftParams {
            window,
            hop: window / 4,
        }
    }

    pub fn bins(&self) -> usize {
        self.window / 2 + 1
    }

    pub fn bin_hz(&self, sample_rate: f64) -> f64 {
        sample_rate / self.window as f64
    }

    fn pad(&self) -> usize {
        self.window - self.hop
    }
}

/// Short-time spectrum of a real signal using a periodic Hann window.
///
/// The signal is zero-padded by `window - hop` samples on both ends so every
/// original sample sits under the same number of frames.
#[derive(Debug, Clone)]
pub struct Stft<T> {
    params: StftParams,
    signal_len: usize,
    /// `frames[t][k]` for time frame `t` and frequency bin `k`.
    pub frames: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Stft<T> {
    pub fn params(&self) -> StftParams {
        self.params
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn bins(&self) -> usize {
        self.params.bins()
    }

    /// Same layout, new coefficients.
    pub fn with_frames(&self, frames: Vec<Vec<Complex<T>>>) -> Result<Self> {
        if frames.len() != self.frames.len() || frames.iter().any(|f| f.len() != self.bins()) {
            return Err(Error::InvalidArgument("STFT coefficient grid shape changed".into()));
        }
        Ok(Stft {
            params: self.params,
            signal_len: self.signal_len,
            frames,
        })
    }

    pub fn magnitudes(&self) -> Vec<Vec<T>> {
        self.frames
            .iter()
            .map(|f| f.iter().map(|c| c.norm()).collect())
            .collect()
    }
}

pub fn stft<T: Real>(x: &[T], params: StftParams) -> Stft<T> {
    let StftParams { window, hop } = params;
    let pad = params.pad();
    let padded_len = x.len() + 2 * pad;
    let frame_count = if padded_len <= window {
        1
    } else {
        (padded_len - window).div_ceil(hop) + 1
    };
    let mut padded = vec![T::zero(); (frame_count - 1) * hop + window];
    padded[pad..pad + x.len()].copy_from_slice(x);

    let win: Vec<T> = hann_periodic(window);
    let fft = forward_plan::<T>(window);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    let frames = (0..frame_count)
        .map(|t| {
            let seg = &padded[t * hop..t * hop + window];
            let mut buf: Vec<Complex<T>> = seg
                .iter()
                .zip(&win)
                .map(|(&s, &w)| Complex::new(s * w, T::zero()))
                .collect();
            fft.process_with_scratch(&mut buf, &mut scratch);
            buf.truncate(params.bins());
            buf
        })
        .collect();
    Stft {
        params,
        signal_len: x.len(),
        frames,
    }
}

/// Weighted overlap-add inverse of [`stft`].
pub fn istft<T: Real>(spec: &Stft<T>) -> Vec<T> {
    let StftParams { window, hop } = spec.params;
    let pad = spec.params.pad();
    let total = (spec.frames.len() - 1) * hop + window;
    let mut out = vec![T::zero(); total];
    let mut norm = vec![T::zero(); total];
    let win: Vec<T> = hann_periodic(window);
    let ifft = inverse_plan::<T>(window);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); ifft.get_inplace_scratch_len()];
    let scale = T::one() / T::from_usize_lossy(window);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); window];

    for (t, frame) in spec.frames.iter().enumerate() {
        buf[..frame.len()].copy_from_slice(frame);
        // Hermitian completion; DC and Nyquist imaginary parts are dropped.
        buf[0].im = T::zero();
        buf[window / 2].im = T::zero();
        for k in 1..window / 2 {
            buf[window - k] = frame[k].conj();
        }
        ifft.process_with_scratch(&mut buf, &mut scratch);
        let start = t * hop;
        for n in 0..window {
            out[start + n] = out[start + n] + buf[n].re * scale * win[n];
            norm[start + n] = norm[start + n] + win[n] * win[n];
        }
    }
    out[pad..pad + spec.signal_len]
        .iter()
        .zip(&norm[pad..pad + spec.signal_len])
        .map(|(&v, &w)| if w > T::zero() { v / w } else { T::zero() })
        .collect()
}
