//! Biquad sections (RBJ cookbook forms) and zero-phase forward-backward
//! filtering with odd-reflection edge padding.

use std::f64::consts::PI;

use crate::scalar::Real;

/// Second-order section, normalized so that `a0 == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn normalized(b: [f64; 3], a: [f64; 3]) -> Self {
        Biquad {
            b: [b[0] / a[0], b[1] / a[0], b[2] / a[0]],
            a: [a[1] / a[0], a[2] / a[0]],
        }
    }

    pub fn lowpass(cutoff_hz: f64, q: f64, sample_rate: f64) -> Self {
        let w0 = 2.0 * PI * cutoff_hz / sample_rate;
        let (cos, alpha) = (w0.cos(), w0.sin() / (2.0 * q));
        let b1 = 1.0 - cos;
        Self::normalized([b1 / 2.0, b1, b1 / 2.0], [1.0 + alpha, -2.0 * cos, 1.0 - alpha])
    }

    pub fn highpass(cutoff_hz: f64, q: f64, sample_rate: f64) -> Self {
        let w0 = 2.0 * PI * cutoff_hz / sample_rate;
        let (cos, alpha) = (w0.cos(), w0.sin() / (2.0 * q));
        let b1 = 1.0 + cos;
        Self::normalized([b1 / 2.0, -b1, b1 / 2.0], [1.0 + alpha, -2.0 * cos, 1.0 - alpha])
    }

    /// Band-pass with unit gain at `center_hz`.
    pub fn bandpass(center_hz: f64, q: f64, sample_rate: f64) -> Self {
        let w0 = 2.0 * PI * center_hz / sample_rate;
        let (cos, alpha) = (w0.cos(), w0.sin() / (2.0 * q));
        Self::normalized([alpha, 0.0, -alpha], [1.0 + alpha, -2.0 * cos, 1.0 - alpha])
    }

    pub fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// Magnitude response at `freq_hz`.
    pub fn gain_at(&self, freq_hz: f64, sample_rate: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / sample_rate;
        let z1 = num_complex::Complex::from_polar(1.0, -w);
        let z2 = z1 * z1;
        let num = self.b[0] + z1 * self.b[1] + z2 * self.b[2];
        let den = 1.0 + z1 * self.a[0] + z2 * self.a[1];
        (num / den).norm()
    }

    /// Direct form II transposed, state initialized to the steady state of a
    /// constant input equal to `x[0]`.
    fn run(&self, x: &mut [f64]) {
        let Some(&x0) = x.first() else { return };
        let g = self.dc_gain();
        let mut s2 = (self.b[2] - self.a[1] * g) * x0;
        let mut s1 = (self.b[1] - self.a[0] * g) * x0 + s2;
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b[0] * input + s1;
            s1 = self.b[1] * input - self.a[0] * y + s2;
            s2 = self.b[2] * input - self.a[1] * y;
            *v = y;
        }
    }
}

/// Butterworth Q values for a cascade of second-order sections.
fn butterworth_qs(order: usize) -> Vec<f64> {
    let sections = order / 2;
    (0..sections)
        .map(|k| {
            let theta = PI * (2 * k + 1) as f64 / (2 * order) as f64;
            1.0 / (2.0 * theta.sin())
        })
        .collect()
}

/// Cascade of biquads applied forward then backward.
#[derive(Debug, Clone, Default)]
pub struct ZeroPhaseFilter {
    sections: Vec<Biquad>,
    /// Samples of odd-reflection padding on each end.
    pub pad: usize,
}

impl ZeroPhaseFilter {
    pub fn new(sections: Vec<Biquad>, pad: usize) -> Self {
        ZeroPhaseFilter { sections, pad }
    }

    /// Butterworth band-pass (even `order` per edge) between `low_hz` and
    /// `high_hz`. Either edge is skipped when it falls outside (0, Nyquist).
    pub fn band(low_hz: f64, high_hz: f64, order: usize, sample_rate: f64) -> Self {
        let nyquist = sample_rate / 2.0;
        let mut sections = Vec::new();
        for q in butterworth_qs(order.max(2)) {
            if low_hz > 0.0 && low_hz < nyquist {
                sections.push(Biquad::highpass(low_hz, q, sample_rate));
            }
            if high_hz > 0.0 && high_hz < nyquist * 0.999 {
                sections.push(Biquad::lowpass(high_hz, q, sample_rate));
            }
        }
        let slowest = if low_hz > 0.0 { low_hz } else { high_hz.max(1.0) };
        let pad = (6.0 * sample_rate / (2.0 * PI * slowest)).ceil() as usize;
        ZeroPhaseFilter { sections, pad }
    }

    /// Narrow resonator of relative half-width `half_width` around `center_hz`.
    pub fn resonator(center_hz: f64, half_width: f64, sample_rate: f64) -> Self {
        let q = 1.0 / (2.0 * half_width);
        let bandwidth = 2.0 * half_width * center_hz;
        let pad = (8.0 * sample_rate / (PI * bandwidth)).ceil() as usize;
        ZeroPhaseFilter {
            sections: vec![Biquad::bandpass(center_hz, q, sample_rate)],
            pad,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn apply<T: Real>(&self, x: &[T]) -> Vec<T> {
        if self.sections.is_empty() || x.len() < 2 {
            return x.to_vec();
        }
        let n = x.len();
        let pad = self.pad.min(n - 1);
        let v: Vec<f64> = x.iter().map(|s| s.as_f64()).collect();
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * v[0] - v[i]));
        ext.extend_from_slice(&v);
        ext.extend((1..=pad).map(|i| 2.0 * v[n - 1] - v[n - 1 - i]));

        for s in &self.sections {
            s.run(&mut ext);
        }
        ext.reverse();
        for s in &self.sections {
            s.run(&mut ext);
        }
        ext.reverse();
        ext[pad..pad + n].iter().map(|&s| T::of(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(f: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect()
    }

    fn energy(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn bandpass_peak_gain_is_unity() {
        let b = Biquad::bandpass(100.0, 5.0, 2000.0);
        assert!((b.gain_at(100.0, 2000.0) - 1.0).abs() < 1e-9);
        assert!(b.gain_at(1000.0, 2000.0) < 0.05);
    }

    #[test]
    fn zero_phase_passes_in_band_tone() {
        let fs = 2200.0;
        let x = tone(440.0, fs, 4400);
        let f = ZeroPhaseFilter::band(85.0, 1000.0, 2, fs);
        let y = f.apply(&x);
        let mid = 1000..3400;
        let err: f64 = mid.clone().map(|i| (x[i] - y[i]).powi(2)).sum();
        assert!(err / energy(&x[mid]) < 1e-3);
    }

    #[test]
    fn band_rejects_drift() {
        let fs = 2200.0;
        let x: Vec<f64> = (0..4400).map(|i| 0.001 * i as f64).collect();
        let y = ZeroPhaseFilter::band(85.0, 1000.0, 2, fs).apply(&x);
        assert!(energy(&y[500..3900]) < 1e-6 * energy(&x));
    }

    #[test]
    fn constant_input_is_steady_state() {
        let b = Biquad::lowpass(50.0, 0.7071, 1000.0);
        let mut x = vec![3.0; 100];
        b.run(&mut x);
        assert!(x.iter().all(|v| (v - 3.0).abs() < 1e-9));
    }
}
