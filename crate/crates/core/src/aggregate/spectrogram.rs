use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::audio::AudioSignal;
use crate::dsp::{stft, StftParams};
use crate::error::{Error, Result};
use crate::Real;

/// Magnitude spectrogram in dB, `db[frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub sample_rate: f64,
    pub params: StftParams,
    pub db: Vec<Vec<f64>>,
}

impl Spectrogram {
    pub fn new<T: Real>(signal: &AudioSignal<T>, params: StftParams) -> Self {
        let spec = stft(signal.samples(), params);
        let db = spec
            .magnitudes()
            .into_iter()
            .map(|f| f.into_iter().map(|m| 20.0 * m.as_f64().max(1e-12).log10()).collect())
            .collect();
        Spectrogram {
            sample_rate: signal.sample_rate(),
            params,
            db,
        }
    }

    /// Center time of frame `i` in seconds (frames start half a window
    /// before the signal because of padding).
    pub fn frame_time(&self, i: usize) -> f64 {
        let pad = (self.params.window - self.params.hop) as f64;
        (i as f64 * self.params.hop as f64 + self.params.window as f64 / 2.0 - pad) / self.sample_rate
    }

    pub fn bin_hz(&self, k: usize) -> f64 {
        k as f64 * self.params.bin_hz(self.sample_rate)
    }

    /// Long format: `time_s,freq_hz,magnitude_db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s,freq_hz,magnitude_db\n");
        for (i, frame) in self.db.iter().enumerate() {
            let t = self.frame_time(i);
            for (k, v) in frame.iter().enumerate() {
                let _ = writeln!(out, "{t:.6},{:.3},{v:.3}", self.bin_hz(k));
            }
        }
        out
    }

    /// Grayscale image, time left to right and low frequencies at the
    /// bottom, covering `range_db` below the peak.
    pub fn to_png(&self, range_db: f64) -> Result<Vec<u8>> {
        let w = self.db.len();
        let h = self.db.first().map_or(0, |f| f.len());
        if w == 0 || h == 0 {
            return Err(Error::Empty("spectrogram".into()));
        }
        let peak = self.db.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut pixels = vec![0u8; w * h];
        for (x, frame) in self.db.iter().enumerate() {
            for (k, v) in frame.iter().enumerate() {
                let level = ((v - peak + range_db) / range_db).clamp(0.0, 1.0);
                pixels[(h - 1 - k) * w + x] = (level * 255.0).round() as u8;
            }
        }
        let mut bytes = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut bytes, w as u32, h as u32);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header()?;
            writer.write_image_data(&pixels)?;
        }
        Ok(bytes)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn write_png(&self, path: impl AsRef<Path>, range_db: f64) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_png(range_db)?).map_err(|e| Error::io(path, e))
    }
}
