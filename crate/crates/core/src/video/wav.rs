use std::path::Path;

use crate::audio::AudioSignal;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Peak level, relative to full scale, that written audio is normalized to.
pub const WAV_PEAK: f64 = 0.9;

/// Writes mono 16-bit PCM, peak-normalized to 0.9 of full scale.
///
/// An all-zero signal is written as silence.
pub fn write_wav<T: Real>(signal: &AudioSignal<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if signal.is_empty() {
        return Err(Error::Empty("cannot write a WAV file with no samples".into()));
    }
    let rate = signal.sample_rate().round();
    if !(1.0..=u32::MAX as f64).contains(&rate) {
        return Err(Error::InvalidArgument(format!("sample rate {rate} not representable")));
    }
    let quantized = quantize(signal.samples());
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate as u32,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Wav(other),
    })?;
    for s in quantized {
        writer.write_sample(s)?;
    }
    writer.finalize()?;
    Ok(())
}

pub(crate) fn quantize<T: Real>(samples: &[T]) -> Vec<i16> {
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.as_f64().abs()));
    if peak == 0.0 {
        return vec![0; samples.len()];
    }
    let scale = WAV_PEAK * i16::MAX as f64 / peak;
    samples
        .iter()
        .map(|s| (s.as_f64() * scale).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16)
        .collect()
}

/// Reads a PCM WAV file as samples in [-1, 1]; multi-channel input is
/// averaged to mono.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioSignal<f64>> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Wav(other),
    })?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Int => {
            let full = (1i64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / full))
                .collect::<Result<_, _>>()?
        }
        hound::SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<Result<_, _>>()?,
    };
    let mono = interleaved
        .chunks(channels)
        .map(|c| c.iter().sum::<f64>() / channels as f64)
        .collect();
    AudioSignal::new(spec.sample_rate as f64, mono)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_to_ninety_percent() {
        let samples: Vec<f64> = (0..2200)
            .map(|i| 3.0 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 2200.0).sin())
            .collect();
        let q = quantize(&samples);
        let peak = q.iter().map(|v| (*v as i32).abs()).max().unwrap();
        assert!((peak - 29490).abs() <= 1, "peak {peak}");
    }

    #[test]
    fn silence_stays_silent() {
        assert_eq!(quantize(&[0.0f64; 5]), vec![0; 5]);
    }
}
