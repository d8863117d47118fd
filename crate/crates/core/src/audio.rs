use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniformly sampled mono waveform; samples are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal<T = f64> {
    sample_rate: f64,
    samples: Vec<T>,
}

impl<T: Real> AudioSignal<T> {
    pub fn new(sample_rate: f64, samples: Vec<T>) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidArgument(format!("sample rate {sample_rate} must be positive")));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample {i} is not finite")));
        }
        Ok(AudioSignal {
            sample_rate,
            samples,
        })
    }

    pub fn silence(sample_rate: f64, len: usize) -> Result<Self> {
        Self::new(sample_rate, vec![T::zero(); len])
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn rms(&self) -> T {
        rms(&self.samples)
    }

    /// Applies `f` to the sample vector, keeping the sample rate.
    pub fn map_samples(&self, f: impl FnOnce(&[T]) -> Vec<T>) -> Result<Self> {
        Self::new(self.sample_rate, f(&self.samples))
    }

    pub fn scaled(&self, gain: T) -> Self {
        AudioSignal {
            sample_rate: self.sample_rate,
            samples: self.samples.iter().map(|&s| s * gain).collect(),
        }
    }

    pub fn mean_removed(&self) -> Self {
        AudioSignal {
            sample_rate: self.sample_rate,
            samples: remove_mean(&self.samples),
        }
    }

    pub fn cast<U: Real>(&self) -> AudioSignal<U> {
        AudioSignal {
            sample_rate: self.sample_rate,
            samples: self.samples.iter().map(|s| U::of(s.as_f64())).collect(),
        }
    }
}

pub fn mean<T: Real>(x: &[T]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    x.iter().copied().sum::<T>() / T::from_usize_lossy(x.len())
}

pub fn rms<T: Real>(x: &[T]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    (x.iter().map(|&v| v * v).sum::<T>() / T::from_usize_lossy(x.len())).sqrt()
}

pub fn remove_mean<T: Real>(x: &[T]) -> Vec<T> {
    let m = mean(x);
    x.iter().map(|&v| v - m).collect()
}

/// Subtracts the least-squares line through the samples.
pub fn detrend_linear<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    if n < 2 {
        return remove_mean(x);
    }
    let nf = n as f64;
    let t_mean = (nf - 1.0) / 2.0;
    let y_mean = mean(x).as_f64();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let dt = i as f64 - t_mean;
        sxy += dt * (v.as_f64() - y_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    x.iter()
        .enumerate()
        .map(|(i, &v)| v - T::of(y_mean + slope * (i as f64 - t_mean)))
        .collect()
}

/// Pearson correlation; zero when either input has no variance.
pub fn correlation<T: Real>(a: &[T], b: &[T]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let ma = mean(&a[..n]).as_f64();
    let mb = mean(&b[..n]).as_f64();
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a[..n].iter().zip(&b[..n]) {
        let (dx, dy) = (x.as_f64() - ma, y.as_f64() - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}
