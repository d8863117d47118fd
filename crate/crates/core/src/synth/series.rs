use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Damped sinusoid along `angle_rad` (0 = +x, pi/2 = +y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub frequency_hz: f64,
    pub amplitude_px: f64,
    #[serde(default)]
    pub phase_rad: f64,
    #[serde(default)]
    pub angle_rad: f64,
    /// Exponential decay rate in 1/s. A decaying tone starts at t = 0 and
    /// is zero before.
    #[serde(default)]
    pub decay_per_s: f64,
}

impl Tone {
    fn eval(&self, seconds: f64) -> (f64, f64) {
        if self.decay_per_s > 0.0 && seconds < 0.0 {
            return (0.0, 0.0);
        }
        let env = (-self.decay_per_s * seconds.max(0.0)).exp();
        let v = self.amplitude_px * env * (std::f64::consts::TAU * self.frequency_hz * seconds + self.phase_rad).sin();
        (v * self.angle_rad.cos(), v * self.angle_rad.sin())
    }
}

/// Displacement (dx, dy) in pixels as a function of (fractional) frame time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MotionSeries {
    Zero,
    Tones { tones: Vec<Tone> },
    /// Per-frame samples, Catmull-Rom interpolated between frames and held
    /// constant beyond either end.
    Samples { dx: Vec<f64>, dy: Vec<f64> },
    Sum { parts: Vec<MotionSeries> },
}

impl MotionSeries {
    /// Horizontal sinusoid.
    pub fn tone(frequency_hz: f64, amplitude_px: f64) -> Self {
        MotionSeries::Tones {
            tones: vec![Tone {
                frequency_hz,
                amplitude_px,
                phase_rad: 0.0,
                angle_rad: 0.0,
                decay_per_s: 0.0,
            }],
        }
    }

    /// Horizontal motion following `dx` frame by frame.
    pub fn horizontal(dx: Vec<f64>) -> Self {
        let dy = vec![0.0; dx.len()];
        MotionSeries::Samples { dx, dy }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MotionSeries::Zero => Ok(()),
            MotionSeries::Tones { tones } => {
                for t in tones {
                    let ok = [t.frequency_hz, t.amplitude_px, t.phase_rad, t.angle_rad, t.decay_per_s]
                        .iter()
                        .all(|v| v.is_finite());
                    if !ok || t.decay_per_s < 0.0 {
                        return Err(Error::InvalidArgument(format!("invalid tone {t:?}")));
                    }
                }
                Ok(())
            }
            MotionSeries::Samples { dx, dy } => {
                if dx.len() != dy.len() {
                    return Err(Error::LengthMismatch {
                        expected: dx.len(),
                        actual: dy.len(),
                    });
                }
                if dx.is_empty() {
                    return Err(Error::Empty("displacement samples".into()));
                }
                if dx.iter().chain(dy).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("displacement samples must be finite".into()));
                }
                Ok(())
            }
            MotionSeries::Sum { parts } => parts.iter().try_for_each(|p| p.validate()),
        }
    }

    /// Displacement at frame time `t` (may be fractional or negative).
    pub fn eval(&self, t: f64, frame_rate_hz: f64) -> (f64, f64) {
        match self {
            MotionSeries::Zero => (0.0, 0.0),
            MotionSeries::Tones { tones } => tones.iter().fold((0.0, 0.0), |acc, tone| {
                let (x, y) = tone.eval(t / frame_rate_hz);
                (acc.0 + x, acc.1 + y)
            }),
            MotionSeries::Samples { dx, dy } => (catmull_rom(dx, t), catmull_rom(dy, t)),
            MotionSeries::Sum { parts } => parts.iter().fold((0.0, 0.0), |acc, p| {
                let (x, y) = p.eval(t, frame_rate_hz);
                (acc.0 + x, acc.1 + y)
            }),
        }
    }
}

fn catmull_rom(v: &[f64], t: f64) -> f64 {
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    let at = |i: i64| v[i.clamp(0, n as i64 - 1) as usize];
    let i = t.floor();
    let f = t - i;
    let i = i as i64;
    if f == 0.0 {
        return at(i);
    }
    let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
    0.5 * (2.0 * p1 + (p2 - p0) * f + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * f * f + (3.0 * p1 - p0 - 3.0 * p2 + p3) * f * f * f)
}
