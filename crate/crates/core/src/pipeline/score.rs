use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::audio::AudioSignal;
use crate::dsp::{noise_floor, stft, StftParams};
use crate::error::{Error, Result};
use crate::Real;

/// Score of a silent or unusable signal, and the lower clamp of every score.
pub const FLOOR_SCORE: f64 = -100.0;
const CEILING_SCORE: f64 = 100.0;

/// Rates how much a signal looks like sound rather than noise. Higher is
/// better.
pub trait BlockScorer: Debug + Send + Sync {
    fn score(&self, samples: &[f64], sample_rate: f64) -> Result<f64>;
}

/// Mean over STFT frames of the in-band energy relative to a stationary
/// noise-floor estimate, in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSnrScorer {
    pub low_hz: f64,
    pub high_hz: f64,
    pub floor_percentile: f64,
    pub smooth_bins: usize,
    /// STFT window; by default about 50 ms, shrunk for short signals.
    #[serde(default)]
    pub window: Option<usize>,
}

impl Default for BandSnrScorer {
    fn default() -> Self {
        BandSnrScorer {
            low_hz: 85.0,
            high_hz: 4000.0,
            floor_percentile: 0.1,
            smooth_bins: 4,
            window: None,
        }
    }
}

impl BandSnrScorer {
    pub fn with_band(low_hz: f64, high_hz: f64) -> Self {
        BandSnrScorer {
            low_hz,
            high_hz,
            ..Default::default()
        }
    }

    fn params(&self, len: usize, sample_rate: f64) -> Result<StftParams> {
        match self.window {
            Some(w) => {
                if len < 2 * w {
                    return Err(Error::InvalidArgument(format!("scoring needs at least {} samples, got {len}", 2 * w)));
                }
                StftParams::new(w)
            }
            None => {
                let default = StftParams::for_sample_rate(sample_rate).window;
                let mut w = default;
                while len < 2 * w && w > 16 {
                    w /= 2;
                }
                if len < 2 * w {
                    return Err(Error::InvalidArgument(format!("scoring needs at least 32 samples, got {len}")));
                }
                StftParams::new(w)
            }
        }
    }
}

impl BlockScorer for BandSnrScorer {
    fn score(&self, samples: &[f64], sample_rate: f64) -> Result<f64> {
        let params = self.params(samples.len(), sample_rate)?;
        let bin_hz = params.bin_hz(sample_rate);
        let high = self.high_hz.min(0.45 * sample_rate);
        let band: Vec<usize> = (0..params.bins())
            .filter(|k| {
                let f = *k as f64 * bin_hz;
                f >= self.low_hz && f <= high
            })
            .collect();
        if band.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "band {}-{high} Hz holds no STFT bin at {sample_rate} Hz",
                self.low_hz
            )));
        }
        let mags = stft(samples, params).magnitudes();
        let peak = band
            .iter()
            .flat_map(|k| mags.iter().map(move |f| f[*k]))
            .fold(0.0f64, f64::max);
        if peak == 0.0 || !peak.is_finite() {
            return Ok(FLOOR_SCORE);
        }
        let floor = noise_floor(&mags, self.floor_percentile, self.smooth_bins);
        // keeps a noiseless signal from scoring infinity
        let min_floor = 1e-6 * peak;
        let floor_energy: f64 = band.iter().map(|k| floor[*k].max(min_floor).powi(2)).sum();
        let total: f64 = mags
            .iter()
            .map(|f| {
                let e: f64 = band.iter().map(|k| f[*k] * f[*k]).sum();
                if e > 0.0 {
                    (10.0 * (e / floor_energy).log10()).max(FLOOR_SCORE)
                } else {
                    FLOOR_SCORE
                }
            })
            .sum();
        Ok((total / mags.len() as f64).clamp(FLOOR_SCORE, CEILING_SCORE))
    }
}

pub fn score_block<T: Real>(signal: &AudioSignal<T>, scorer: &dyn BlockScorer) -> Result<f64> {
    let x: Vec<f64> = signal.samples().iter().map(|v| v.as_f64()).collect();
    scorer.score(&x, signal.sample_rate())
}

/// Like [`score_block`], but a block whose tracking was lost scores the
/// floor so it is never preferred over a block tracked end to end.
pub fn score_tracked<T: Real>(
    tracked: &crate::motion::DisplacementSignal<T>,
    audio: &AudioSignal<T>,
    scorer: &dyn BlockScorer,
) -> Result<f64> {
    if tracked.is_lost() {
        return Ok(FLOOR_SCORE);
    }
    score_block(audio, scorer)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    TopFraction(f64),
    Threshold(f64),
    TopN(usize),
}

impl Default for SelectionRule {
    fn default() -> Self {
        SelectionRule::TopFraction(0.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockScoreMap {
    /// Indexed by block id.
    pub scores: Vec<f64>,
    /// Descending score, ties by ascending id.
    pub selected: Vec<usize>,
    pub rule: SelectionRule,
}

/// Ranks blocks and keeps those allowed by `rule`. A threshold that keeps
/// nothing falls back to the single best block.
pub fn select_blocks(scores: &[f64], rule: SelectionRule) -> Result<BlockScoreMap> {
    if scores.is_empty() {
        return Err(Error::Empty("no block scores".into()));
    }
    let key = |s: f64| if s.is_nan() { f64::NEG_INFINITY } else { s };
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| key(scores[*b]).total_cmp(&key(scores[*a])).then(a.cmp(b)));
    let keep = match rule {
        SelectionRule::TopFraction(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidArgument(format!("top fraction {f} outside (0, 1]")));
            }
            ((f * scores.len() as f64).round() as usize).max(1)
        }
        SelectionRule::TopN(n) => {
            if n == 0 {
                return Err(Error::InvalidArgument("top_n must be at least 1".into()));
            }
            n.min(scores.len())
        }
        SelectionRule::Threshold(t) => order.iter().take_while(|i| key(scores[**i]) >= t).count().max(1),
    };
    order.truncate(keep);
    Ok(BlockScoreMap {
        scores: scores.to_vec(),
        selected: order,
        rule,
    })
}
