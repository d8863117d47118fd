use std::path::Path;

use serde::{Deserialize, Serialize};
use vibrophone::aggregate::{Combination, DenoiseParams};
use vibrophone::dsp::StftParams;
use vibrophone::motion::{Arithmetic, Dimensionality, Interpolation, MotionMode, Similarity};
use vibrophone::pipeline::{BandSnrScorer, ExtractConfig, RecoverConfig, SelectionRule};
use vibrophone::{Error, Result};

/// Effective settings of one run. Loaded from a JSON file, then overridden
/// by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub block_size: usize,
    pub margin: usize,
    pub interpolation: Interpolation,
    pub dimensionality: Dimensionality,
    pub arithmetic: Arithmetic,
    pub similarity: Similarity,
    pub selection: SelectionRule,
    pub stft_window: Option<usize>,
    pub stft_hop: Option<usize>,
    pub combination: Combination,
    pub denoise: bool,
    /// Scoring band in Hz.
    pub band: (f64, f64),
    pub seed: u64,
    /// 0 uses every core.
    pub workers: usize,
    /// Frame rate for image-sequence input.
    pub frame_rate: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            block_size: 8,
            margin: 4,
            interpolation: Interpolation::Quadratic,
            dimensionality: Dimensionality::OneD,
            arithmetic: Arithmetic::Float,
            similarity: Similarity::Normalized,
            selection: SelectionRule::default(),
            stft_window: None,
            stft_hop: None,
            combination: Combination::default(),
            denoise: false,
            band: (85.0, 4000.0),
            seed: 0,
            workers: 1,
            frame_rate: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size < 4 {
            return Err(Error::InvalidArgument(format!("block_size {} below 4", self.block_size)));
        }
        let reach = if self.interpolation == Interpolation::Quartic { 2 } else { 1 };
        if self.margin < reach {
            return Err(Error::InvalidArgument(format!("margin {} smaller than the stencil reach {reach}", self.margin)));
        }
        self.stft()?;
        match self.selection {
            SelectionRule::TopFraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(Error::InvalidArgument(format!("top fraction {f} outside (0, 1]")));
            }
            SelectionRule::TopN(0) => return Err(Error::InvalidArgument("top_n must be at least 1".into())),
            _ => {}
        }
        if !(self.band.0 >= 0.0 && self.band.1 > self.band.0) {
            return Err(Error::InvalidArgument(format!("band {:?} is empty", self.band)));
        }
        if let Some(r) = self.frame_rate {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidArgument(format!("frame rate {r} must be positive")));
            }
        }
        Ok(())
    }

    pub fn mode(&self) -> MotionMode {
        MotionMode {
            interpolation: self.interpolation,
            dimensionality: self.dimensionality,
        }
    }

    pub fn stft(&self) -> Result<Option<StftParams>> {
        match (self.stft_window, self.stft_hop) {
            (None, None) => Ok(None),
            (Some(w), None) => StftParams::new(w).map(Some),
            (Some(w), Some(h)) => StftParams::with_hop(w, h).map(Some),
            (None, Some(_)) => Err(Error::InvalidArgument("stft_hop given without stft_window".into())),
        }
    }

    pub fn extract(&self) -> ExtractConfig {
        ExtractConfig {
            block_size: self.block_size,
            margin: self.margin,
            mode: self.mode(),
            similarity: self.similarity,
            arithmetic: self.arithmetic,
        }
    }

    pub fn scorer(&self) -> BandSnrScorer {
        BandSnrScorer::with_band(self.band.0, self.band.1)
    }

    pub fn recover(&self) -> Result<RecoverConfig> {
        Ok(RecoverConfig {
            extract: self.extract(),
            selection: self.selection,
            scorer: self.scorer(),
            stft: self.stft()?,
            combination: self.combination,
            denoise: self.denoise.then(DenoiseParams::default),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_keeps_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"interpolation": "quartic", "selection": {"top_n": 5}}"#).unwrap();
        assert_eq!(c.interpolation, Interpolation::Quartic);
        assert_eq!(c.selection, SelectionRule::TopN(5));
        assert_eq!(c.block_size, 8);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"blocksize": 4}"#).is_err());
    }

    #[test]
    fn bad_values_rejected() {
        let mut c = RunConfig { stft_window: Some(100), ..Default::default() };
        assert!(c.validate().is_err());
        c.stft_window = None;
        c.margin = 1;
        c.interpolation = Interpolation::Quartic;
        assert!(c.validate().is_err());
    }
}
