use serde::{Deserialize, Serialize};

use super::{block_audio, extract_all_blocks, score_tracked, select_blocks, BandSnrScorer, BlockGrid, BlockScoreMap, ExtractConfig, SelectionRule};
use crate::aggregate::{aggregate_with, denoise, Combination, DenoiseParams};
use crate::audio::AudioSignal;
use crate::dsp::StftParams;
use crate::error::{Error, Result};
use crate::motion::DisplacementSignal;
use crate::parallel::par_map;
use crate::video::FrameSequence;
use crate::Real;

/// Aggregated displacement below this RMS (pixels) is treated as silence.
pub const SILENCE_RMS_PX: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoverConfig {
    pub extract: ExtractConfig,
    pub selection: SelectionRule,
    pub scorer: BandSnrScorer,
    /// Aggregation STFT; about 50 ms by default, shrunk for short videos.
    pub stft: Option<StftParams>,
    pub combination: Combination,
    pub denoise: Option<DenoiseParams>,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        RecoverConfig {
            extract: ExtractConfig::default(),
            selection: SelectionRule::default(),
            scorer: BandSnrScorer::default(),
            stft: None,
            combination: Combination::default(),
            denoise: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Recovery<T> {
    /// In pixels of displacement; all zeros when `silent`.
    pub audio: AudioSignal<T>,
    pub grid: BlockGrid,
    pub scores: BlockScoreMap,
    pub displacement: Vec<DisplacementSignal<T>>,
    /// Per-block audio in grid order.
    pub block_audio: Vec<AudioSignal<T>>,
    pub silent: bool,
}

fn stft_for(len: usize, sample_rate: f64, explicit: Option<StftParams>) -> Result<StftParams> {
    if let Some(p) = explicit {
        return Ok(p);
    }
    let mut w = StftParams::for_sample_rate(sample_rate).window;
    while len < w && w > 16 {
        w /= 2;
    }
    StftParams::new(w)
}

/// Whole recovery chain: track every block, score, select, merge the
/// selected blocks and optionally denoise.
pub fn recover<T: Real>(video: &FrameSequence, config: &RecoverConfig, workers: usize) -> Result<Recovery<T>> {
    let fs = video.frame_rate().hz();
    let grid = config.extract.grid(video)?;
    let displacement = extract_all_blocks::<T>(video, &grid, &config.extract, workers)?;
    let mode = config.extract.mode;
    let scorer = config.scorer;
    let jobs: Vec<&DisplacementSignal<T>> = displacement.iter().collect();
    let scored = par_map(workers, jobs, |d| -> Result<(AudioSignal<T>, f64)> {
        let a = block_audio(d, fs, mode)?;
        let s = score_tracked(d, &a, &scorer)?;
        Ok((a, s))
    })?;
    let (block_audio, scores): (Vec<_>, Vec<_>) = scored.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let map = select_blocks(&scores, config.selection)?;

    let chosen: Vec<AudioSignal<T>> = map.selected.iter().map(|i| block_audio[*i].clone()).collect();
    let weights: Vec<f64> = map.selected.iter().map(|i| scores[*i]).collect();
    let len = chosen.first().map_or(0, |a| a.len());
    let params = stft_for(len, fs, config.stft)?;
    let mut audio = aggregate_with(&chosen, &weights, params, config.combination)?;
    if let Some(d) = &config.denoise {
        audio = denoise(&audio, d)?;
    }
    let silent = audio.rms().as_f64() < SILENCE_RMS_PX;
    if silent {
        audio = AudioSignal::silence(fs, audio.len())?;
    }
    if audio.samples().iter().any(|v| !v.as_f64().is_finite()) {
        return Err(Error::NoUsableFrames("aggregated signal is not finite".into()));
    }
    Ok(Recovery {
        audio,
        grid,
        scores: map,
        displacement,
        block_audio,
        silent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{render, MotionSeries, MotionTrack, SceneSpec};
    use crate::video::Rect;

    #[test]
    fn still_scene_is_silent() {
        let spec = SceneSpec::still(48, 48, 2200.0, 600);
        let video = render(&spec, 1).unwrap();
        let r = recover::<f64>(&video, &RecoverConfig::default(), 1).unwrap();
        assert!(r.silent, "{}", r.audio.rms());
        assert!(r.audio.samples().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn tone_scene_peaks_at_tone() {
        let mut spec = SceneSpec::still(48, 48, 2200.0, 2200);
        spec.motion.push(MotionTrack {
            region: Rect::new(0, 0, 48, 48),
            displacement: MotionSeries::tone(440.0, 0.2),
            delay: 0.0,
        });
        let video = render(&spec, 1).unwrap();
        let r = recover::<f64>(&video, &RecoverConfig::default(), 2).unwrap();
        assert!(!r.silent);
        let x = r.audio.samples();
        let corr = crate::audio::correlation(x, &spec.motion[0].ground_truth(2200, 2200.0).0);
        assert!(corr > 0.95, "{corr}");
    }
}
