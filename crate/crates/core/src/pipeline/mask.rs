use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::score::{BlockScorer, FLOOR_SCORE};
use crate::audio::{detrend_linear, AudioSignal};
use crate::error::{Error, Result};
use crate::parallel::par_map;
use crate::stats::median;
use crate::video::FrameSequence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskPixel {
    pub x: usize,
    pub y: usize,
    pub weight: f64,
    /// +1 or -1: the sign that lines this pixel's intensity changes up with
    /// the best pixel's. Opposite image gradients move in opposite
    /// directions under the same motion.
    pub polarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelMask {
    pub pixels: Vec<MaskPixel>,
    /// Half-open frame range the scores were computed on.
    pub computed_from: (usize, usize),
}

impl PixelMask {
    /// `x,y,weight,polarity`, best pixel first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,weight,polarity\n");
        for p in &self.pixels {
            let _ = writeln!(out, "{},{},{:.9},{}", p.x, p.y, p.weight, p.polarity);
        }
        out
    }
}

fn pixel_series(video: &FrameSequence, y: usize, frames: usize) -> Vec<Vec<f64>> {
    let w = video.width();
    let mut rows = vec![Vec::with_capacity(frames); w];
    for t in 0..frames {
        for (x, series) in rows.iter_mut().enumerate() {
            series.push(video.intensity(t, x, y) as f64);
        }
    }
    rows
}

/// Scores every pixel's intensity over the first `calibration_frames`
/// frames and keeps the `top_n` best. Weights grow with the score above the
/// median pixel score and sum to 1.
pub fn build_pixel_mask(
    video: &FrameSequence,
    calibration_frames: usize,
    top_n: usize,
    scorer: &dyn BlockScorer,
    workers: usize,
) -> Result<PixelMask> {
    let (w, h) = (video.width(), video.height());
    if calibration_frames < 2 || calibration_frames > video.frame_count() {
        return Err(Error::InvalidArgument(format!(
            "calibration segment of {calibration_frames} frames outside 2..={}",
            video.frame_count()
        )));
    }
    if top_n == 0 || top_n > w * h {
        return Err(Error::InvalidArgument(format!("top_n {top_n} outside 1..={}", w * h)));
    }
    let fs = video.frame_rate().hz();
    let rows = par_map(workers, (0..h).collect(), |y| -> Result<Vec<f64>> {
        pixel_series(video, y, calibration_frames)
            .into_iter()
            .map(|s| {
                if s.iter().all(|v| *v == s[0]) {
                    return Ok(FLOOR_SCORE);
                }
                scorer.score(&detrend_linear(&s), fs)
            })
            .collect()
    })?;
    let scores: Vec<f64> = rows.into_iter().collect::<Result<Vec<_>>>()?.concat();

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b)));
    order.truncate(top_n);

    let floor = median(&scores);
    let raw: Vec<f64> = order.iter().map(|i| (scores[*i] - floor).max(0.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = if total > 0.0 {
        raw.iter().map(|v| v / total).collect()
    } else {
        vec![1.0 / top_n as f64; top_n]
    };

    let series = |i: usize| -> Vec<f64> {
        let (x, y) = (i % w, i / w);
        let s: Vec<f64> = (0..calibration_frames).map(|t| video.intensity(t, x, y) as f64).collect();
        detrend_linear(&s)
    };
    let best = series(order[0]);
    let pixels = order
        .iter()
        .zip(weights)
        .map(|(&i, weight)| {
            let dot: f64 = series(i).iter().zip(&best).map(|(a, b)| a * b).sum();
            MaskPixel {
                x: i % w,
                y: i / w,
                weight,
                polarity: if dot < 0.0 { -1.0 } else { 1.0 },
            }
        })
        .collect();
    Ok(PixelMask {
        pixels,
        computed_from: (0, calibration_frames),
    })
}

/// Per frame, the weighted (polarity-signed) sum of mask pixel intensities,
/// mean-removed.
pub fn mask_signal(video: &FrameSequence, mask: &PixelMask) -> Result<AudioSignal<f64>> {
    if mask.pixels.is_empty() {
        return Err(Error::Empty("pixel mask".into()));
    }
    for p in &mask.pixels {
        if p.x >= video.width() || p.y >= video.height() {
            return Err(Error::RegionOutOfBounds(format!("mask pixel ({}, {})", p.x, p.y)));
        }
    }
    let samples: Vec<f64> = (0..video.frame_count())
        .map(|t| {
            mask.pixels
                .iter()
                .map(|p| p.weight * p.polarity * video.intensity(t, p.x, p.y) as f64)
                .sum()
        })
        .collect();
    AudioSignal::new(video.frame_rate().hz(), samples)?.map_samples(crate::audio::remove_mean)
}
