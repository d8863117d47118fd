//! Block-wise extraction: tile the frame, track every block, score the
//! resulting signals and keep the best ones.

mod mask;
mod recover;
mod score;

use serde::{Deserialize, Serialize};

use crate::aggregate::project_axis;
use crate::audio::{detrend_linear, AudioSignal};
use crate::error::{Error, Result};
use crate::motion::{track_block, track_block_fixed, Arithmetic, DisplacementSignal, MotionMode, Similarity, TrackerConfig};
use crate::parallel::par_map;
use crate::video::{FrameSequence, Patch, Pixel, PixelBuffer, Rect};
use crate::Real;

pub use mask::{build_pixel_mask, mask_signal, MaskPixel, PixelMask};
pub use recover::{recover, RecoverConfig, Recovery, SILENCE_RMS_PX};
pub use score::{score_block, score_tracked, select_blocks, BandSnrScorer, BlockScoreMap, BlockScorer, SelectionRule, FLOOR_SCORE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: usize,
    pub rect: Rect,
    pub center: (f64, f64),
}

/// Non-overlapping square blocks. Blocks that would not leave `margin`
/// pixels of search room inside the frame are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockGrid {
    pub block_size: usize,
    pub origin: (usize, usize),
    pub margin: usize,
    pub blocks: Vec<Block>,
}

impl BlockGrid {
    pub fn new(width: usize, height: usize, block_size: usize, origin: (usize, usize), margin: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidArgument("block size must be positive".into()));
        }
        let mut blocks = Vec::new();
        let mut y = origin.1;
        while y + block_size <= height {
            let mut x = origin.0;
            while x + block_size <= width {
                let rect = Rect::new(x, y, block_size, block_size);
                if rect.expand_within(margin, width, height).is_some() {
                    blocks.push(Block {
                        id: blocks.len(),
                        rect,
                        center: rect.center(),
                    });
                }
                x += block_size;
            }
            y += block_size;
        }
        if blocks.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no {block_size}x{block_size} block with margin {margin} fits a {width}x{height} frame"
            )));
        }
        Ok(BlockGrid {
            block_size,
            origin,
            margin,
            blocks,
        })
    }

    /// Grid starting `margin` pixels in from the top-left corner.
    pub fn for_frame(width: usize, height: usize, block_size: usize, margin: usize) -> Result<Self> {
        Self::new(width, height, block_size, (margin, margin), margin)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub block_size: usize,
    pub margin: usize,
    pub mode: MotionMode,
    pub similarity: Similarity,
    pub arithmetic: Arithmetic,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            block_size: 8,
            margin: 4,
            mode: MotionMode::QUADRATIC_1D,
            similarity: Similarity::Normalized,
            arithmetic: Arithmetic::Float,
        }
    }
}

impl ExtractConfig {
    pub fn tracker(&self) -> TrackerConfig {
        TrackerConfig::new(self.mode, self.similarity, self.margin)
    }

    pub fn grid(&self, video: &FrameSequence) -> Result<BlockGrid> {
        BlockGrid::for_frame(video.width(), video.height(), self.block_size, self.margin)
    }
}

fn patches<P: Pixel>(video: &FrameSequence, patch: Rect) -> (Patch<'_, P>, impl Iterator<Item = Patch<'_, P>>) {
    let frame = move |t| video.frame::<P>(t).expect("frame index in range").sub(patch);
    (frame(0), (0..video.frame_count()).map(frame))
}

/// Tracks every block of `grid` through `video`. The result is in grid
/// order. A block that loses track keeps its signal with `lost_from` set;
/// it never aborts the run.
pub fn extract_all_blocks<T: Real>(
    video: &FrameSequence,
    grid: &BlockGrid,
    config: &ExtractConfig,
    workers: usize,
) -> Result<Vec<DisplacementSignal<T>>> {
    let fixed = config.arithmetic == Arithmetic::Fixed16;
    let eight = matches!(video.pixels(), PixelBuffer::U8(_));
    if fixed && !eight {
        return Err(Error::InvalidArgument("fixed-point arithmetic needs 8-bit video".into()));
    }
    let tracker = TrackerConfig::new(config.mode, config.similarity, grid.margin);
    let jobs: Vec<Block> = grid.blocks.clone();
    let results = par_map(workers, jobs, |block| -> Result<DisplacementSignal<T>> {
        let patch = block
            .rect
            .expand_within(grid.margin, video.width(), video.height())
            .ok_or_else(|| Error::RegionOutOfBounds(format!("block {} {:?}", block.id, block.rect)))?;
        let mut s = if fixed {
            let (reference, frames) = patches::<u8>(video, patch);
            track_block_fixed(&reference, frames, &tracker)?
        } else if eight {
            let (reference, frames) = patches::<u8>(video, patch);
            track_block(&reference, frames, &tracker)?
        } else {
            let (reference, frames) = patches::<u16>(video, patch);
            track_block(&reference, frames, &tracker)?
        };
        s.block_id = block.id;
        Ok(s)
    })?;
    results.into_iter().collect()
}

/// Scalar, mean-removed and linearly detrended audio for one block: the
/// horizontal track in 1D mode, the dominant-axis projection in 2D mode.
pub fn block_audio<T: Real>(signal: &DisplacementSignal<T>, sample_rate: f64, mode: MotionMode) -> Result<AudioSignal<T>> {
    let raw = match mode.dimensionality {
        crate::motion::Dimensionality::OneD => AudioSignal::new(sample_rate, signal.dx())?,
        crate::motion::Dimensionality::TwoD => project_axis(signal, sample_rate)?,
    };
    raw.map_samples(|x| detrend_linear(x))
}

/// Score-map CSV: `block_id,x,y,score,selected` with the block center.
pub fn score_map_csv(grid: &BlockGrid, map: &BlockScoreMap) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("block_id,x,y,score,selected\n");
    for (block, score) in grid.blocks.iter().zip(&map.scores) {
        let selected = map.selected.contains(&block.id) as u8;
        let _ = writeln!(out, "{},{},{},{:.6},{}", block.id, block.center.0, block.center.1, score, selected);
    }
    out
}
