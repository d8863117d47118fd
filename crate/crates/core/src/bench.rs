//! Throughput and operation-count measurements of block extraction.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::ops;
use crate::pipeline::{block_audio, extract_all_blocks, score_tracked, select_blocks, BandSnrScorer, BlockGrid, ExtractConfig, SelectionRule};
use crate::synth::{render, MotionSeries, MotionTrack, SceneSpec};
use crate::video::{FrameSequence, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub extract: ExtractConfig,
    pub repeats: usize,
    pub top_fraction: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            extract: ExtractConfig::default(),
            repeats: 5,
            top_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub blocks: usize,
    pub pixels: u64,
    /// Fastest of the repeats, after one untimed warm-up run.
    pub seconds: f64,
    pub throughput: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerRow {
    pub workers: usize,
    pub seconds: f64,
    pub throughput: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    /// Full workload: every block.
    pub pixels_processed: u64,
    pub wall_time: f64,
    pub throughput: f64,
    /// Kernel operations per processed pixel; only with the `op-count` feature.
    pub ops_per_pixel: Option<f64>,
    pub full: Timing,
    pub pruned: Timing,
    pub pruned_speedup: f64,
    /// (pixels, seconds) over growing frame counts.
    pub scaling: Vec<(u64, f64)>,
    pub scaling_exponent: f64,
    pub scaling_residual: f64,
    pub rows: Vec<WorkerRow>,
}

impl BenchReport {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<12} {:>8} {:>14} {:>12} {:>16}", "workload", "blocks", "pixels", "seconds", "pixels/s");
        for (name, t) in [("full", &self.full), ("pruned", &self.pruned)] {
            let _ = writeln!(out, "{:<12} {:>8} {:>14} {:>12.6} {:>16.0}", name, t.blocks, t.pixels, t.seconds, t.throughput);
        }
        let _ = writeln!(out, "pruned speedup: {:.2}x", self.pruned_speedup);
        for r in &self.rows {
            let _ = writeln!(out, "workers {:>3}: {:.6} s, {:.0} pixels/s", r.workers, r.seconds, r.throughput);
        }
        let _ = writeln!(out, "scaling exponent: {:.3} (residual {:.3})", self.scaling_exponent, self.scaling_residual);
        match self.ops_per_pixel {
            Some(v) => {
                let _ = writeln!(out, "ops per pixel: {v:.2}");
            }
            None => out.push_str("ops per pixel: not instrumented\n"),
        }
        out
    }
}

fn subgrid(grid: &BlockGrid, ids: &[usize]) -> BlockGrid {
    BlockGrid {
        blocks: ids.iter().map(|i| grid.blocks[*i]).collect(),
        ..grid.clone()
    }
}

fn time_extract(video: &FrameSequence, grid: &BlockGrid, config: &ExtractConfig, workers: usize, repeats: usize) -> Result<Timing> {
    let pixels = (grid.len() * grid.block_size * grid.block_size * video.frame_count()) as u64;
    if grid.is_empty() {
        return Ok(Timing {
            blocks: 0,
            pixels: 0,
            seconds: 0.0,
            throughput: 0.0,
        });
    }
    std::hint::black_box(extract_all_blocks::<f32>(video, grid, config, workers)?);
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let out = extract_all_blocks::<f32>(video, grid, config, workers)?;
        times.push(start.elapsed().as_secs_f64());
        std::hint::black_box(out);
    }
    let seconds = times.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Timing {
        blocks: grid.len(),
        pixels,
        seconds,
        throughput: pixels as f64 / seconds.max(1e-12),
    })
}

/// Evenly spread block ids covering `fraction` of the grid.
fn spread(n: usize, fraction: f64) -> Vec<usize> {
    let keep = ((fraction * n as f64).round() as usize).min(n);
    (0..keep).map(|i| i * n / keep.max(1)).collect()
}

/// Least-squares slope of log(seconds) against log(pixels), with the RMS
/// residual in log units.
fn fit_exponent(points: &[(u64, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > 0 && p.1 > 0.0)
        .map(|p| ((p.0 as f64).ln(), p.1.ln()))
        .collect();
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let resid = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    (slope, resid)
}

/// Times extraction over all blocks and over the best `top_fraction` of
/// them. Blocks are ranked by scoring one untimed full extraction; videos
/// too short to score fall back to an even spread of blocks.
pub fn run_throughput(video: &FrameSequence, config: &BenchConfig, workers: usize) -> Result<BenchReport> {
    if !(config.top_fraction > 0.0 && config.top_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("top fraction {} outside (0, 1]", config.top_fraction)));
    }
    let grid = config.extract.grid(video)?;
    let fs = video.frame_rate().hz();

    let (signals, counts) = ops::measure(|| extract_all_blocks::<f32>(video, &grid, &config.extract, 1));
    let signals = signals?;
    let scorer = BandSnrScorer::default();
    let scores: Option<Vec<f64>> = signals
        .iter()
        .map(|s| block_audio(s, fs, config.extract.mode).and_then(|a| score_tracked(s, &a, &scorer)))
        .collect::<Result<Vec<_>>>()
        .ok();
    let selected = match scores {
        Some(s) => select_blocks(&s, SelectionRule::TopFraction(config.top_fraction))?.selected,
        None => spread(grid.len(), config.top_fraction),
    };

    let full = time_extract(video, &grid, &config.extract, workers, config.repeats)?;
    let pruned = time_extract(video, &subgrid(&grid, &selected), &config.extract, workers, config.repeats)?;

    let mut rows = vec![WorkerRow {
        workers,
        seconds: full.seconds,
        throughput: full.throughput,
    }];
    if workers != 1 {
        let single = time_extract(video, &grid, &config.extract, 1, config.repeats)?;
        rows.insert(
            0,
            WorkerRow {
                workers: 1,
                seconds: single.seconds,
                throughput: single.throughput,
            },
        );
    }

    let l = video.frame_count();
    let mut scaling = Vec::new();
    for div in [4, 2] {
        if l / div >= 2 {
            let part = video.slice_frames(0, l / div)?;
            let t = time_extract(&part, &grid, &config.extract, workers, config.repeats)?;
            scaling.push((t.pixels, t.seconds));
        }
    }
    scaling.push((full.pixels, full.seconds));
    let (scaling_exponent, scaling_residual) = fit_exponent(&scaling);

    Ok(BenchReport {
        pixels_processed: full.pixels,
        wall_time: full.seconds,
        throughput: full.throughput,
        ops_per_pixel: ops::enabled().then(|| counts.per_pixel()),
        pruned_speedup: full.seconds / pruned.seconds.max(1e-12),
        full,
        pruned,
        scaling,
        scaling_exponent,
        scaling_residual,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealtimeConfig {
    pub extract: ExtractConfig,
    pub top_fraction: f64,
    /// Frames of synthetic video to time; the rate is extrapolated.
    pub frames: usize,
    pub seed: u64,
}

impl Default for RealtimeConfig {
    fn default() -> Self {
        RealtimeConfig {
            extract: ExtractConfig::default(),
            top_fraction: 0.1,
            frames: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealtimeReport {
    pub pass: bool,
    pub required_fps: f64,
    /// `None` when no block was selected.
    pub processed_fps: Option<f64>,
    /// processed / required; above 1 means faster than real time.
    pub margin: Option<f64>,
    pub blocks: usize,
    /// Nothing to process, so the check passes trivially.
    pub degenerate: bool,
}

/// Renders a short vibrating scene at `width` x `height` and checks whether
/// the pruned workload is processed at least as fast as `frame_rate`.
pub fn realtime_check(frame_rate: f64, width: usize, height: usize, config: &RealtimeConfig, workers: usize) -> Result<RealtimeReport> {
    if !(frame_rate.is_finite() && frame_rate > 0.0) {
        return Err(Error::InvalidArgument("frame rate must be positive".into()));
    }
    if !(0.0..=1.0).contains(&config.top_fraction) {
        return Err(Error::InvalidArgument("top fraction outside [0, 1]".into()));
    }
    let mut spec = SceneSpec::still(width, height, frame_rate, config.frames.max(2));
    spec.motion.push(MotionTrack {
        region: Rect::new(0, 0, width, height),
        displacement: MotionSeries::tone(440.0f64.min(frame_rate / 5.0), 0.2),
        delay: 0.0,
    });
    let video = render(&spec, config.seed)?;
    let grid = config.extract.grid(&video)?;
    let ids = spread(grid.len(), config.top_fraction);
    if ids.is_empty() {
        return Ok(RealtimeReport {
            pass: true,
            required_fps: frame_rate,
            processed_fps: None,
            margin: None,
            blocks: 0,
            degenerate: true,
        });
    }
    let t = time_extract(&video, &subgrid(&grid, &ids), &config.extract, workers, 3)?;
    let fps = video.frame_count() as f64 / t.seconds.max(1e-12);
    Ok(RealtimeReport {
        pass: fps >= frame_rate,
        required_fps: frame_rate,
        processed_fps: Some(fps),
        margin: Some(fps / frame_rate),
        blocks: ids.len(),
        degenerate: false,
    })
}
