//! Synthetic videos with exactly known sub-pixel motion.
//!
//! A [`SceneSpec`] describes a static texture and a set of disjoint regions,
//! each translated by its own displacement series. [`render`] resamples the
//! texture inside every region with a separable bicubic kernel, applies an
//! optional global gain (flicker), adds Gaussian sensor noise and quantizes.

mod series;
mod texture;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video::{BitDepth, FrameRate, FrameSequence, PixelBuffer, Rect};

pub use series::{MotionSeries, Tone};
pub use texture::{generate_texture, Overlay, TextureKind, TextureSpec};

fn default_bit_depth() -> u32 {
    8
}

fn default_max_displacement() -> f64 {
    2.0
}

/// One rigidly moving region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionTrack {
    pub region: Rect,
    pub displacement: MotionSeries,
    /// Frames; the region shows `displacement` evaluated at `t - delay`.
    #[serde(default)]
    pub delay: f64,
}

impl MotionTrack {
    /// Displacement (dx, dy) in pixels shown at frame `t`.
    pub fn displacement_at(&self, t: usize, frame_rate_hz: f64) -> (f64, f64) {
        self.displacement.eval(t as f64 - self.delay, frame_rate_hz)
    }

    /// Ground-truth horizontal and vertical series over `frames` frames.
    pub fn ground_truth(&self, frames: usize, frame_rate_hz: f64) -> (Vec<f64>, Vec<f64>) {
        (0..frames).map(|t| self.displacement_at(t, frame_rate_hz)).unzip()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub texture: TextureSpec,
    #[serde(default)]
    pub motion: Vec<MotionTrack>,
    pub frame_rate: f64,
    pub duration: f64,
    /// Standard deviation of additive sensor noise, in output intensity units.
    #[serde(default)]
    pub noise_sigma: f64,
    /// Per-frame global gain.
    #[serde(default)]
    pub photometric_flicker: Option<Vec<f64>>,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u32,
    #[serde(default = "default_max_displacement")]
    pub max_displacement_px: f64,
}

impl SceneSpec {
    /// Static textured scene with no motion.
    pub fn still(width: usize, height: usize, frame_rate: f64, frames: usize) -> Self {
        SceneSpec {
            width,
            height,
            texture: TextureSpec::default(),
            motion: Vec::new(),
            frame_rate,
            duration: frames as f64 / frame_rate,
            noise_sigma: 0.0,
            photometric_flicker: None,
            bit_depth: 8,
            max_displacement_px: default_max_displacement(),
        }
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.frame_rate).round().max(0.0) as usize
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SceneSpec = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("scene: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("scene must be at least 1x1".into()));
        }
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(Error::InvalidArgument(format!("frame rate {} must be positive", self.frame_rate)));
        }
        let frames = self.frame_count();
        if frames < 2 {
            return Err(Error::InvalidArgument(format!("scene has {frames} frames, need at least 2")));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidArgument("noise_sigma must be non-negative".into()));
        }
        BitDepth::from_bits(self.bit_depth)?;
        if let Some(g) = &self.photometric_flicker {
            if g.len() < frames {
                return Err(Error::LengthMismatch {
                    expected: frames,
                    actual: g.len(),
                });
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("flicker gains must be finite".into()));
            }
        }
        self.texture.validate(self.width, self.height)?;
        for (i, track) in self.motion.iter().enumerate() {
            let r = track.region;
            if r.width == 0 || r.height == 0 || r.right() > self.width || r.bottom() > self.height {
                return Err(Error::RegionOutOfBounds(format!(
                    "motion region {i} {r:?} outside {}x{} frame",
                    self.width, self.height
                )));
            }
            if !(track.delay.is_finite() && track.delay >= 0.0) {
                return Err(Error::InvalidArgument(format!("motion region {i} has negative delay")));
            }
            track.displacement.validate()?;
            for other in &self.motion[..i] {
                if other.region.intersects(&r) {
                    return Err(Error::InvalidArgument(format!("motion region {i} overlaps an earlier region")));
                }
            }
            for t in 0..frames {
                let (dx, dy) = track.displacement_at(t, self.frame_rate);
                if dx.abs() > self.max_displacement_px || dy.abs() > self.max_displacement_px {
                    return Err(Error::InvalidArgument(format!(
                        "motion region {i} moves ({dx:.3}, {dy:.3}) px at frame {t}, limit {}",
                        self.max_displacement_px
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Keys cubic convolution weights (a = -0.5) for taps at offsets -1..=2
/// from the integer sample below the position, given its fractional part.
fn cubic_weights(f: f64) -> [f64; 4] {
    let k = |x: f64| {
        let x = x.abs();
        if x < 1.0 {
            (1.5 * x - 2.5) * x * x + 1.0
        } else if x < 2.0 {
            ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0
        } else {
            0.0
        }
    };
    [k(1.0 + f), k(f), k(1.0 - f), k(2.0 - f)]
}

/// Shifts the content of `region` by (dx, dy); returns values row-major.
fn resample_region(texture: &[f64], width: usize, height: usize, region: Rect, dx: f64, dy: f64) -> Vec<f64> {
    // content moved by +d, so pixel x shows the texture at x - d
    let split = |d: f64| {
        let s = -d;
        let base = s.floor();
        (base as i64, cubic_weights(s - base))
    };
    let (ox, wx) = split(dx);
    let (oy, wy) = split(dy);
    let clamp = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;
    let mut out = Vec::with_capacity(region.area());
    // horizontal pass over the rows the vertical taps touch
    let y0 = region.y as i64 + oy - 1;
    let rows = region.height + 3;
    let mut tmp = vec![0.0; rows * region.width];
    for j in 0..rows {
        let src = &texture[clamp(y0 + j as i64, height) * width..][..width];
        for i in 0..region.width {
            let x = region.x as i64 + i as i64 + ox;
            let mut acc = 0.0;
            for (k, w) in wx.iter().enumerate() {
                acc += w * src[clamp(x - 1 + k as i64, width)];
            }
            tmp[j * region.width + i] = acc;
        }
    }
    for j in 0..region.height {
        for i in 0..region.width {
            let mut acc = 0.0;
            for (k, w) in wy.iter().enumerate() {
                acc += w * tmp[(j + k) * region.width + i];
            }
            out.push(acc);
        }
    }
    out
}

/// Renders `spec`. Pure in (spec, seed): frame t draws its sensor noise from
/// an independent stream keyed by (seed, t), so frames render in parallel.
pub fn render(spec: &SceneSpec, seed: u64) -> Result<FrameSequence> {
    spec.validate()?;
    let depth = BitDepth::from_bits(spec.bit_depth)?;
    let max = depth.max_value() as f64;
    let (w, h) = (spec.width, spec.height);
    let texture: Vec<f64> = generate_texture(&spec.texture, w, h, seed)?.into_iter().map(|v| v * max).collect();
    let frames = spec.frame_count();
    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?)
    } else {
        None
    };

    let render_frame = |t: usize| -> Vec<f64> {
        let mut frame = texture.clone();
        for track in &spec.motion {
            let (dx, dy) = track.displacement_at(t, spec.frame_rate);
            let r = track.region;
            let moved = resample_region(&texture, w, h, r, dx, dy);
            for j in 0..r.height {
                frame[(r.y + j) * w + r.x..][..r.width].copy_from_slice(&moved[j * r.width..][..r.width]);
            }
        }
        if let Some(g) = &spec.photometric_flicker {
            frame.iter_mut().for_each(|v| *v *= g[t]);
        }
        if let Some(dist) = &noise {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            frame.iter_mut().for_each(|v| *v += dist.sample(&mut rng));
        }
        frame
    };
    let quantize = |v: f64| v.round().clamp(0.0, max);

    let pixels = match depth {
        BitDepth::Eight => PixelBuffer::U8(
            (0..frames)
                .into_par_iter()
                .flat_map_iter(|t| render_frame(t).into_iter().map(|v| quantize(v) as u8).collect::<Vec<_>>())
                .collect(),
        ),
        BitDepth::Sixteen => PixelBuffer::U16(
            (0..frames)
                .into_par_iter()
                .flat_map_iter(|t| render_frame(t).into_iter().map(|v| quantize(v) as u16).collect::<Vec<_>>())
                .collect(),
        ),
    };
    FrameSequence::new(w, h, FrameRate::from_f64(spec.frame_rate)?, pixels)
}

/// Regular grid of equally sized regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionLayout {
    pub origin_x: usize,
    pub origin_y: usize,
    pub cols: usize,
    pub rows: usize,
    pub region_width: usize,
    pub region_height: usize,
    /// Distance between the top-left corners of neighbouring regions.
    pub pitch_x: usize,
    pub pitch_y: usize,
}

impl RegionLayout {
    pub fn regions(&self) -> Vec<Rect> {
        let mut out = Vec::with_capacity(self.cols * self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(Rect::new(
                    self.origin_x + c * self.pitch_x,
                    self.origin_y + r * self.pitch_y,
                    self.region_width,
                    self.region_height,
                ));
            }
        }
        out
    }

    /// Smallest frame holding every region plus `border` pixels all round.
    pub fn frame_size(&self, border: usize) -> (usize, usize) {
        let regions = self.regions();
        let w = regions.iter().map(|r| r.right()).max().unwrap_or(0);
        let h = regions.iter().map(|r| r.bottom()).max().unwrap_or(0);
        (w + border, h + border)
    }
}

/// Arrival time, in frames, of a wavefront moving along `direction` at each
/// region center. Unshifted, so values may be negative.
pub fn plane_wave_delays(direction: (f64, f64), speed_mm_per_frame: f64, regions: &[Rect], pixel_pitch_mm: f64) -> Result<Vec<f64>> {
    let norm = direction.0.hypot(direction.1);
    if !(norm.is_finite() && norm > 1e-12) {
        return Err(Error::InvalidArgument("plane wave direction is zero".into()));
    }
    if !(speed_mm_per_frame.is_finite() && speed_mm_per_frame > 0.0) {
        return Err(Error::InvalidArgument("plane wave speed must be positive".into()));
    }
    if !(pixel_pitch_mm.is_finite() && pixel_pitch_mm > 0.0) {
        return Err(Error::InvalidArgument("pixel pitch must be positive".into()));
    }
    let u = (direction.0 / norm, direction.1 / norm);
    Ok(regions
        .iter()
        .map(|r| {
            let (cx, cy) = r.center();
            (cx * u.0 + cy * u.1) * pixel_pitch_mm / speed_mm_per_frame
        })
        .collect())
}

/// Scene in which every region of `layout` carries `carrier`, delayed by the
/// wavefront arrival time. Delays are shifted so the earliest region has
/// delay 0. Frame size, rate and duration take defaults the caller may edit.
pub fn plane_wave_spec(
    direction: (f64, f64),
    speed_mm_per_frame: f64,
    layout: &RegionLayout,
    carrier: &MotionSeries,
    pixel_pitch_mm: f64,
) -> Result<SceneSpec> {
    let regions = layout.regions();
    if regions.is_empty() {
        return Err(Error::Empty("plane wave layout".into()));
    }
    let delays = plane_wave_delays(direction, speed_mm_per_frame, &regions, pixel_pitch_mm)?;
    let min = delays.iter().cloned().fold(f64::INFINITY, f64::min);
    let (width, height) = layout.frame_size(layout.origin_x.max(layout.origin_y));
    let mut spec = SceneSpec::still(width, height, 2200.0, 2200);
    spec.motion = regions
        .into_iter()
        .zip(delays)
        .map(|(region, d)| MotionTrack {
            region,
            displacement: carrier.clone(),
            delay: d - min,
        })
        .collect();
    Ok(spec)
}
