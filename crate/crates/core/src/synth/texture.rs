use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video::Rect;

/// Base intensity pattern, in normalized units (0 = black, 1 = full scale).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TextureKind {
    /// Gaussian-smoothed white noise rescaled to `mean` and standard
    /// deviation `contrast`. Without a seed the render seed is used.
    Noise {
        smoothing_px: f64,
        mean: f64,
        contrast: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Overlay {
    Fill { region: Rect, value: f64 },
    /// Smooth step from `low` to `high` across the middle of `region`.
    /// `axis` "x" varies along x (a vertical edge), "y" along y.
    Edge {
        region: Rect,
        axis: String,
        low: f64,
        high: f64,
        width_px: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextureSpec {
    pub kind: TextureKind,
    #[serde(default)]
    pub overlays: Vec<Overlay>,
}

impl Default for TextureSpec {
    fn default() -> Self {
        TextureSpec {
            kind: TextureKind::Noise {
                smoothing_px: 2.5,
                mean: 0.5,
                contrast: 0.15,
                seed: None,
            },
            overlays: Vec::new(),
        }
    }
}

impl TextureSpec {
    pub fn constant(value: f64) -> Self {
        TextureSpec {
            kind: TextureKind::Constant { value },
            overlays: Vec::new(),
        }
    }

    pub(crate) fn validate(&self, width: usize, height: usize) -> Result<()> {
        match &self.kind {
            TextureKind::Noise {
                smoothing_px,
                mean,
                contrast,
                ..
            } => {
                if !(smoothing_px.is_finite() && *smoothing_px >= 0.0 && mean.is_finite() && contrast.is_finite() && *contrast >= 0.0) {
                    return Err(Error::InvalidArgument("invalid noise texture parameters".into()));
                }
            }
            TextureKind::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::InvalidArgument("texture value must be finite".into()));
                }
            }
        }
        for o in &self.overlays {
            let region = match o {
                Overlay::Fill { region, .. } => region,
                Overlay::Edge { region, axis, width_px, .. } => {
                    if axis != "x" && axis != "y" {
                        return Err(Error::InvalidArgument(format!("edge axis must be \"x\" or \"y\", got {axis:?}")));
                    }
                    if !(width_px.is_finite() && *width_px > 0.0) {
                        return Err(Error::InvalidArgument("edge width must be positive".into()));
                    }
                    region
                }
            };
            if region.right() > width || region.bottom() > height {
                return Err(Error::RegionOutOfBounds(format!("overlay {region:?} outside {width}x{height} frame")));
            }
        }
        Ok(())
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (4.0 * sigma).ceil().max(1.0) as i64;
    let k: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

fn smoothed_noise(width: usize, height: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if sigma <= 0.0 {
        return (0..width * height).map(|_| StandardNormal.sample(&mut rng)).collect();
    }
    let kernel = gaussian_kernel(sigma);
    let r = kernel.len() / 2;
    let (pw, ph) = (width + 2 * r, height + 2 * r);
    let raw: Vec<f64> = (0..pw * ph).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut rows = vec![0.0; ph * width];
    for y in 0..ph {
        for x in 0..width {
            rows[y * width + x] = kernel.iter().enumerate().map(|(k, w)| w * raw[y * pw + x + k]).sum();
        }
    }
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = kernel.iter().enumerate().map(|(k, w)| w * rows[(y + k) * width + x]).sum();
        }
    }
    out
}

/// Texture values in [0, 1], row-major.
pub fn generate_texture(spec: &TextureSpec, width: usize, height: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate(width, height)?;
    let mut tex = match &spec.kind {
        TextureKind::Constant { value } => vec![*value; width * height],
        TextureKind::Noise {
            smoothing_px,
            mean,
            contrast,
            seed: own,
        } => {
            let mut z = smoothed_noise(width, height, *smoothing_px, own.unwrap_or(seed));
            let n = z.len() as f64;
            let m = z.iter().sum::<f64>() / n;
            let sd = (z.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
            let scale = if sd > 0.0 { contrast / sd } else { 0.0 };
            z.iter_mut().for_each(|v| *v = mean + (*v - m) * scale);
            z
        }
    };
    for o in &spec.overlays {
        match o {
            Overlay::Fill { region, value } => {
                for y in region.y..region.bottom() {
                    tex[y * width + region.x..][..region.width].fill(*value);
                }
            }
            Overlay::Edge {
                region,
                axis,
                low,
                high,
                width_px,
            } => {
                let (cx, cy) = region.center();
                for y in region.y..region.bottom() {
                    for x in region.x..region.right() {
                        let s = if axis == "x" { x as f64 + 0.5 - cx } else { y as f64 + 0.5 - cy };
                        tex[y * width + x] = low + (high - low) / (1.0 + (-s / width_px).exp());
                    }
                }
            }
        }
    }
    tex.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Ok(tex)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_texture_statistics() {
        let tex = generate_texture(&TextureSpec::default(), 64, 64, 5).unwrap();
        let n = tex.len() as f64;
        let m = tex.iter().sum::<f64>() / n;
        let sd = (tex.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
        assert!((m - 0.5).abs() < 0.01, "{m}");
        assert!((sd - 0.15).abs() < 0.01, "{sd}");
        assert_eq!(tex, generate_texture(&TextureSpec::default(), 64, 64, 5).unwrap());
        assert_ne!(tex, generate_texture(&TextureSpec::default(), 64, 64, 6).unwrap());
    }

    #[test]
    fn explicit_seed_overrides_render_seed() {
        let spec = TextureSpec {
            kind: TextureKind::Noise {
                smoothing_px: 1.0,
                mean: 0.5,
                contrast: 0.1,
                seed: Some(42),
            },
            overlays: vec![],
        };
        assert_eq!(generate_texture(&spec, 8, 8, 1).unwrap(), generate_texture(&spec, 8, 8, 2).unwrap());
    }

    #[test]
    fn overlays() {
        let spec = TextureSpec {
            kind: TextureKind::Constant { value: 0.2 },
            overlays: vec![
                Overlay::Fill {
                    region: Rect::new(0, 0, 2, 2),
                    value: 0.9,
                },
                Overlay::Edge {
                    region: Rect::new(4, 0, 4, 8),
                    axis: "x".into(),
                    low: 0.0,
                    high: 1.0,
                    width_px: 0.5,
                },
            ],
        };
        let t = generate_texture(&spec, 8, 8, 0).unwrap();
        assert_eq!(t[0], 0.9);
        assert_eq!(t[8 * 3 + 3], 0.2);
        assert!(t[4] < 0.1 && t[7] > 0.9);
        assert!((t[5] + t[6] - 1.0).abs() < 1e-12);
    }
}
