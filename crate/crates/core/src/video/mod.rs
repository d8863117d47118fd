//! Frame containers and file formats: the raw RVID container, binary PGM
//! image sequences and 16-bit PCM WAV output.

mod pgm;
mod rvid;
mod wav;

use serde::{Deserialize, Serialize};

pub use pgm::{read_image_sequence, read_pgm, write_pgm, PgmImage};
pub use rvid::{read_rvid, write_rvid, RVID_HEADER_LEN, RVID_MAGIC};
pub use wav::{read_wav, write_wav};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exact frame rate as a ratio of two integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRate {
    pub numerator: u32,
    pub denominator: u32,
}

impl FrameRate {
    pub fn new(numerator: u32, denominator: u32) -> Result<Self> {
        if numerator == 0 || denominator == 0 {
            return Err(Error::InvalidArgument(format!(
                "frame rate {numerator}/{denominator} must be positive"
            )));
        }
        Ok(FrameRate {
            numerator,
            denominator,
        })
    }

    pub fn from_hz(hz: u32) -> Result<Self> {
        Self::new(hz, 1)
    }

    pub fn hz(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Whole rates are kept exact; others are rounded to 1/1000 Hz.
    pub fn from_f64(hz: f64) -> Result<Self> {
        if !(hz.is_finite() && hz > 0.0 && hz * 1000.0 <= u32::MAX as f64) {
            return Err(Error::InvalidArgument(format!("frame rate {hz} Hz not representable")));
        }
        if hz.fract() == 0.0 {
            Self::from_hz(hz as u32)
        } else {
            Self::new((hz * 1000.0).round() as u32, 1000)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            8 => Ok(BitDepth::Eight),
            16 => Ok(BitDepth::Sixteen),
            other => Err(Error::UnsupportedBitDepth(other)),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    pub fn bytes_per_pixel(self) -> usize {
        match self {
            BitDepth::Eight => 1,
            BitDepth::Sixteen => 2,
        }
    }

    pub fn max_value(self) -> u32 {
        (1u32 << self.bits()) - 1
    }
}

/// Pixel storage for all frames, concatenated frame after frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PixelBuffer {
    U8(Vec<u8>),
    U16(Vec<u16>),
}

impl PixelBuffer {
    pub fn len(&self) -> usize {
        match self {
            PixelBuffer::U8(v) => v.len(),
            PixelBuffer::U16(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bit_depth(&self) -> BitDepth {
        match self {
            PixelBuffer::U8(_) => BitDepth::Eight,
            PixelBuffer::U16(_) => BitDepth::Sixteen,
        }
    }
}

/// Grayscale intensity sample.
pub trait Pixel: Copy + Send + Sync + 'static {
    const BIT_DEPTH: BitDepth;

    fn to_i32(self) -> i32;

    fn to_real<T: Real>(self) -> T;

    fn slice(buffer: &PixelBuffer) -> Option<&[Self]>;
}

impl Pixel for u8 {
    const BIT_DEPTH: BitDepth = BitDepth::Eight;

    #[inline(always)]
    fn to_i32(self) -> i32 {
        self as i32
    }

    #[inline(always)]
    fn to_real<T: Real>(self) -> T {
        T::from_u8(self).unwrap_or_else(T::zero)
    }

    fn slice(buffer: &PixelBuffer) -> Option<&[Self]> {
        match buffer {
            PixelBuffer::U8(v) => Some(v),
            PixelBuffer::U16(_) => None,
        }
    }
}

impl Pixel for u16 {
    const BIT_DEPTH: BitDepth = BitDepth::Sixteen;

    #[inline(always)]
    fn to_i32(self) -> i32 {
        self as i32
    }

    #[inline(always)]
    fn to_real<T: Real>(self) -> T {
        T::from_u16(self).unwrap_or_else(T::zero)
    }

    fn slice(buffer: &PixelBuffer) -> Option<&[Self]> {
        match buffer {
            PixelBuffer::U16(v) => Some(v),
            PixelBuffer::U8(_) => None,
        }
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Rect {
            x,
            y,
            width,
            height,
        }
    }

    pub fn right(&self) -> usize {
        self.x + self.width
    }

    pub fn bottom(&self) -> usize {
        self.y + self.height
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.width as f64 / 2.0,
            self.y as f64 + self.height as f64 / 2.0,
        )
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    /// Grows the rectangle by `margin` on every side, if it stays inside
    /// a `width` x `height` frame.
    pub fn expand_within(&self, margin: usize, width: usize, height: usize) -> Option<Rect> {
        if self.x < margin || self.y < margin {
            return None;
        }
        let r = Rect::new(
            self.x - margin,
            self.y - margin,
            self.width + 2 * margin,
            self.height + 2 * margin,
        );
        (r.right() <= width && r.bottom() <= height).then_some(r)
    }
}

/// Borrowed rectangular view into a row-major pixel grid.
#[derive(Debug, Clone, Copy)]
pub struct Patch<'a, P> {
    data: &'a [P],
    stride: usize,
    width: usize,
    height: usize,
}

impl<'a, P: Copy> Patch<'a, P> {
    /// View over a dense `width` x `height` grid.
    pub fn new(data: &'a [P], width: usize, height: usize) -> Result<Self> {
        Self::with_stride(data, width, width, height)
    }

    pub fn with_stride(data: &'a [P], stride: usize, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Empty("patch has no pixels".into()));
        }
        if width > stride || data.len() < stride * (height - 1) + width {
            return Err(Error::InvalidArgument(format!(
                "patch {width}x{height} (stride {stride}) does not fit {} samples",
                data.len()
            )));
        }
        Ok(Patch {
            data,
            stride,
            width,
            height,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline(always)]
    pub fn row(&self, y: usize) -> &'a [P] {
        let start = y * self.stride;
        &self.data[start..start + self.width]
    }

    #[inline(always)]
    pub fn get(&self, x: usize, y: usize) -> P {
        self.data[y * self.stride + x]
    }

    /// Sub-view; panics if the rectangle leaves the patch.
    pub fn sub(&self, rect: Rect) -> Patch<'a, P> {
        assert!(rect.right() <= self.width && rect.bottom() <= self.height);
        assert!(rect.width > 0 && rect.height > 0);
        let start = rect.y * self.stride + rect.x;
        Patch {
            data: &self.data[start..],
            stride: self.stride,
            width: rect.width,
            height: rect.height,
        }
    }

    pub fn to_vec(&self) -> Vec<P> {
        (0..self.height).flat_map(|y| self.row(y).iter().copied()).collect()
    }
}

/// Ordered grayscale frames with frame-rate metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSequence {
    width: usize,
    height: usize,
    frame_rate: FrameRate,
    pixels: PixelBuffer,
}

impl FrameSequence {
    pub fn new(width: usize, height: usize, frame_rate: FrameRate, pixels: PixelBuffer) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Empty("frames have zero area".into()));
        }
        FrameRate::new(frame_rate.numerator, frame_rate.denominator)?;
        let area = width * height;
        if pixels.len() % area != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} pixels is not a whole number of {width}x{height} frames",
                pixels.len()
            )));
        }
        let count = pixels.len() / area;
        if count < 2 {
            return Err(Error::InvalidArgument(format!(
                "a frame sequence needs at least 2 frames, got {count}"
            )));
        }
        Ok(FrameSequence {
            width,
            height,
            frame_rate,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frame_rate(&self) -> FrameRate {
        self.frame_rate
    }

    pub fn bit_depth(&self) -> BitDepth {
        self.pixels.bit_depth()
    }

    pub fn frame_count(&self) -> usize {
        self.pixels.len() / (self.width * self.height)
    }

    pub fn pixels(&self) -> &PixelBuffer {
        &self.pixels
    }

    /// Whole frame `t` as a patch, if the storage type is `P`.
    pub fn frame<P: Pixel>(&self, t: usize) -> Option<Patch<'_, P>> {
        let area = self.width * self.height;
        let data = P::slice(&self.pixels)?;
        let frame = data.get(t * area..(t + 1) * area)?;
        Some(Patch {
            data: frame,
            stride: self.width,
            width: self.width,
            height: self.height,
        })
    }

    /// Intensity of pixel (x, y) in frame `t`, widened to `u32`.
    pub fn intensity(&self, t: usize, x: usize, y: usize) -> u32 {
        let idx = t * self.width * self.height + y * self.width + x;
        match &self.pixels {
            PixelBuffer::U8(v) => v[idx] as u32,
            PixelBuffer::U16(v) => v[idx] as u32,
        }
    }

    /// Keeps frames `start..end`.
    pub fn slice_frames(&self, start: usize, end: usize) -> Result<FrameSequence> {
        let area = self.width * self.height;
        if end > self.frame_count() || start >= end {
            return Err(Error::InvalidArgument(format!(
                "frame range {start}..{end} outside 0..{}",
                self.frame_count()
            )));
        }
        let pixels = match &self.pixels {
            PixelBuffer::U8(v) => PixelBuffer::U8(v[start * area..end * area].to_vec()),
            PixelBuffer::U16(v) => PixelBuffer::U16(v[start * area..end * area].to_vec()),
        };
        FrameSequence::new(self.width, self.height, self.frame_rate, pixels)
    }
}
