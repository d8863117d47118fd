//! RVID: a headered raw container for uncompressed grayscale video.
//!
//! Layout (little-endian): `"RVID"`, then six `u32` fields: width, height,
//! fps numerator, fps denominator, bit depth (8 or 16), frame count. The
//! payload follows immediately, frame after frame in row-major order with
//! one or two bytes per pixel.

use std::fs;
use std::path::Path;

use super::{BitDepth, FrameRate, FrameSequence, PixelBuffer};
use crate::error::{Error, Result};

pub const RVID_MAGIC: &[u8; 4] = b"RVID";
pub const RVID_HEADER_LEN: usize = 4 + 6 * 4;

pub fn read_rvid(path: impl AsRef<Path>) -> Result<FrameSequence> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

pub fn write_rvid(video: &FrameSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(video)).map_err(|e| Error::io(path, e))
}

pub(crate) fn encode(video: &FrameSequence) -> Vec<u8> {
    let bpp = video.bit_depth().bytes_per_pixel();
    let mut out = Vec::with_capacity(RVID_HEADER_LEN + video.pixels().len() * bpp);
    out.extend_from_slice(RVID_MAGIC);
    let rate = video.frame_rate();
    for field in [
        video.width() as u32,
        video.height() as u32,
        rate.numerator,
        rate.denominator,
        video.bit_depth().bits(),
        video.frame_count() as u32,
    ] {
        out.extend_from_slice(&field.to_le_bytes());
    }
    match video.pixels() {
        PixelBuffer::U8(v) => out.extend_from_slice(v),
        PixelBuffer::U16(v) => v.iter().for_each(|p| out.extend_from_slice(&p.to_le_bytes())),
    }
    out
}

pub(crate) fn decode(bytes: &[u8]) -> Result<FrameSequence> {
    if bytes.len() < RVID_HEADER_LEN {
        return Err(Error::MalformedHeader(format!(
            "file is {} bytes, shorter than the {RVID_HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[..4] != RVID_MAGIC {
        return Err(Error::MalformedHeader("missing RVID magic".into()));
    }
    let field = |i: usize| {
        let at = 4 + 4 * i;
        u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
    };
    let (width, height) = (field(0) as usize, field(1) as usize);
    let (fps_num, fps_den) = (field(2), field(3));
    let depth = BitDepth::from_bits(field(4))?;
    let count = field(5) as usize;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("zero frame size {width}x{height}")));
    }
    let rate = FrameRate::new(fps_num, fps_den)
        .map_err(|_| Error::MalformedHeader(format!("invalid frame rate {fps_num}/{fps_den}")))?;
    if count < 2 {
        return Err(Error::MalformedHeader(format!("frame count {count} below 2")));
    }

    let expected = (width as u64) * (height as u64) * (count as u64) * depth.bytes_per_pixel() as u64;
    let payload = &bytes[RVID_HEADER_LEN..];
    let actual = payload.len() as u64;
    if actual < expected {
        return Err(Error::TruncatedPayload { expected, actual });
    }
    if actual > expected {
        return Err(Error::MalformedHeader(format!(
            "{} trailing bytes after a {expected}-byte payload",
            actual - expected
        )));
    }

    let pixels = match depth {
        BitDepth::Eight => PixelBuffer::U8(payload.to_vec()),
        BitDepth::Sixteen => PixelBuffer::U16(
            payload
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect(),
        ),
    };
    FrameSequence::new(width, height, rate, pixels)
}
