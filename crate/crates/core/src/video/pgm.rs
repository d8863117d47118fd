//! Binary (P5) PGM reading and writing.

use std::fs;
use std::path::{Path, PathBuf};

use super::{BitDepth, FrameRate, FrameSequence, PixelBuffer};
use crate::error::{Error, Result};

/// One decoded grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

impl PgmImage {
    pub fn bit_depth(&self) -> BitDepth {
        if self.maxval > 255 {
            BitDepth::Sixteen
        } else {
            BitDepth::Eight
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("expected a number at byte {start}")))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<PgmImage> {
    match bytes.get(..2) {
        Some(b"P5") => {}
        Some(b"P6") | Some(b"P3") => {
            return Err(Error::InvalidArgument("color PPM input is not supported".into()))
        }
        _ => return Err(Error::MalformedHeader("not a binary P5 PGM".into())),
    }
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number()?;
    let height = cur.number()?;
    let maxval = cur.number()?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("zero image size".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::MalformedHeader(format!("maxval {maxval} out of range")));
    }
    // exactly one whitespace byte separates the header from the raster
    if !cur.bytes.get(cur.pos).is_some_and(|c| c.is_ascii_whitespace()) {
        return Err(Error::MalformedHeader("missing raster separator".into()));
    }
    let raster = &bytes[cur.pos + 1..];
    let bpp = if maxval > 255 { 2 } else { 1 };
    let expected = width * height * bpp;
    if raster.len() < expected {
        return Err(Error::TruncatedPayload {
            expected: expected as u64,
            actual: raster.len() as u64,
        });
    }
    let pixels = if bpp == 1 {
        raster[..expected].iter().map(|&p| p as u16).collect()
    } else {
        raster[..expected]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    Ok(PgmImage {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}

pub fn encode_pgm(image: &PgmImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", image.width, image.height, image.maxval).into_bytes();
    if image.maxval > 255 {
        image.pixels.iter().for_each(|p| out.extend_from_slice(&p.to_be_bytes()));
    } else {
        out.extend(image.pixels.iter().map(|&p| p as u8));
    }
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<PgmImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes)
}

pub fn write_pgm(image: &PgmImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image)).map_err(|e| Error::io(path, e))
}

/// Loads every `*.pgm` file in `dir`, ordered by file name.
pub fn read_image_sequence(dir: impl AsRef<Path>, frame_rate: FrameRate) -> Result<FrameSequence> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    if paths.is_empty() {
        return Err(Error::Empty(format!("no PGM files in {}", dir.display())));
    }
    paths.sort();

    let images = paths.iter().map(read_pgm).collect::<Result<Vec<_>>>()?;
    let (w, h) = (images[0].width, images[0].height);
    let depth = images[0].bit_depth();
    for (img, path) in images.iter().zip(&paths) {
        if (img.width, img.height) != (w, h) {
            return Err(Error::SizeMismatch {
                expected: (w, h),
                found: (img.width, img.height),
                context: path.display().to_string(),
            });
        }
        if img.bit_depth() != depth {
            return Err(Error::InvalidArgument(format!(
                "{} has bit depth {} but the sequence started at {}",
                path.display(),
                img.bit_depth().bits(),
                depth.bits()
            )));
        }
    }
    let pixels = match depth {
        BitDepth::Eight => PixelBuffer::U8(images.iter().flat_map(|i| i.pixels.iter().map(|&p| p as u8)).collect()),
        BitDepth::Sixteen => PixelBuffer::U16(images.into_iter().flat_map(|i| i.pixels).collect()),
    };
    FrameSequence::new(w, h, frame_rate, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_with_comments() {
        let mut bytes = b"P5\n# made by hand\n2 1\n# max\n255\n".to_vec();
        bytes.extend_from_slice(&[9, 200]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!((img.width, img.height, img.maxval), (2, 1, 255));
        assert_eq!(img.pixels, vec![9, 200]);
    }

    #[test]
    fn sixteen_bit_is_big_endian() {
        let img = PgmImage {
            width: 1,
            height: 2,
            maxval: 65535,
            pixels: vec![0x0102, 0xfffe],
        };
        let bytes = encode_pgm(&img);
        assert!(bytes.ends_with(&[0x01, 0x02, 0xff, 0xfe]));
        let back = decode_pgm(&bytes).unwrap();
        assert_eq!(back, img);
        assert_eq!(back.bit_depth(), BitDepth::Sixteen);
    }

    #[test]
    fn color_and_ascii_rejected() {
        assert!(matches!(decode_pgm(b"P6\n1 1\n255\n\0\0\0"), Err(Error::InvalidArgument(_))));
        assert!(matches!(decode_pgm(b"P2\n1 1\n255\n0"), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn short_raster() {
        assert!(matches!(
            decode_pgm(b"P5 2 2 255\n\0\0"),
            Err(Error::TruncatedPayload { expected: 4, actual: 2 })
        ));
    }
}
