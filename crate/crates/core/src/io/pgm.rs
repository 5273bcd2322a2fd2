use std::fmt::Write as _;

use super::Raster;
use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmEncoding {
    /// P5
    #[default]
    Binary,
    /// P2
    Ascii,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skip whitespace and `#` comments running to end of line.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::CorruptStream(match self.bytes.get(self.pos) {
                None => format!("unexpected end of stream reading {what}"),
                Some(b) => format!("expected {what}, found byte 0x{b:02x}"),
            }));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::CorruptStream(format!("{what} is out of range")))
    }
}

/// Parse a P2 or P5 stream with maxval 255.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let magic = bytes.get(..2).ok_or_else(|| Error::CorruptStream("missing magic".into()))?;
    let ascii = match magic {
        b"P2" => true,
        b"P5" => false,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "magic {:?} is not P2 or P5",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(cur.pos).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(Error::CorruptStream("magic must be followed by whitespace".into()));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedDepth(u32::try_from(maxval).unwrap_or(u32::MAX)));
    }
    if width == 0 || height == 0 {
        return Err(Error::CorruptStream(format!("invalid dimensions {width}x{height}")));
    }
    let len = usize::try_from(width)
        .ok()
        .zip(usize::try_from(height).ok())
        .and_then(|(w, h)| w.checked_mul(h))
        .ok_or_else(|| Error::CorruptStream("dimensions overflow".into()))?;
    let (width, height) = (width as usize, height as usize);

    let pixels = if ascii {
        // Never trust the header for the allocation size.
        let mut pixels = Vec::with_capacity(len.min(bytes.len()));
        for _ in 0..len {
            let v = cur.number("pixel value").map_err(|e| match e {
                Error::CorruptStream(m) => Error::CorruptStream(format!("truncated pixel data: {m}")),
                e => e,
            })?;
            if v > 255 {
                return Err(Error::CorruptStream(format!("pixel value {v} exceeds maxval")));
            }
            pixels.push(v as u8);
        }
        pixels
    } else {
        // Exactly one whitespace byte separates maxval from the raster.
        match cur.bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(Error::CorruptStream("missing separator after maxval".into())),
        }
        let data = &bytes[cur.pos..];
        if data.len() < len {
            return Err(Error::CorruptStream(format!(
                "truncated pixel data: need {len} bytes, have {}",
                data.len()
            )));
        }
        data[..len].to_vec()
    };
    GrayImage::new(width, height, pixels)
}

/// Encode as PGM. The P5 header is exactly `P5\n<w> <h>\n255\n`.
pub fn write_pgm<'a>(img: impl Into<Raster<'a>>, encoding: PgmEncoding) -> Vec<u8> {
    let img = img.into();
    let (w, h) = (img.width(), img.height());
    let data = img.gray_bytes();
    match encoding {
        PgmEncoding::Binary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(&data);
            out
        }
        PgmEncoding::Ascii => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in data.chunks(w) {
                for (i, v) in row.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    let _ = write!(out, "{v}");
                }
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}
