//! Image serialization and the comparison report.

mod pgm;
mod png;
mod report;

pub use self::pgm::{read_pgm, write_pgm, PgmEncoding};
pub use self::png::{decode_png, encode_png_preview};
pub use self::report::{round6, write_report, ReportEntry};

use crate::error::{Error, Result};
use crate::image::{BinaryImage, GrayImage};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Decode a PGM (P2/P5) or PNG stream, chosen by its leading bytes.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P") {
        read_pgm(bytes)
    } else if bytes.is_empty() {
        Err(Error::CorruptStream("empty input".into()))
    } else {
        Err(Error::UnsupportedFormat("expected a PGM or PNG stream".into()))
    }
}

/// Either raster type, for encoders that accept both.
#[derive(Debug, Clone, Copy)]
pub enum Raster<'a> {
    Gray(&'a GrayImage),
    Binary(&'a BinaryImage),
}

impl<'a> From<&'a GrayImage> for Raster<'a> {
    fn from(img: &'a GrayImage) -> Self {
        Raster::Gray(img)
    }
}

impl<'a> From<&'a BinaryImage> for Raster<'a> {
    fn from(img: &'a BinaryImage) -> Self {
        Raster::Binary(img)
    }
}

impl Raster<'_> {
    fn width(&self) -> usize {
        match self {
            Raster::Gray(g) => g.width(),
            Raster::Binary(b) => b.width(),
        }
    }

    fn height(&self) -> usize {
        match self {
            Raster::Gray(g) => g.height(),
            Raster::Binary(b) => b.height(),
        }
    }

    /// Displayable gray levels; binary labels expand to 0/255.
    fn gray_bytes(&self) -> std::borrow::Cow<'_, [u8]> {
        match self {
            Raster::Gray(g) => g.pixels().into(),
            Raster::Binary(b) => b.mask().iter().map(|&l| l * 255).collect::<Vec<_>>().into(),
        }
    }
}
