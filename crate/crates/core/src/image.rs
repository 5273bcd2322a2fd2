//! Raster types and the binarization rule.

use crate::error::{Error, Result};
use crate::exec::{for_each_row, Execution};

/// An 8-bit single-channel raster, row-major with the top-left pixel first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// An image where every pixel has value `v`.
    pub fn filled(width: usize, height: usize, v: u8) -> Result<Self> {
        let len = width
            .checked_mul(height)
            .ok_or_else(|| Error::Domain("image dimensions overflow".into()))?;
        Self::new(width, height, vec![v; len])
    }

    /// Build an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        check_dims(width, height, width.saturating_mul(height))?;
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    /// Pixel at column `x`, row `y`.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Smallest and largest gray level present.
    pub fn value_range(&self) -> (u8, u8) {
        self.pixels
            .iter()
            .fold((u8::MAX, u8::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// A two-label mask: 0 is background, 1 is object.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    mask: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, mask: Vec<u8>) -> Result<Self> {
        check_dims(width, height, mask.len())?;
        if let Some(bad) = mask.iter().find(|&&l| l > 1) {
            return Err(Error::Domain(format!("mask label {bad} is not 0 or 1")));
        }
        Ok(BinaryImage {
            width,
            height,
            mask,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[u8] {
        &self.mask
    }

    /// Number of object (1) labels.
    pub fn count_ones(&self) -> usize {
        self.mask.iter().filter(|&&l| l == 1).count()
    }

    /// Labels expanded to displayable gray levels (0 -> 0, 1 -> 255).
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.mask.iter().map(|&l| l * 255).collect(),
        }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Domain(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    match width.checked_mul(height) {
        Some(n) if n == len => Ok(()),
        Some(n) => Err(Error::Domain(format!(
            "{width}x{height} image needs {n} pixels, got {len}"
        ))),
        None => Err(Error::Domain("image dimensions overflow".into())),
    }
}

/// Validate an externally supplied gray level.
pub fn gray_level(t: i64) -> Result<u8> {
    u8::try_from(t).map_err(|_| Error::Domain(format!("threshold {t} outside [0, 255]")))
}

/// Binarize: a pixel is object exactly when its value is strictly greater than `t`.
pub fn apply_threshold(img: &GrayImage, t: u8) -> BinaryImage {
    apply_threshold_with(img, t, Execution::default())
}

pub fn apply_threshold_with(img: &GrayImage, t: u8, exec: Execution) -> BinaryImage {
    let width = img.width;
    let mut mask = vec![0u8; img.pixels.len()];
    for_each_row(exec, &mut mask, width, |y, row| {
        let src = &img.pixels[y * width..(y + 1) * width];
        for (m, &v) in row.iter_mut().zip(src) {
            *m = u8::from(v > t);
        }
    });
    BinaryImage {
        width,
        height: img.height,
        mask,
    }
}

/// Fraction of the image area labelled object.
pub fn foreground_fraction(bin: &BinaryImage) -> f64 {
    bin.count_ones() as f64 / bin.mask.len() as f64
}

/// Fraction of positions where two masks disagree.
pub fn pixel_disagreement(a: &BinaryImage, b: &BinaryImage) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::Domain(format!(
            "mask dimensions differ: {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    let differing = a.mask.iter().zip(&b.mask).filter(|(x, y)| x != y).count();
    Ok(differing as f64 / a.mask.len() as f64)
}

/// Luma conversion with weights 0.299/0.587/0.114, rounded half up.
///
/// Evaluated in integer thousandths so rounding is exact.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b);
    ((weighted + 500) / 1000).min(255) as u8
}

/// Convert interleaved RGB triples to a gray image.
pub fn rgb_to_gray(rgb: &[[u8; 3]], width: usize, height: usize) -> Result<GrayImage> {
    let pixels = rgb.iter().map(|&[r, g, b]| luma(r, g, b)).collect();
    GrayImage::new(width, height, pixels)
}
