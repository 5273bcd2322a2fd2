use super::Raster;
use crate::error::{Error, Result};
use crate::image::{luma, GrayImage};

/// 8-bit grayscale, non-interlaced PNG of the image (binary masks as 0/255).
pub fn encode_png_preview<'a>(img: impl Into<Raster<'a>>) -> Vec<u8> {
    let img = img.into();
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().expect("writing to a Vec cannot fail");
        writer
            .write_image_data(&img.gray_bytes())
            .expect("buffer length matches the header");
    }
    out
}

fn png_err(e: png::DecodingError) -> Error {
    Error::CorruptStream(format!("png: {e}"))
}

/// Decode an 8-bit PNG to gray. Color is converted with the standard luma
/// weights; alpha is dropped. 16-bit images are rejected.
pub fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or_else(|| {
        Error::CorruptStream("png: image too large".into())
    })?];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedDepth(65535));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let data = &buf[..info.buffer_size()];
    let stride = info.line_size;
    let channels = info.color_type.samples();
    let mut pixels = Vec::with_capacity(w * h);
    for row in data.chunks(stride).take(h) {
        for px in row[..w * channels].chunks_exact(channels) {
            pixels.push(match info.color_type {
                png::ColorType::Grayscale | png::ColorType::GrayscaleAlpha => px[0],
                png::ColorType::Rgb | png::ColorType::Rgba => luma(px[0], px[1], px[2]),
                png::ColorType::Indexed => {
                    return Err(Error::UnsupportedFormat("unexpanded palette png".into()))
                }
            });
        }
    }
    GrayImage::new(w, h, pixels)
}
