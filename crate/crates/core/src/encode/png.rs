use std::io::Cursor;
use std::path::Path;

use png::{BitDepth, ColorType, DeflateCompression, Encoder, Filter};

use super::{write_file, EncodeError};
use crate::render::Image;

/// 8-bit RGB, non-interlaced. Filter and deflate level are pinned so identical
/// images always encode to identical bytes.
pub fn encode_png(img: &Image) -> Result<Vec<u8>, EncodeError> {
    let mut out = Vec::new();
    {
        let mut enc = Encoder::new(&mut out, img.width, img.height);
        enc.set_color(ColorType::Rgb);
        enc.set_depth(BitDepth::Eight);
        enc.set_filter(Filter::Paeth);
        enc.set_deflate_compression(DeflateCompression::Level(6));
        let mut writer = enc.write_header().map_err(|e| EncodeError::Png(e.to_string()))?;
        writer.write_image_data(&img.pixels).map_err(|e| EncodeError::Png(e.to_string()))?;
        writer.finish().map_err(|e| EncodeError::Png(e.to_string()))?;
    }
    Ok(out)
}

pub fn write_png(img: &Image, path: &Path) -> Result<(), EncodeError> {
    write_file(path, &encode_png(img)?)
}

/// Decodes an 8-bit RGB or RGBA PNG; alpha is dropped.
pub fn decode_png(bytes: &[u8]) -> Result<Image, EncodeError> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| EncodeError::Png(e.to_string()))?;
    let size = reader.output_buffer_size().ok_or_else(|| EncodeError::Png("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| EncodeError::Png(e.to_string()))?;
    buf.truncate(info.buffer_size());
    let pixels = match (info.color_type, info.bit_depth) {
        (ColorType::Rgb, BitDepth::Eight) => buf,
        (ColorType::Rgba, BitDepth::Eight) => buf.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
        other => return Err(EncodeError::Png(format!("unsupported layout {other:?}"))),
    };
    Image::from_pixels(info.width, info.height, pixels).ok_or_else(|| EncodeError::Png("truncated image".into()))
}
