//! Animated GIF with one global median-cut palette shared by all frames.

use std::borrow::Cow;
use std::collections::HashMap;
use std::path::Path;

use gif::{ColorOutput, DecodeOptions, Encoder, Frame, Repeat};

use super::{write_file, EncodeError};
use crate::render::Image;

/// Upper bound on the number of pixels fed to the palette builder.
const MAX_PALETTE_SAMPLES: usize = 1 << 18;
const PALETTE_SIZE: usize = 256;

const BAYER4: [[u8; 4]; 4] = [[0, 8, 2, 10], [12, 4, 14, 6], [3, 11, 1, 9], [15, 7, 13, 5]];
/// Peak-to-peak amplitude of the ordered-dither offset, in 8-bit levels.
const DITHER_AMPLITUDE: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GifOptions {
    /// Ordered 4x4 Bayer dithering before palette lookup.
    pub dither: bool,
}

struct ColorBox {
    colors: Vec<[u8; 3]>,
}

impl ColorBox {
    /// Widest channel and its range.
    fn widest(&self) -> (usize, u8) {
        let mut best = (0, 0);
        for ch in 0..3 {
            let (lo, hi) = self.colors.iter().fold((u8::MAX, 0u8), |(lo, hi), c| (lo.min(c[ch]), hi.max(c[ch])));
            let range = hi.saturating_sub(lo);
            if range > best.1 {
                best = (ch, range);
            }
        }
        best
    }

    fn mean(&self) -> [u8; 3] {
        let mut sum = [0u64; 3];
        for c in &self.colors {
            for ch in 0..3 {
                sum[ch] += c[ch] as u64;
            }
        }
        let n = self.colors.len() as u64;
        sum.map(|s| ((s + n / 2) / n) as u8)
    }
}

/// Median-cut palette of at most `max_colors` entries for the given pixels:
/// repeatedly split the box with the largest channel range at its median.
pub fn median_cut(pixels: &[[u8; 3]], max_colors: usize) -> Vec<[u8; 3]> {
    if pixels.is_empty() {
        return vec![[0, 0, 0]];
    }
    let mut boxes = vec![ColorBox { colors: pixels.to_vec() }];
    while boxes.len() < max_colors {
        let Some((idx, ch)) = boxes
            .iter()
            .enumerate()
            .map(|(i, b)| (i, b.widest()))
            .filter(|(_, (_, range))| *range > 0)
            .max_by_key(|(i, (_, range))| (*range, std::cmp::Reverse(*i)))
            .map(|(i, (ch, _))| (i, ch))
        else {
            break;
        };
        let mut colors = std::mem::take(&mut boxes[idx].colors);
        colors.sort_unstable_by_key(|c| (c[ch], c[(ch + 1) % 3], c[(ch + 2) % 3]));
        let mut mid = colors.len() / 2;
        // keep equal values of the split channel on one side
        let pivot = colors[mid][ch];
        if colors[0][ch] == pivot {
            while mid < colors.len() && colors[mid][ch] == pivot {
                mid += 1;
            }
        } else {
            while mid > 0 && colors[mid - 1][ch] == pivot {
                mid -= 1;
            }
        }
        let upper = colors.split_off(mid);
        boxes[idx].colors = colors;
        boxes.push(ColorBox { colors: upper });
    }
    boxes.iter().map(ColorBox::mean).collect()
}

fn nearest(palette: &[[u8; 3]], c: [u8; 3]) -> u8 {
    let mut best = (u32::MAX, 0usize);
    for (i, p) in palette.iter().enumerate() {
        let d: u32 = (0..3)
            .map(|ch| {
                let diff = p[ch] as i32 - c[ch] as i32;
                (diff * diff) as u32
            })
            .sum();
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1 as u8
}

/// Frames mapped onto a shared palette.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedFrames {
    pub width: u32,
    pub height: u32,
    pub palette: Vec<[u8; 3]>,
    pub indices: Vec<Vec<u8>>,
}

fn check_frames(frames: &[Image]) -> Result<(u32, u32), EncodeError> {
    if frames.len() < 2 {
        return Err(EncodeError::TooFewFrames { found: frames.len() });
    }
    let dims = (frames[0].width, frames[0].height);
    for (index, f) in frames.iter().enumerate() {
        if (f.width, f.height) != dims {
            return Err(EncodeError::DimensionMismatch { index, expected: dims, found: (f.width, f.height) });
        }
    }
    if dims.0 > u16::MAX as u32 || dims.1 > u16::MAX as u32 {
        return Err(EncodeError::TooLarge { width: dims.0, height: dims.1 });
    }
    Ok(dims)
}

/// Builds the global palette from a uniform sample of every frame and maps each pixel to it.
pub fn quantize(frames: &[Image], opts: GifOptions) -> Result<IndexedFrames, EncodeError> {
    let (width, height) = check_frames(frames)?;
    let per_frame = width as usize * height as usize;
    let total = per_frame * frames.len();
    let stride = total.div_ceil(MAX_PALETTE_SAMPLES).max(1);
    let sample: Vec<[u8; 3]> = (0..total)
        .step_by(stride)
        .map(|i| {
            let f = &frames[i / per_frame];
            let p = 3 * (i % per_frame);
            [f.pixels[p], f.pixels[p + 1], f.pixels[p + 2]]
        })
        .collect();
    let palette = median_cut(&sample, PALETTE_SIZE);

    let mut memo: HashMap<[u8; 3], u8> = HashMap::new();
    let mut indices = Vec::with_capacity(frames.len());
    for f in frames {
        let mut idx = Vec::with_capacity(per_frame);
        for (i, px) in f.pixels.chunks_exact(3).enumerate() {
            let mut c = [px[0], px[1], px[2]];
            if opts.dither {
                let (x, y) = (i % width as usize, i / width as usize);
                let offset = ((BAYER4[y % 4][x % 4] as f64 + 0.5) / 16.0 - 0.5) * DITHER_AMPLITUDE;
                c = c.map(|v| (v as f64 + offset).round().clamp(0.0, 255.0) as u8);
            }
            let k = *memo.entry(c).or_insert_with(|| nearest(&palette, c));
            idx.push(k);
        }
        indices.push(idx);
    }
    Ok(IndexedFrames { width, height, palette, indices })
}

/// Encodes a looping GIF89a with a global color table and `delay_cs` per frame.
pub fn encode_gif(frames: &[Image], delay_cs: u16, opts: GifOptions) -> Result<Vec<u8>, EncodeError> {
    let q = quantize(frames, opts)?;
    let mut table: Vec<u8> = q.palette.iter().flatten().copied().collect();
    table.resize(3 * PALETTE_SIZE, 0);
    let gif_err = |e: gif::EncodingError| EncodeError::Gif(e.to_string());
    let mut out = Vec::new();
    {
        let mut enc = Encoder::new(&mut out, q.width as u16, q.height as u16, &table).map_err(gif_err)?;
        enc.set_repeat(Repeat::Infinite).map_err(gif_err)?;
        for idx in &q.indices {
            let frame = Frame {
                width: q.width as u16,
                height: q.height as u16,
                delay: delay_cs,
                buffer: Cow::Borrowed(idx),
                ..Frame::default()
            };
            enc.write_frame(&frame).map_err(gif_err)?;
        }
    }
    Ok(out)
}

pub fn write_gif(frames: &[Image], path: &Path, delay_cs: u16, opts: GifOptions) -> Result<(), EncodeError> {
    write_file(path, &encode_gif(frames, delay_cs, opts)?)
}

/// What a decoder sees in a GIF, for checking the encoder.
#[derive(Debug, Clone)]
pub struct DecodedGif {
    pub frames: Vec<Image>,
    pub delays: Vec<u16>,
    pub loops_forever: bool,
    pub global_palette_len: usize,
}

impl DecodedGif {
    /// Total loop duration in seconds.
    pub fn duration(&self) -> f64 {
        self.delays.iter().map(|&d| d as f64).sum::<f64>() / 100.0
    }
}

pub fn decode_gif(bytes: &[u8]) -> Result<DecodedGif, EncodeError> {
    let mut opts = DecodeOptions::new();
    opts.set_color_output(ColorOutput::RGBA);
    let gif_err = |e: gif::DecodingError| EncodeError::Gif(e.to_string());
    let mut dec = opts.read_info(bytes).map_err(gif_err)?;
    let global_palette_len = dec.global_palette().map_or(0, |p| p.len() / 3);
    let mut frames = Vec::new();
    let mut delays = Vec::new();
    while let Some(f) = dec.read_next_frame().map_err(gif_err)? {
        let rgb = f.buffer.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect();
        let img = Image::from_pixels(f.width as u32, f.height as u32, rgb)
            .ok_or_else(|| EncodeError::Gif("frame buffer size mismatch".into()))?;
        delays.push(f.delay);
        frames.push(img);
    }
    Ok(DecodedGif { frames, delays, loops_forever: dec.repeat() == Repeat::Infinite, global_palette_len })
}
