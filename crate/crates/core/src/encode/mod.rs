//! PNG frames and the packaged animated GIF.

mod gif;
mod png;

use std::path::PathBuf;

use thiserror::Error;

pub use self::gif::{decode_gif, encode_gif, median_cut, quantize, write_gif, DecodedGif, GifOptions, IndexedFrames};
pub use self::png::{decode_png, encode_png, write_png};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("png: {0}")]
    Png(String),
    #[error("gif: {0}")]
    Gif(String),
    #[error("frame {index} is {found:?}, expected {expected:?}")]
    DimensionMismatch { index: usize, expected: (u32, u32), found: (u32, u32) },
    #[error("an animation needs at least 2 frames, got {found}")]
    TooFewFrames { found: usize },
    #[error("image of {width}x{height} exceeds the format limit")]
    TooLarge { width: u32, height: u32 },
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<(), EncodeError> {
    std::fs::write(path, bytes).map_err(|source| EncodeError::Io { path: path.to_path_buf(), source })
}
