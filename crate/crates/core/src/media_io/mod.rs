//! Frame types and the only code that touches media bytes on disk.

mod color;
mod frame;
mod frame_dir;
mod y4m;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use color::{luma, luma_of, mean_luma, rgb_to_yuv, yuv_to_rgb};
pub use frame::{Frame, FrameRate, FrameSequence, LumaImage};
pub use frame_dir::{frame_file_name, read_frame_dir, read_png, write_frame_dir, write_png, FrameDirMeta, META_FILE};
pub use y4m::{parse_y4m, parse_y4m_with_id, read_y4m_file, write_y4m, write_y4m_file, Colorspace};

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("malformed Y4M header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },
    #[error("unsupported Y4M colorspace `C{tag}` at byte {offset}")]
    UnsupportedColorspace { offset: usize, tag: String },
    #[error("malformed Y4M frame record at byte {offset}: {reason}")]
    MalformedFrame { offset: usize, reason: String },
    #[error("truncated Y4M frame at byte {offset}: need {expected} bytes, {available} available")]
    TruncatedFrame {
        offset: usize,
        expected: usize,
        available: usize,
    },
    #[error("missing frame directory metadata {0}")]
    MissingMeta(PathBuf),
    #[error("invalid metadata {path}: {reason}")]
    BadMeta { path: PathBuf, reason: String },
    #[error("frame indices not consecutive: expected {expected}, found {found}")]
    NonConsecutive { expected: usize, found: usize },
    #[error("frame {index} is {found:?}, expected {expected:?}")]
    MixedDimensions {
        index: usize,
        expected: (u32, u32),
        found: (u32, u32),
    },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("cannot encode an empty sequence")]
    EmptySequence,
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("PNG error on {path}: {source}")]
    Png {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

/// Opens a clip from either a `.y4m` file or a PNG frame directory.
pub fn read_clip(path: &Path) -> Result<FrameSequence, MediaError> {
    if path.is_dir() {
        read_frame_dir(path)
    } else {
        read_y4m_file(path)
    }
}
