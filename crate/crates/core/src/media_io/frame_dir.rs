//! PNG frame directories: `frame_%06d.png` files plus a `meta.json`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Frame, FrameRate, FrameSequence, MediaError};

pub const META_FILE: &str = "meta.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameDirMeta {
    pub fps_num: u32,
    pub fps_den: u32,
    pub source_id: String,
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

fn parse_frame_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".png")?;
    if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MediaError + '_ {
    move |source| MediaError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_png(path: &Path, index: usize) -> Result<Frame, MediaError> {
    let img = image::open(path)
        .map_err(|source| MediaError::Png {
            path: path.to_path_buf(),
            source,
        })?
        .to_rgb8();
    let (w, h) = img.dimensions();
    Frame::new(w, h, img.into_raw(), index)
}

pub fn write_png(frame: &Frame, path: &Path) -> Result<(), MediaError> {
    let img = image::RgbImage::from_raw(frame.width(), frame.height(), frame.pixels().to_vec())
        .expect("frame buffer matches its dimensions");
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| MediaError::Png {
            path: path.to_path_buf(),
            source,
        })
}

/// Reads a frame directory. Frames are ordered by file index, which must run
/// `0..n` without gaps.
pub fn read_frame_dir(dir: &Path) -> Result<FrameSequence, MediaError> {
    let meta_path = dir.join(META_FILE);
    if !meta_path.is_file() {
        return Err(MediaError::MissingMeta(meta_path));
    }
    let meta_text = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
    let meta: FrameDirMeta = serde_json::from_str(&meta_text).map_err(|e| MediaError::BadMeta {
        path: meta_path.clone(),
        reason: e.to_string(),
    })?;
    let rate = FrameRate::new(meta.fps_num, meta.fps_den).map_err(|e| MediaError::BadMeta {
        path: meta_path.clone(),
        reason: e.to_string(),
    })?;

    let mut indices = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        if let Some(i) = entry.file_name().to_str().and_then(parse_frame_index) {
            indices.push(i);
        }
    }
    indices.sort_unstable();
    for (expected, &found) in indices.iter().enumerate() {
        if found != expected {
            return Err(MediaError::NonConsecutive { expected, found });
        }
    }

    let mut frames: Vec<Frame> = Vec::with_capacity(indices.len());
    for i in indices {
        let frame = read_png(&dir.join(frame_file_name(i)), i)?;
        if let Some(first) = frames.first() {
            if first.dimensions() != frame.dimensions() {
                return Err(MediaError::MixedDimensions {
                    index: i,
                    expected: first.dimensions(),
                    found: frame.dimensions(),
                });
            }
        }
        frames.push(frame);
    }
    FrameSequence::new(frames, rate, meta.source_id)
}

/// Writes `seq` as a frame directory, creating `dir` if needed.
pub fn write_frame_dir(seq: &FrameSequence, dir: &Path) -> Result<(), MediaError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let rate = seq.frame_rate();
    let meta = FrameDirMeta {
        fps_num: rate.num(),
        fps_den: rate.den(),
        source_id: seq.source_id().to_string(),
    };
    let meta_path = dir.join(META_FILE);
    let text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    fs::write(&meta_path, text).map_err(io_err(&meta_path))?;
    for (i, frame) in seq.frames().iter().enumerate() {
        write_png(frame, &dir.join(frame_file_name(i)))?;
    }
    Ok(())
}
