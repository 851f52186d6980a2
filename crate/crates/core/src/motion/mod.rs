//! Per-shot camera motion and mosaic review images.

mod annotation;
mod mosaic;
mod refine;
mod track;

use std::path::PathBuf;

use thiserror::Error;

pub use annotation::{boxes_for_frame, load_sidecar, slice_annotations, BoundingBox, ForegroundAnnotation};
pub use mosaic::{mosaic_bounds, render_mosaic, Rect, MAX_MOSAIC_AREA};
pub use track::{
    accumulate, track_camera, track_camera_report, HomographyTrack, StepReport, TrackReport, TrackerConfig,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("shot has no frames")]
    EmptyShot,
    #[error("step {index} is not invertible")]
    NonInvertibleStep { index: usize },
    #[error("malformed track: {0}")]
    MalformedTrack(String),
    #[error("{frames} frames but the track has {track} entries")]
    LengthMismatch { frames: usize, track: usize },
    #[error("annotation for frame {frame}: {reason}")]
    InvalidAnnotation { frame: usize, reason: String },
    #[error("cannot read annotation sidecar {path}: {reason}")]
    Sidecar { path: PathBuf, reason: String },
    #[error("mosaic canvas {width}x{height} exceeds {max_area} pixels")]
    MosaicTooLarge { width: u64, height: u64, max_area: u64 },
}
