//! Shot boundaries from colour-histogram distances, and scene grouping by
//! keypoint matching.

mod boundaries;
mod histogram;
mod scenes;

use std::path::Path;

use thiserror::Error;

pub use boundaries::{
    detect_boundaries, detect_shots, shots_from_boundaries, FrameSignals, Shot, ShotDetectParams, Transition,
};
pub use histogram::{color_histogram, hist_distance, Histogram, BINS_PER_CHANNEL, HISTOGRAM_BINS};
pub use scenes::{group_scenes, representative_frames};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShotError {
    #[error("sequence has no frames")]
    EmptySequence,
    #[error("invalid shot detection parameters: {0}")]
    InvalidParams(String),
    #[error("shot list: {0}")]
    ShotList(String),
}

pub fn shots_to_json(shots: &[Shot]) -> String {
    serde_json::to_string_pretty(shots).expect("shots serialize")
}

/// Parses a shot list and checks that it tiles `[0, len)`.
pub fn shots_from_json(text: &str, len: usize) -> Result<Vec<Shot>, ShotError> {
    let shots: Vec<Shot> = serde_json::from_str(text).map_err(|e| ShotError::ShotList(e.to_string()))?;
    check_tiling(&shots, len)?;
    Ok(shots)
}

pub fn check_tiling(shots: &[Shot], len: usize) -> Result<(), ShotError> {
    let mut expected = 0;
    for (i, s) in shots.iter().enumerate() {
        if s.start != expected || s.end <= s.start {
            return Err(ShotError::ShotList(format!(
                "shot {i} covers [{}, {}) but should start at {expected}",
                s.start, s.end
            )));
        }
        expected = s.end;
    }
    if expected != len {
        return Err(ShotError::ShotList(format!("shots cover {expected} of {len} frames")));
    }
    Ok(())
}

pub fn read_shots(path: &Path, len: usize) -> Result<Vec<Shot>, ShotError> {
    let text = std::fs::read_to_string(path).map_err(|e| ShotError::ShotList(format!("{}: {e}", path.display())))?;
    shots_from_json(&text, len)
}
