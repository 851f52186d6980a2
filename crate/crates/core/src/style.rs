//! Per-shot style records: content category, brightness, speed and motion.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media_io::{mean_luma, Frame};
use crate::motion::{boxes_for_frame, ForegroundAnnotation, HomographyTrack};
use crate::shot_detect::{Shot, Transition};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StyleError {
    #[error("shot {shot}: playback speed {speed} must be positive and finite")]
    InvalidSpeed { shot: usize, speed: f64 },
    #[error("shot {shot}: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        shot: usize,
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("speed map {path}: {reason}")]
    SpeedMap { path: String, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentCategory {
    SingleFocus,
    MultiSubject,
    Background,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContentLabel {
    pub category: ContentCategory,
    /// Mean boxes per sampled frame, by label.
    pub object_counts: BTreeMap<String, f64>,
}

impl ContentLabel {
    pub fn background() -> Self {
        Self {
            category: ContentCategory::Background,
            object_counts: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelConfig {
    /// Labels counted toward the salient-object total.
    pub salient_labels: Vec<String>,
    /// Below this mean count a shot is background.
    pub single_focus_min: f64,
    /// Above this mean count a shot is multi-subject.
    pub multi_subject_above: f64,
    pub samples_per_shot: usize,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self {
            salient_labels: vec!["person".into(), "face".into()],
            single_focus_min: 0.5,
            multi_subject_above: 2.0,
            samples_per_shot: 5,
        }
    }
}

impl LabelConfig {
    pub fn category(&self, mean_salient: f64) -> ContentCategory {
        if mean_salient < self.single_focus_min {
            ContentCategory::Background
        } else if mean_salient <= self.multi_subject_above {
            ContentCategory::SingleFocus
        } else {
            ContentCategory::MultiSubject
        }
    }
}

/// Up to `k` evenly spaced frame offsets in `0..len`, endpoints included.
pub fn sample_offsets(len: usize, k: usize) -> Vec<usize> {
    if len == 0 || k == 0 {
        return Vec::new();
    }
    if len <= k || k == 1 {
        return if k == 1 { vec![0] } else { (0..len).collect() };
    }
    let mut v: Vec<usize> = (0..k)
        .map(|i| ((i * (len - 1)) as f64 / (k - 1) as f64).round() as usize)
        .collect();
    v.dedup();
    v
}

/// Labels content from one annotation per sampled frame.
pub fn label_scene(samples: &[ForegroundAnnotation], cfg: &LabelConfig) -> ContentLabel {
    if samples.is_empty() {
        return ContentLabel::background();
    }
    let mut totals: BTreeMap<String, f64> = BTreeMap::new();
    for a in samples {
        for b in &a.boxes {
            *totals.entry(b.label.clone()).or_default() += 1.0;
        }
    }
    let n = samples.len() as f64;
    let object_counts: BTreeMap<String, f64> = totals.into_iter().map(|(k, v)| (k, v / n)).collect();
    let salient: f64 = cfg
        .salient_labels
        .iter()
        .filter_map(|l| object_counts.get(l))
        .sum();
    ContentLabel {
        category: cfg.category(salient),
        object_counts,
    }
}

/// Labels frames `[start, end)` of a clip from its sidecar annotations.
pub fn label_range(annotations: &[ForegroundAnnotation], start: usize, end: usize, cfg: &LabelConfig) -> ContentLabel {
    let samples: Vec<ForegroundAnnotation> = sample_offsets(end.saturating_sub(start), cfg.samples_per_shot)
        .into_iter()
        .map(|o| ForegroundAnnotation {
            frame: start + o,
            boxes: boxes_for_frame(annotations, start + o).cloned().collect(),
        })
        .collect();
    label_scene(&samples, cfg)
}

pub fn brightness_curve(frames: &[Frame]) -> Vec<f64> {
    frames.iter().map(mean_luma).collect()
}

/// User-labelled playback factors by shot index; missing shots play at 1.0.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpeedMap(pub BTreeMap<usize, f64>);

impl SpeedMap {
    pub fn speed_for(&self, shot: usize) -> Result<f64, StyleError> {
        let speed = self.0.get(&shot).copied().unwrap_or(1.0);
        if speed.is_finite() && speed > 0.0 {
            Ok(speed)
        } else {
            Err(StyleError::InvalidSpeed { shot, speed })
        }
    }

    pub fn validate(&self) -> Result<(), StyleError> {
        self.0.keys().try_for_each(|&k| self.speed_for(k).map(|_| ()))
    }

    pub fn load(path: &Path) -> Result<Self, StyleError> {
        let err = |reason: String| StyleError::SpeedMap {
            path: path.display().to_string(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let map: SpeedMap = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        map.validate()?;
        Ok(map)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ShotStyle<T: Scalar> {
    pub shot_index: usize,
    pub shot: Shot,
    pub track: HomographyTrack<T>,
    pub label: ContentLabel,
    pub speed: f64,
    pub brightness: Vec<f64>,
    pub transition_in: Transition,
    pub width: u32,
    pub height: u32,
    pub aspect: f64,
}

impl<T: Scalar> ShotStyle<T> {
    pub fn len(&self) -> usize {
        self.shot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shot.is_empty()
    }

    /// Raw target frames consumed after speed resampling.
    pub fn required_frames(&self) -> usize {
        required_frames(self.len(), self.speed)
    }
}

/// `ceil(len * speed)`, tolerant of floating-point noise in `speed`.
pub fn required_frames(len: usize, speed: f64) -> usize {
    let raw = len as f64 * speed;
    let nearest = raw.round();
    if (raw - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        raw.ceil() as usize
    }
}

#[allow(clippy::too_many_arguments)]
pub fn assemble_style<T: Scalar>(
    shot_index: usize,
    shot: &Shot,
    track: HomographyTrack<T>,
    label: ContentLabel,
    brightness: Vec<f64>,
    speeds: &SpeedMap,
    frame_size: (u32, u32),
) -> Result<ShotStyle<T>, StyleError> {
    let speed = speeds.speed_for(shot_index)?;
    let expected = shot.len();
    for (what, got) in [("brightness curve", brightness.len()), ("track", track.len())] {
        if got != expected {
            return Err(StyleError::LengthMismatch {
                shot: shot_index,
                what,
                got,
                expected,
            });
        }
    }
    Ok(ShotStyle {
        shot_index,
        shot: shot.clone(),
        track,
        label,
        speed,
        brightness,
        transition_in: shot.transition_in,
        width: frame_size.0,
        height: frame_size.1,
        aspect: frame_size.0 as f64 / frame_size.1 as f64,
    })
}
