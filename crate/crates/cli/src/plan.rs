use std::collections::BTreeMap;

use editstyle::media_io::FrameRate;
use editstyle::shot_detect::{Shot, Transition};
use editstyle::style::{ContentCategory, ShotStyle};
use editstyle::transfer::FramingSolution;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StyleSummary {
    pub category: ContentCategory,
    pub object_counts: BTreeMap<String, f64>,
    pub speed: f64,
    pub transition_in: Transition,
    pub aspect: f64,
    pub mean_brightness: f64,
}

impl StyleSummary {
    pub fn of(style: &ShotStyle<f64>) -> Self {
        let n = style.brightness.len().max(1) as f64;
        Self {
            category: style.label.category,
            object_counts: style.label.object_counts.clone(),
            speed: style.speed,
            transition_in: style.transition_in,
            aspect: style.aspect,
            mean_brightness: style.brightness.iter().sum::<f64>() / n,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFlags {
    /// Source camera tracking fell back on more than half of its steps.
    pub track_failed: bool,
    pub fallback_steps: usize,
    /// No eligible clip shared the shot's content category.
    pub category_waived: bool,
    pub target_track_failed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub shot_index: usize,
    pub shot: Shot,
    pub style: StyleSummary,
    pub source_id: String,
    pub offset: usize,
    pub framing: FramingSolution<f64>,
    pub flags: PlanFlags,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EditPlan {
    pub config_fingerprint: String,
    pub source_id: String,
    pub frame_rate: FrameRate,
    pub width: u32,
    pub height: u32,
    pub records: Vec<PlanRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimelineShot {
    pub start: usize,
    pub end: usize,
    pub transition_in: Transition,
    pub clip: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub source_boundaries: Vec<usize>,
    pub output_boundaries: Vec<usize>,
    pub source: Vec<TimelineShot>,
    pub output: Vec<TimelineShot>,
}
