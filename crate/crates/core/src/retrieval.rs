//! Repository indexing and constrained footage selection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media_io::{FrameRate, FrameSequence};
use crate::motion::ForegroundAnnotation;
use crate::style::{label_range, required_frames, ContentLabel, LabelConfig, ShotStyle};
use crate::Scalar;

/// Relative aspect-ratio tolerance of the hard constraint.
pub const ASPECT_TOLERANCE: f64 = 0.01;
const COSINE_QUANTUM: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Aspect,
    Duration,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Aspect => "aspect ratio",
            Constraint::Duration => "duration",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetrievalError {
    #[error("duplicate source_id `{0}` in repository")]
    DuplicateSource(String),
    #[error("repository index is empty")]
    EmptyIndex,
    #[error("shot {shot}: no clip satisfies the {constraint} constraint ({detail}); nearest miss `{nearest}`")]
    NoEligibleClip {
        shot: usize,
        constraint: Constraint,
        nearest: String,
        detail: String,
    },
    #[error("repository index: {0}")]
    Index(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepoClip {
    pub source_id: String,
    pub duration: usize,
    pub frame_rate: FrameRate,
    pub width: u32,
    pub height: u32,
    pub aspect: f64,
    pub label: ContentLabel,
    pub object_counts: BTreeMap<String, f64>,
    pub used: usize,
}

impl RepoClip {
    /// Indexes one clip; without a sidecar the clip is background.
    pub fn from_clip(seq: &FrameSequence, annotations: Option<&[ForegroundAnnotation]>, cfg: &LabelConfig) -> Self {
        let (width, height) = seq.dimensions().unwrap_or((1, 1));
        let label = match annotations {
            Some(a) => label_range(a, 0, seq.len(), cfg),
            None => ContentLabel::background(),
        };
        Self {
            source_id: seq.source_id().to_string(),
            duration: seq.len(),
            frame_rate: seq.frame_rate(),
            width,
            height,
            aspect: width as f64 / height as f64,
            object_counts: label.object_counts.clone(),
            label,
            used: 0,
        }
    }

    fn aspect_error(&self, aspect: f64) -> f64 {
        (self.aspect - aspect).abs() / aspect
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RepoIndex {
    clips: Vec<RepoClip>,
}

impl RepoIndex {
    pub fn new(clips: Vec<RepoClip>) -> Result<Self, RetrievalError> {
        let mut seen = BTreeSet::new();
        for c in &clips {
            if !seen.insert(c.source_id.as_str()) {
                return Err(RetrievalError::DuplicateSource(c.source_id.clone()));
            }
            if c.duration == 0 || !(c.aspect > 0.0) {
                return Err(RetrievalError::Index(format!(
                    "clip `{}` has duration {} and aspect {}",
                    c.source_id, c.duration, c.aspect
                )));
            }
        }
        Ok(Self { clips })
    }

    pub fn clips(&self) -> &[RepoClip] {
        &self.clips
    }

    pub fn len(&self) -> usize {
        self.clips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clips.is_empty()
    }

    pub fn get(&self, source_id: &str) -> Option<&RepoClip> {
        self.clips.iter().find(|c| c.source_id == source_id)
    }

    pub fn reset_usage(&mut self) {
        self.clips.iter_mut().for_each(|c| c.used = 0);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("index serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RetrievalError> {
        let raw: RepoIndex = serde_json::from_str(text).map_err(|e| RetrievalError::Index(e.to_string()))?;
        Self::new(raw.clips)
    }
}

pub fn index_repository(
    clips: &[(FrameSequence, Option<Vec<ForegroundAnnotation>>)],
    cfg: &LabelConfig,
) -> Result<RepoIndex, RetrievalError> {
    let entries = clips
        .par_iter()
        .map(|(seq, ann)| RepoClip::from_clip(seq, ann.as_deref(), cfg))
        .collect();
    RepoIndex::new(entries)
}

/// Cosine similarity over the union of labels; 0 when either side is empty.
pub fn cosine_similarity(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(k, x)| b.get(k).map(|y| x * y)).sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub source_id: String,
    pub offset: usize,
}

/// Whether `clip` meets the hard constraints for a shot of `len` frames.
pub fn satisfies_hard_constraints(clip: &RepoClip, aspect: f64, len: usize, speed: f64) -> bool {
    clip.aspect_error(aspect) <= ASPECT_TOLERANCE && clip.duration >= required_frames(len, speed)
}

/// Picks the target clip for `style` and bumps its use count.
pub fn select_footage<T: Scalar>(style: &ShotStyle<T>, index: &mut RepoIndex) -> Result<Selection, RetrievalError> {
    if index.is_empty() {
        return Err(RetrievalError::EmptyIndex);
    }
    let needed = style.required_frames();
    let aspect_ok: Vec<usize> = (0..index.len())
        .filter(|&i| index.clips[i].aspect_error(style.aspect) <= ASPECT_TOLERANCE)
        .collect();
    if aspect_ok.is_empty() {
        let nearest = index
            .clips
            .iter()
            .min_by(|a, b| {
                a.aspect_error(style.aspect)
                    .total_cmp(&b.aspect_error(style.aspect))
                    .then_with(|| a.source_id.cmp(&b.source_id))
            })
            .expect("nonempty");
        return Err(RetrievalError::NoEligibleClip {
            shot: style.shot_index,
            constraint: Constraint::Aspect,
            nearest: nearest.source_id.clone(),
            detail: format!("need {:.4} +-1%, nearest has {:.4}", style.aspect, nearest.aspect),
        });
    }
    let eligible: Vec<usize> = aspect_ok
        .iter()
        .copied()
        .filter(|&i| index.clips[i].duration >= needed)
        .collect();
    if eligible.is_empty() {
        let nearest = aspect_ok
            .iter()
            .map(|&i| &index.clips[i])
            .max_by(|a, b| a.duration.cmp(&b.duration).then_with(|| b.source_id.cmp(&a.source_id)))
            .expect("nonempty");
        return Err(RetrievalError::NoEligibleClip {
            shot: style.shot_index,
            constraint: Constraint::Duration,
            nearest: nearest.source_id.clone(),
            detail: format!(
                "need {needed} frames ({} x speed {}), longest has {}",
                style.len(),
                style.speed,
                nearest.duration
            ),
        });
    }
    let same_category: Vec<usize> = eligible
        .iter()
        .copied()
        .filter(|&i| index.clips[i].label.category == style.label.category)
        .collect();
    let pool = if same_category.is_empty() { eligible } else { same_category };
    let score = |i: usize| {
        let c = &index.clips[i];
        let cos = cosine_similarity(&style.label.object_counts, &c.object_counts);
        ((cos / COSINE_QUANTUM).round() as i64, c)
    };
    let best = pool
        .into_iter()
        .min_by(|&a, &b| {
            let (sa, ca) = score(a);
            let (sb, cb) = score(b);
            sb.cmp(&sa)
                .then(ca.used.cmp(&cb.used))
                .then_with(|| ca.source_id.cmp(&cb.source_id))
        })
        .expect("nonempty pool");
    let chosen = &mut index.clips[best];
    chosen.used += 1;
    Ok(Selection {
        source_id: chosen.source_id.clone(),
        offset: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media_io::Frame;
    use crate::motion::{BoundingBox, HomographyTrack};
    use crate::shot_detect::{Shot, Transition};
    use crate::style::{ContentCategory, SpeedMap};

    fn clip(id: &str, duration: usize, aspect: f64, counts: &[(&str, f64)]) -> RepoClip {
        let object_counts: BTreeMap<String, f64> = counts.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        let salient: f64 = object_counts.values().sum();
        RepoClip {
            source_id: id.into(),
            duration,
            frame_rate: FrameRate::default(),
            width: (aspect * 90.0).round() as u32,
            height: 90,
            aspect,
            label: ContentLabel {
                category: LabelConfig::default().category(salient),
                object_counts: object_counts.clone(),
            },
            object_counts,
            used: 0,
        }
    }

    fn style(len: usize, speed: f64, counts: &[(&str, f64)]) -> ShotStyle<f64> {
        let shot = Shot {
            start: 0,
            end: len,
            transition_in: Transition::HardCut,
            scene_id: 0,
        };
        let object_counts: BTreeMap<String, f64> = counts.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        let label = ContentLabel {
            category: LabelConfig::default().category(object_counts.values().sum()),
            object_counts,
        };
        let mut speeds = SpeedMap::default();
        speeds.0.insert(0, speed);
        crate::style::assemble_style(0, &shot, HomographyTrack::identity(len, 0), label, vec![100.0; len], &speeds, (160, 90)).unwrap()
    }

    #[test]
    fn empty_repository_is_empty_index() {
        assert!(index_repository(&[], &LabelConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn sidecar_drives_label() {
        let frames = |id: &str| FrameSequence::from_frames(vec![Frame::filled(32, 18, [50; 3], 0); 300], FrameRate::default(), id).unwrap();
        let people: Vec<ForegroundAnnotation> = (0..300)
            .map(|f| ForegroundAnnotation {
                frame: f,
                boxes: vec![BoundingBox::new(1.0, 1.0, 4.0, 4.0, "person")],
            })
            .collect();
        let index = index_repository(&[(frames("a"), Some(people)), (frames("b"), None)], &LabelConfig::default()).unwrap();
        assert_eq!(index.clips()[0].label.category, ContentCategory::SingleFocus);
        assert_eq!(index.clips()[1].label.category, ContentCategory::Background);
        assert_eq!(index.clips()[1].duration, 300);
        assert!((index.clips()[1].aspect - 16.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn duplicates_rejected() {
        let c = clip("x", 10, 1.0, &[]);
        assert_eq!(RepoIndex::new(vec![c.clone(), c]), Err(RetrievalError::DuplicateSource("x".into())));
    }

    #[test]
    fn forced_choice() {
        let mut index = RepoIndex::new(vec![clip("only", 50, 16.0 / 9.0, &[])]).unwrap();
        let sel = select_footage(&style(30, 1.0, &[]), &mut index).unwrap();
        assert_eq!(sel, Selection { source_id: "only".into(), offset: 0 });
        assert_eq!(index.clips()[0].used, 1);
    }

    #[test]
    fn duration_after_speed() {
        let mut index = RepoIndex::new(vec![clip("short", 100, 16.0 / 9.0, &[]), clip("long", 130, 16.0 / 9.0, &[])]).unwrap();
        assert_eq!(select_footage(&style(60, 2.0, &[]), &mut index).unwrap().source_id, "long");
    }

    #[test]
    fn cosine_prefers_matching_objects() {
        let mut index = RepoIndex::new(vec![
            clip("b", 100, 16.0 / 9.0, &[]),
            clip("a", 100, 16.0 / 9.0, &[("person", 1.0)]),
        ])
        .unwrap();
        // clip b is background so the category filter alone already picks a
        assert_eq!(select_footage(&style(10, 1.0, &[("person", 1.0)]), &mut index).unwrap().source_id, "a");
        assert_eq!(cosine_similarity(&BTreeMap::new(), &index.clips()[1].object_counts), 0.0);
    }

    #[test]
    fn category_waived_when_nobody_matches() {
        let mut index = RepoIndex::new(vec![clip("bg", 100, 16.0 / 9.0, &[])]).unwrap();
        assert_eq!(select_footage(&style(10, 1.0, &[("person", 5.0)]), &mut index).unwrap().source_id, "bg");
    }

    #[test]
    fn aspect_failure_names_nearest() {
        let mut index = RepoIndex::new(vec![clip("square", 100, 1.0, &[]), clip("wide", 100, 2.0, &[])]).unwrap();
        match select_footage(&style(10, 1.0, &[]), &mut index) {
            Err(RetrievalError::NoEligibleClip { constraint, nearest, .. }) => {
                assert_eq!((constraint, nearest.as_str()), (Constraint::Aspect, "wide"));
            }
            other => panic!("{other:?}"),
        }
        assert!(index.clips().iter().all(|c| c.used == 0));
    }

    #[test]
    fn duration_failure_names_longest() {
        let mut index = RepoIndex::new(vec![clip("a", 10, 16.0 / 9.0, &[]), clip("b", 20, 16.0 / 9.0, &[])]).unwrap();
        let err = select_footage(&style(30, 1.0, &[]), &mut index).unwrap_err();
        assert!(matches!(err, RetrievalError::NoEligibleClip { constraint: Constraint::Duration, ref nearest, .. } if nearest == "b"));
        assert!(err.to_string().contains("duration"));
    }

    #[test]
    fn reuse_rotates_through_identical_clips() {
        let mut index = RepoIndex::new((0..3).map(|i| clip(&format!("c{i}"), 100, 16.0 / 9.0, &[])).collect()).unwrap();
        let s = style(10, 1.0, &[]);
        let picks: Vec<String> = (0..4).map(|_| select_footage(&s, &mut index).unwrap().source_id).collect();
        assert_eq!(picks, vec!["c0", "c1", "c2", "c0"]);
    }

    #[test]
    fn json_round_trip() {
        let index = RepoIndex::new(vec![clip("a", 10, 1.5, &[("face", 0.4)])]).unwrap();
        assert_eq!(RepoIndex::from_json(&index.to_json()).unwrap(), index);
    }
}
