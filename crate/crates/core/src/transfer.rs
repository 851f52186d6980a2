//! Re-rendering target footage with a source shot's camera motion, playback
//! speed and brightness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media_io::{mean_luma, Frame, FrameSequence};
use crate::motion::{mosaic_bounds, BoundingBox, HomographyTrack, MotionError, Rect};
use crate::style::{ContentCategory, ShotStyle};
use crate::vision::Homography;
use crate::warp::warp_frame;
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("shot {shot}: motion sweep {sweep_w:.1}x{sweep_h:.1} does not fit a {target_w}x{target_h} target at scale >= {min_scale}")]
    Infeasible {
        shot: usize,
        sweep_w: f64,
        sweep_h: f64,
        target_w: u32,
        target_h: u32,
        min_scale: f64,
    },
    #[error("shot {shot}: output frame {t} out of range 0..{len}")]
    FrameOutOfRange { shot: usize, t: usize, len: usize },
    #[error("shot {shot}: target has {available} frames, {needed} needed")]
    TargetTooShort { shot: usize, needed: usize, available: usize },
    #[error("shot {shot}: target track has {track} entries for {frames} frames")]
    TrackMismatch { shot: usize, track: usize, frames: usize },
    #[error("invalid framing parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Motion(#[from] MotionError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FramingParams {
    pub min_scale: f64,
    /// Upper bound on the output-to-target scale; 1.0 never magnifies
    /// target pixels beyond one output pixel each.
    pub max_scale: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

impl Default for FramingParams {
    fn default() -> Self {
        Self {
            min_scale: 0.05,
            max_scale: 1.0,
            iterations: 20,
            tolerance: 1e-4,
        }
    }
}

impl FramingParams {
    pub fn validate(&self) -> Result<(), TransferError> {
        if self.min_scale > 0.0 && self.max_scale >= self.min_scale && self.tolerance > 0.0 {
            Ok(())
        } else {
            Err(TransferError::InvalidParams(format!(
                "need 0 < min_scale ({}) <= max_scale ({}) and tolerance ({}) > 0",
                self.min_scale, self.max_scale, self.tolerance
            )))
        }
    }
}

/// Initial scale and offset placing the source start frame in the target
/// start frame: `h_start = [[s, 0, ox], [0, s, oy], [0, 0, 1]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FramingSolution<T: Scalar> {
    pub h_start: Homography<T>,
    pub scale: T,
    pub offset: (T, T),
}

impl<T: Scalar> FramingSolution<T> {
    pub fn new(scale: T, offset: (T, T)) -> Self {
        Self {
            h_start: Homography::translation(offset.0, offset.1) * Homography::scaling(scale),
            scale,
            offset,
        }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), (T::zero(), T::zero()))
    }
}

/// Per-frame inverse of the target's cumulative track.
pub fn stabilize_track<T: Scalar>(target: &HomographyTrack<T>) -> Vec<Homography<T>> {
    target.cumulative.iter().map(Homography::inverse).collect()
}

fn fits(b: &Rect, scale: f64, w: f64, h: f64) -> bool {
    scale * b.width() <= w + 1e-9 && scale * b.height() <= h + 1e-9
}

/// Largest scale and matching offset that keep the whole motion sweep inside
/// a `target_size` frame. Single-focus shots centre the start window on
/// `target_content` where the sweep allows it.
pub fn solve_framing<T: Scalar>(
    style: &ShotStyle<T>,
    target_size: (u32, u32),
    target_content: Option<&BoundingBox>,
    params: &FramingParams,
) -> Result<FramingSolution<T>, TransferError> {
    params.validate()?;
    let b = mosaic_bounds(&style.track, style.width, style.height);
    let (tw, th) = (target_size.0 as f64, target_size.1 as f64);
    if !fits(&b, params.min_scale, tw, th) {
        return Err(TransferError::Infeasible {
            shot: style.shot_index,
            sweep_w: b.width(),
            sweep_h: b.height(),
            target_w: target_size.0,
            target_h: target_size.1,
            min_scale: params.min_scale,
        });
    }
    let scale = if fits(&b, params.max_scale, tw, th) {
        params.max_scale
    } else {
        let (mut lo, mut hi) = (params.min_scale, params.max_scale);
        for _ in 0..params.iterations {
            if hi - lo < params.tolerance * 1e-2 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if fits(&b, mid, tw, th) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let centred = (
        (tw - scale * b.width()) / 2.0 - scale * b.x0,
        (th - scale * b.height()) / 2.0 - scale * b.y0,
    );
    let offset = match (style.label.category, target_content) {
        (ContentCategory::SingleFocus, Some(content)) => {
            let (cx, cy) = content.center();
            let want = (
                cx - scale * style.width as f64 / 2.0,
                cy - scale * style.height as f64 / 2.0,
            );
            (
                clamp_range(want.0, -scale * b.x0, tw - scale * b.x1),
                clamp_range(want.1, -scale * b.y0, th - scale * b.y1),
            )
        }
        _ => centred,
    };
    Ok(FramingSolution::new(T::lit(scale), (T::lit(offset.0), T::lit(offset.1))))
}

fn clamp_range(v: f64, lo: f64, hi: f64) -> f64 {
    if lo > hi {
        (lo + hi) / 2.0
    } else {
        v.clamp(lo, hi)
    }
}

/// Target frame sampled by output frame `t` at playback `speed`.
pub fn source_frame_index(speed: f64, t: usize, target_len: usize) -> usize {
    ((speed * t as f64).round() as usize).min(target_len.saturating_sub(1))
}

/// `W(t) = stab[t'] * h_start * style.cumulative[t]`: maps output pixel
/// coordinates to pixel coordinates of target frame `t'`.
pub fn compose_warp<T: Scalar>(
    style: &ShotStyle<T>,
    stab: &[Homography<T>],
    framing: &FramingSolution<T>,
    t: usize,
) -> Result<Homography<T>, TransferError> {
    if t >= style.len() || t >= style.track.len() || stab.is_empty() {
        return Err(TransferError::FrameOutOfRange {
            shot: style.shot_index,
            t,
            len: style.len(),
        });
    }
    let tp = source_frame_index(style.speed, t, stab.len());
    Ok(stab[tp] * framing.h_start * style.track.cumulative[t])
}

/// Scales RGB so mean luma approaches `target_mean`.
pub fn apply_brightness(frame: &Frame, target_mean: f64) -> Frame {
    let gain = target_mean.clamp(0.0, 255.0) / mean_luma(frame).max(1.0);
    let pixels = frame
        .pixels()
        .iter()
        .map(|&v| (v as f64 * gain).round().clamp(0.0, 255.0) as u8)
        .collect();
    Frame::new(frame.width(), frame.height(), pixels, frame.index()).expect("same dimensions")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Provenance<T: Scalar> {
    pub shot_index: usize,
    pub target_source_id: String,
    pub framing: FramingSolution<T>,
    pub speed: f64,
}

#[derive(Clone, Debug)]
pub struct RenderedShot<T: Scalar> {
    pub frames: Vec<Frame>,
    pub provenance: Provenance<T>,
}

/// Renders one output shot from its target clip. Output frame indices continue
/// the source numbering from `style.shot.start`.
pub fn render_shot<T: Scalar>(
    style: &ShotStyle<T>,
    target: &FrameSequence,
    target_track: &HomographyTrack<T>,
    framing: &FramingSolution<T>,
) -> Result<RenderedShot<T>, TransferError> {
    // last raw frame actually sampled
    let needed = source_frame_index(style.speed, style.len().saturating_sub(1), usize::MAX) + 1;
    if target.len() < needed {
        return Err(TransferError::TargetTooShort {
            shot: style.shot_index,
            needed,
            available: target.len(),
        });
    }
    if target_track.len() != target.len() {
        return Err(TransferError::TrackMismatch {
            shot: style.shot_index,
            track: target_track.len(),
            frames: target.len(),
        });
    }
    if style.brightness.len() != style.len() {
        return Err(TransferError::FrameOutOfRange {
            shot: style.shot_index,
            t: style.brightness.len(),
            len: style.len(),
        });
    }
    let stab = stabilize_track(target_track);
    let size = (style.width, style.height);
    let frames = (0..style.len())
        .into_par_iter()
        .map(|t| {
            let w = compose_warp(style, &stab, framing, t)?;
            let tp = source_frame_index(style.speed, t, target.len());
            let warped = warp_frame(&target.frames()[tp], &w, size).with_index(style.shot.start + t);
            Ok(apply_brightness(&warped, style.brightness[t]))
        })
        .collect::<Result<Vec<_>, TransferError>>()?;
    Ok(RenderedShot {
        frames,
        provenance: Provenance {
            shot_index: style.shot_index,
            target_source_id: target.source_id().to_string(),
            framing: framing.clone(),
            speed: style.speed,
        },
    })
}
