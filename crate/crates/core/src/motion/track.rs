use nalgebra::Point2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::annotation::{boxes_for_frame, BoundingBox, ForegroundAnnotation};
use super::refine::{refine_step, Plane};
use super::MotionError;
use crate::media_io::{luma, Frame};
use crate::vision::{
    box_filter_5x5, estimate_homography_ransac, fast_detect, match_descriptors, symmetric_transfer_error, Descriptor,
    Homography, Keypoint, RansacParams,
};
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    pub fast_threshold: u8,
    /// Strongest background keypoints kept per frame.
    pub max_points: usize,
    pub match_ratio: f32,
    /// A step with fewer RANSAC inliers falls back to identity.
    pub min_inliers: usize,
    pub ransac: RansacParams,
    /// Estimate motion between every `stride`-th frame and interpolate the
    /// frames in between.
    pub stride: usize,
    /// Polish each feature-based estimate by direct luma alignment.
    pub refine: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            fast_threshold: 20,
            max_points: 1000,
            match_ratio: 0.8,
            min_inliers: 12,
            ransac: RansacParams::default(),
            stride: 1,
            refine: true,
        }
    }
}

/// Per-shot camera motion.
///
/// `step[t]` maps frame `t - 1` coordinates to frame `t` coordinates and
/// `cumulative[t]` maps frame `t` coordinates to shot-start coordinates, so
/// `cumulative[t] = cumulative[t - 1] * step[t]^-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HomographyTrack<T: Scalar> {
    pub start_index: usize,
    pub step: Vec<Homography<T>>,
    pub cumulative: Vec<Homography<T>>,
    /// Frames whose incoming step fell back to identity.
    pub fallback: Vec<bool>,
    /// More than half of the steps fell back.
    pub failed: bool,
}

impl<T: Scalar> HomographyTrack<T> {
    pub fn identity(len: usize, start_index: usize) -> Self {
        Self {
            start_index,
            step: vec![Homography::identity(); len],
            cumulative: vec![Homography::identity(); len],
            fallback: vec![false; len],
            failed: false,
        }
    }

    pub fn from_steps(start_index: usize, step: Vec<Homography<T>>) -> Result<Self, MotionError> {
        let cumulative = accumulate(&step)?;
        let len = step.len();
        Ok(Self {
            start_index,
            step,
            cumulative,
            fallback: vec![false; len],
            failed: false,
        })
    }

    pub fn len(&self) -> usize {
        self.step.len()
    }

    pub fn is_empty(&self) -> bool {
        self.step.is_empty()
    }

    pub fn fallback_count(&self) -> usize {
        self.fallback.iter().filter(|&&f| f).count()
    }

    pub fn validate(&self) -> Result<(), MotionError> {
        let n = self.step.len();
        if n == 0 {
            return Err(MotionError::EmptyShot);
        }
        if self.cumulative.len() != n || self.fallback.len() != n {
            return Err(MotionError::MalformedTrack(format!(
                "{} steps, {} cumulatives, {} flags",
                n,
                self.cumulative.len(),
                self.fallback.len()
            )));
        }
        let id = Homography::<T>::identity();
        if self.step[0].max_abs_diff(&id).as_f64() > 1e-9 || self.cumulative[0].max_abs_diff(&id).as_f64() > 1e-9 {
            return Err(MotionError::MalformedTrack("frame 0 must carry the identity".into()));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> HomographyTrack<U> {
        HomographyTrack {
            start_index: self.start_index,
            step: self.step.iter().map(|h| h.cast()).collect(),
            cumulative: self.cumulative.iter().map(|h| h.cast()).collect(),
            fallback: self.fallback.clone(),
            failed: self.failed,
        }
    }
}

/// Prefix composition of `steps` into start-frame cumulatives.
pub fn accumulate<T: Scalar>(steps: &[Homography<T>]) -> Result<Vec<Homography<T>>, MotionError> {
    let Some(first) = steps.first() else {
        return Ok(Vec::new());
    };
    if first.max_abs_diff(&Homography::identity()).as_f64() > 1e-9 {
        return Err(MotionError::MalformedTrack("steps[0] must be the identity".into()));
    }
    let mut out = Vec::with_capacity(steps.len());
    out.push(Homography::identity());
    for (t, s) in steps.iter().enumerate().skip(1) {
        let inv = s
            .matrix()
            .try_inverse()
            .ok_or(MotionError::NonInvertibleStep { index: t })?;
        let next = Homography::new(out[t - 1].matrix() * inv).map_err(|_| MotionError::NonInvertibleStep { index: t })?;
        out.push(next);
    }
    Ok(out)
}

const MIN_FAST_THRESHOLD: u8 = 6;

/// Keypoint positions and descriptors of the background of one frame.
struct Features<'a> {
    points: Vec<Keypoint>,
    descriptors: Vec<Descriptor>,
    boxes: Vec<&'a BoundingBox>,
    plane: Option<Plane>,
}

fn features<'a>(frame: &Frame, frame_index: usize, fg: &'a [ForegroundAnnotation], cfg: &TrackerConfig) -> Features<'a> {
    let image = luma(frame);
    let boxes: Vec<_> = boxes_for_frame(fg, frame_index).collect();
    let detect = |threshold: u8| {
        let mut points = fast_detect(&image, threshold, usize::MAX);
        for p in &mut points {
            p.is_foreground = boxes.iter().any(|b| b.contains(p.x as f64, p.y as f64));
        }
        points.retain(|p| !p.is_foreground);
        points
    };
    let mut threshold = cfg.fast_threshold.max(1);
    let mut points = detect(threshold);
    // low-contrast backgrounds: relax the threshold until enough corners appear
    while points.len() < cfg.max_points / 2 && threshold > MIN_FAST_THRESHOLD {
        threshold = (threshold * 2 / 3).max(MIN_FAST_THRESHOLD);
        points = detect(threshold);
    }
    points.truncate(cfg.max_points);
    let smooth = box_filter_5x5(&image);
    let d = crate::vision::describe_smoothed(&smooth, image.width(), image.height(), &points);
    Features {
        points: d.indices.iter().map(|&i| points[i]).collect(),
        descriptors: d.descriptors,
        plane: cfg.refine.then(|| Plane::new(&image)),
        boxes,
    }
}

/// Outcome of one step estimate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub matches: usize,
    /// Inlier positions in the earlier frame.
    pub inliers_prev: Vec<(f64, f64)>,
    /// Inlier positions in the later frame.
    pub inliers_next: Vec<(f64, f64)>,
    pub fallback: bool,
}

/// Track plus per-step diagnostics; `steps[t]` describes the estimate
/// between keyframes ending at frame `keyframes[t]`.
#[derive(Clone, Debug)]
pub struct TrackReport<T: Scalar> {
    pub track: HomographyTrack<T>,
    pub keyframes: Vec<usize>,
    pub steps: Vec<StepReport>,
}

fn estimate_step<T: Scalar>(a: &Features, b: &Features, cfg: &TrackerConfig, seed: u64) -> (Homography<T>, StepReport) {
    let matches = match_descriptors(&a.descriptors, &b.descriptors, cfg.match_ratio);
    let mut report = StepReport {
        matches: matches.len(),
        fallback: true,
        ..Default::default()
    };
    if matches.len() < cfg.min_inliers.max(4) {
        return (Homography::identity(), report);
    }
    let pt = |k: &Keypoint| Point2::new(T::lit(k.x as f64), T::lit(k.y as f64));
    let src: Vec<_> = matches.pairs.iter().map(|m| pt(&a.points[m.a])).collect();
    let dst: Vec<_> = matches.pairs.iter().map(|m| pt(&b.points[m.b])).collect();
    let params = RansacParams { seed, ..cfg.ransac };
    match estimate_homography_ransac(&src, &dst, &params) {
        Ok(fit) if fit.inlier_count() >= cfg.min_inliers => {
            for i in fit.inlier_indices() {
                let (p, q) = (&a.points[matches.pairs[i].a], &b.points[matches.pairs[i].b]);
                report.inliers_prev.push((p.x as f64, p.y as f64));
                report.inliers_next.push((q.x as f64, q.y as f64));
            }
            report.fallback = false;
            let model = match (&a.plane, &b.plane) {
                (Some(pa), Some(pb)) => refine_step(pa, pb, &a.boxes, &b.boxes, &fit.model)
                    .map(|r| r.0)
                    .filter(|h| agrees_with_inliers(h, &report, cfg.ransac.inlier_px))
                    .unwrap_or(fit.model),
                _ => fit.model,
            };
            (model, report)
        }
        _ => (Homography::identity(), report),
    }
}

/// A refined step must keep the feature inliers within twice the RANSAC
/// threshold on average.
fn agrees_with_inliers<T: Scalar>(h: &Homography<T>, report: &StepReport, inlier_px: f64) -> bool {
    let n = report.inliers_prev.len();
    if n == 0 {
        return false;
    }
    let h_inv = h.inverse();
    let total: f64 = report
        .inliers_prev
        .iter()
        .zip(&report.inliers_next)
        .map(|(&(px, py), &(qx, qy))| {
            let p = Point2::new(T::lit(px), T::lit(py));
            let q = Point2::new(T::lit(qx), T::lit(qy));
            symmetric_transfer_error(h, &h_inv, p, q).as_f64()
        })
        .sum();
    total / n as f64 <= 2.0 * inlier_px
}

/// Minimum fraction of a frame that must overlap its anchor.
const MIN_ANCHOR_OVERLAP: f64 = 0.8;

/// Re-aligns each keyframe directly against an earlier anchor keyframe so
/// that per-pair errors do not compound. The anchor advances when the overlap
/// gets too small or a pair estimate fell back.
fn anchor_cumulatives<T: Scalar>(
    feats: &[Features],
    estimates: &[(Homography<T>, StepReport)],
    key_cum: &mut [Homography<T>],
    inlier_px: f64,
) {
    let mut anchor = 0;
    for i in 1..key_cum.len() {
        let (step, report) = &estimates[i - 1];
        if report.fallback {
            key_cum[i] = key_cum[i - 1];
            anchor = i;
            continue;
        }
        let chained = key_cum[i - 1] * step.inverse();
        let mut refined = None;
        for candidate in [anchor, i - 1] {
            let (Some(pa), Some(pt)) = (&feats[candidate].plane, &feats[i].plane) else {
                break;
            };
            let init = chained.inverse() * key_cum[candidate];
            if let Some((h, overlap)) = refine_step(pa, pt, &feats[candidate].boxes, &feats[i].boxes, &init) {
                let cum = key_cum[candidate] * h.inverse();
                let implied = cum.inverse() * key_cum[i - 1];
                if !agrees_with_inliers(&implied, report, inlier_px) {
                    // fall through to the previous keyframe
                } else if overlap >= MIN_ANCHOR_OVERLAP || candidate == i - 1 {
                    anchor = candidate;
                    refined = Some(cum);
                    break;
                }
            }
            if candidate == i - 1 {
                break;
            }
        }
        key_cum[i] = refined.unwrap_or(chained);
        if refined.is_none() {
            anchor = i;
        }
    }
}

/// Keyframe indices for a shot of `len` frames: every `stride`-th frame plus
/// the last.
fn keyframes(len: usize, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    let mut k: Vec<usize> = (0..len).step_by(stride).collect();
    if len > 0 && k.last() != Some(&(len - 1)) {
        k.push(len - 1);
    }
    k
}

/// Estimates the camera track of a shot. Keypoints inside annotated
/// foreground boxes never take part in matching.
pub fn track_camera<T: Scalar>(
    frames: &[Frame],
    fg: &[ForegroundAnnotation],
    cfg: &TrackerConfig,
    start_index: usize,
) -> Result<HomographyTrack<T>, MotionError> {
    track_camera_report(frames, fg, cfg, start_index).map(|r| r.track)
}

pub fn track_camera_report<T: Scalar>(
    frames: &[Frame],
    fg: &[ForegroundAnnotation],
    cfg: &TrackerConfig,
    start_index: usize,
) -> Result<TrackReport<T>, MotionError> {
    if frames.is_empty() {
        return Err(MotionError::EmptyShot);
    }
    for a in fg {
        if let Some(f) = frames.get(a.frame) {
            a.validate(f.width(), f.height())?;
        }
    }
    let keys = keyframes(frames.len(), cfg.stride);
    let feats: Vec<Features> = keys.par_iter().map(|&k| features(&frames[k], k, fg, cfg)).collect();
    let estimates: Vec<(Homography<T>, StepReport)> = (1..keys.len())
        .into_par_iter()
        .map(|i| estimate_step(&feats[i - 1], &feats[i], cfg, cfg.ransac.seed.wrapping_add(keys[i] as u64)))
        .collect();

    let n = frames.len();
    let mut track = HomographyTrack::identity(n, start_index);
    let mut key_cum = vec![Homography::<T>::identity()];
    for (i, (step, report)) in estimates.iter().enumerate() {
        let prev = key_cum[i];
        key_cum.push(Homography::new(prev.matrix() * step.inverse().matrix()).map_err(|_| {
            MotionError::NonInvertibleStep { index: keys[i + 1] }
        })?);
        track.fallback[keys[i + 1]] = report.fallback;
    }
    if cfg.refine {
        anchor_cumulatives(&feats, &estimates, &mut key_cum, cfg.ransac.inlier_px);
    }
    for (i, pair) in keys.windows(2).enumerate() {
        let (k0, k1) = (pair[0], pair[1]);
        let (c0, c1) = (key_cum[i].matrix(), key_cum[i + 1].matrix());
        for t in k0 + 1..=k1 {
            let a = T::lit((t - k0) as f64 / (k1 - k0) as f64);
            let m = c0 * (T::one() - a) + c1 * a;
            track.cumulative[t] = Homography::new(m).map_err(|_| MotionError::NonInvertibleStep { index: t })?;
        }
    }
    for t in 1..n {
        track.step[t] = track.cumulative[t].inverse() * track.cumulative[t - 1];
    }
    let estimated = keys.len().saturating_sub(1);
    track.failed = estimated > 0 && 2 * track.fallback_count() > estimated;
    Ok(TrackReport {
        track,
        keyframes: keys,
        steps: estimates.into_iter().map(|(_, r)| r).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{camera_clip, centered_view, noise_texture, pan, static_clip, Palette};

    fn direct_product(steps: &[Homography<f64>]) -> nalgebra::Matrix3<f64> {
        let mut m = nalgebra::Matrix3::<f64>::identity();
        for s in &steps[1..] {
            let inv = s.matrix().try_inverse().unwrap();
            m *= inv;
        }
        m / m[(2, 2)]
    }

    #[test]
    fn accumulate_translations_add() {
        let steps = vec![Homography::identity(), pan(1.0, 0.0), pan(1.0, 0.0)];
        let cum = accumulate(&steps).unwrap();
        assert!((cum[2].apply_xy(0.0, 0.0).0 + 2.0).abs() < 1e-12);
    }

    #[test]
    fn accumulate_matches_direct_product() {
        let steps = vec![
            Homography::identity(),
            Homography::scaling(1.1),
            Homography::rotation(5f64.to_radians()),
        ];
        let cum = accumulate(&steps).unwrap();
        let direct = direct_product(&steps);
        assert!((cum[2].matrix() - direct).abs().max() < 1e-9);
    }

    #[test]
    fn accumulate_rejects_nonidentity_start() {
        assert!(accumulate(&[pan(1.0, 0.0)]).is_err());
    }

    #[test]
    fn static_shot_tracks_identity() {
        let tex = noise_texture(96, 96, 4, Palette::GRAY);
        let seq = static_clip(&tex, 10, "s");
        let track: HomographyTrack<f64> = track_camera(seq.frames(), &[], &TrackerConfig::default(), 0).unwrap();
        for h in track.step.iter().chain(track.cumulative.iter()) {
            assert!(h.max_abs_diff(&Homography::identity()) < 1e-3);
        }
        assert_eq!(track.fallback_count(), 0);
    }

    #[test]
    fn pan_of_two_px_per_frame() {
        let tex = noise_texture(512, 512, 5, Palette::GRAY);
        let clip = camera_clip(&tex, centered_view(&tex, 256, 256), pan(2.0, 0.0), 30, (256, 256), "pan");
        let track: HomographyTrack<f64> = track_camera(clip.seq.frames(), &[], &TrackerConfig::default(), 0).unwrap();
        let err = track.cumulative[29].corner_distance(&clip.truth[29], 256.0, 256.0);
        assert!(err < 1.5, "corner error {err}");
        let (x, _) = track.cumulative[29].apply_xy(0.0, 0.0);
        assert!((x - 58.0).abs() < 1.5);
    }

    #[test]
    fn flat_frames_fall_back_and_fail() {
        let seq = static_clip(&Frame::filled(64, 64, [90, 90, 90], 0), 4, "flat");
        let track: HomographyTrack<f32> = track_camera(seq.frames(), &[], &TrackerConfig::default(), 7).unwrap();
        assert_eq!(track.fallback, vec![false, true, true, true]);
        assert!(track.failed);
        assert_eq!(track.start_index, 7);
        track.validate().unwrap();
    }

    #[test]
    fn strided_track_matches_full_rate() {
        let tex = noise_texture(384, 384, 6, Palette::GRAY);
        let clip = camera_clip(&tex, centered_view(&tex, 160, 160), pan(1.5, -0.5), 13, (160, 160), "s");
        let cfg = TrackerConfig {
            stride: 4,
            ..TrackerConfig::default()
        };
        let report: TrackReport<f64> = track_camera_report(clip.seq.frames(), &[], &cfg, 0).unwrap();
        assert_eq!(report.keyframes, vec![0, 4, 8, 12]);
        for t in 0..13 {
            let err = report.track.cumulative[t].corner_distance(&clip.truth[t], 160.0, 160.0);
            assert!(err < 1.5, "frame {t}: {err}");
        }
        // steps stay consistent with the interpolated cumulatives
        let again = accumulate(&report.track.step).unwrap();
        for t in 0..13 {
            assert!(again[t].max_abs_diff(&report.track.cumulative[t]) < 1e-6);
        }
    }
}
