use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::histogram::{color_histogram, hist_distance, Histogram};
use super::ShotError;
use crate::media_io::{mean_luma, FrameSequence};
use crate::vision::RansacParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShotDetectParams {
    /// Single-step histogram distance above which a hard cut is declared.
    pub cut_threshold: f64,
    /// Longest fade ramp considered on each side of a luma extremum.
    pub fade_window: usize,
    /// Histogram distance across a fade ramp must exceed this.
    pub fade_threshold: f64,
    /// Minimum luma swing, in levels, of a fade ramp.
    pub fade_depth: f64,
    pub min_shot_len: usize,
    /// Fundamental-matrix inliers needed to link two shots into one scene.
    pub scene_match_threshold: usize,
    pub scene_fast_threshold: u8,
    pub scene_ransac: RansacParams,
}

impl Default for ShotDetectParams {
    fn default() -> Self {
        Self {
            cut_threshold: 0.5,
            fade_window: 12,
            fade_threshold: 0.4,
            fade_depth: 16.0,
            min_shot_len: 8,
            scene_match_threshold: 15,
            scene_fast_threshold: 20,
            scene_ransac: RansacParams::new(1.5, 1000, 0),
        }
    }
}

impl ShotDetectParams {
    pub fn validate(&self) -> Result<(), ShotError> {
        let ok = self.fade_threshold > 0.0
            && self.fade_threshold <= self.cut_threshold
            && self.cut_threshold <= 1.0
            && self.min_shot_len >= 1
            && self.fade_window >= 1
            && self.fade_depth >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(ShotError::InvalidParams(format!(
                "need 0 < fade_threshold ({}) <= cut_threshold ({}) <= 1, min_shot_len ({}) >= 1, fade_window ({}) >= 1",
                self.fade_threshold, self.cut_threshold, self.min_shot_len, self.fade_window
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    HardCut,
    Fade,
}

/// Half-open frame interval `[start, end)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shot {
    pub start: usize,
    pub end: usize,
    pub transition_in: Transition,
    pub scene_id: usize,
}

impl Shot {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Per-frame statistics the boundary scan works on.
pub struct FrameSignals {
    pub histograms: Vec<Histogram>,
    pub luma: Vec<f64>,
}

impl FrameSignals {
    pub fn compute(seq: &FrameSequence) -> Self {
        let (histograms, luma) = seq
            .frames()
            .par_iter()
            .map(|f| (color_histogram(f), mean_luma(f)))
            .unzip();
        Self { histograms, luma }
    }

    /// `step[t] = d(h[t - 1], h[t])`, with `step[0] = 0`.
    pub fn step_distances(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.histograms.windows(2).map(|w| hist_distance(&w[0], &w[1])))
            .collect()
    }
}

/// Luma tolerance when testing a ramp for monotonicity.
const RAMP_TOL: f64 = 0.5;
const MIN_RAMP_FRAMES: usize = 3;

/// A fade: the luma extremum frame plus the frames of its ramp(s).
struct Fade {
    extremum: usize,
    ramp: std::ops::RangeInclusive<usize>,
}

/// Walks from `e` in direction `dir` while luma keeps moving away from the
/// extremum, at most `w` frames. Returns the far end of the ramp.
fn ramp_end(m: &[f64], e: usize, w: usize, minimum: bool, forward: bool) -> usize {
    let mut j = e;
    let n = m.len();
    for _ in 0..w {
        let next = if forward {
            if j + 1 >= n {
                break;
            }
            j + 1
        } else {
            if j == 0 {
                break;
            }
            j - 1
        };
        let away = if minimum { m[next] >= m[j] - RAMP_TOL } else { m[next] <= m[j] + RAMP_TOL };
        if !away {
            break;
        }
        j = next;
    }
    j
}

/// Fades: frames where mean luma passes through a windowed extremum
/// approached or left by a gradual ramp. A ramp spans at least three frames, swings by at
/// least `fade_depth`, puts no more than half of its swing into one step, and
/// changes the colour histogram by more than `fade_threshold`.
fn fades(sig: &FrameSignals, p: &ShotDetectParams) -> Vec<Fade> {
    let n = sig.luma.len();
    let m = &sig.luma;
    let w = p.fade_window;
    let mut out = Vec::new();
    for e in 1..n {
        let window = &m[e.saturating_sub(w)..=(e + w).min(n - 1)];
        let is_min = window.iter().all(|&v| m[e] <= v) && m[e] < m[e - 1];
        let is_max = window.iter().all(|&v| m[e] >= v) && m[e] > m[e - 1];
        if !is_min && !is_max {
            continue;
        }
        // luma must pass through the extremum, not merely stop at a plateau
        if e + 1 < n && (m[e + 1] - m[e]).abs() <= RAMP_TOL || (m[e - 1] - m[e]).abs() <= RAMP_TOL {
            continue;
        }
        let departs = |j: &usize| (m[*j] - m[e]).abs() >= p.fade_depth;
        if !(e.saturating_sub(w)..e).any(|j| departs(&j)) || !(e + 1..=(e + w).min(n - 1)).any(|j| departs(&j)) {
            continue;
        }
        let ramp_ok = |a: usize, b: usize| {
            let swing = (m[a] - m[b]).abs();
            let largest = (a..b).map(|j| (m[j + 1] - m[j]).abs()).fold(0.0, f64::max);
            b - a >= MIN_RAMP_FRAMES
                && swing >= p.fade_depth
                && largest <= swing / 2.0
                && hist_distance(&sig.histograms[a], &sig.histograms[b]) > p.fade_threshold
        };
        let start = ramp_end(m, e, w, is_min, false);
        let stop = ramp_end(m, e, w, is_min, true);
        let left = ramp_ok(start, e);
        let right = ramp_ok(e, stop);
        if left || right {
            let lo = if left { start } else { e };
            let hi = if right { stop } else { e };
            out.push(Fade {
                extremum: e,
                ramp: lo..=hi,
            });
        }
    }
    out
}

/// Boundary frames (each the first frame of a new shot) with their kind.
/// Single steps inside a fade ramp are not cuts even when their histogram
/// distance is large, since coarse bins jump near black.
pub fn detect_boundaries(sig: &FrameSignals, p: &ShotDetectParams) -> Vec<(usize, Transition)> {
    let step = sig.step_distances();
    let fades = fades(sig, p);
    // step t joins frames t - 1 and t; it is inside a ramp when both are
    let in_ramp = |t: usize| fades.iter().any(|f| f.ramp.contains(&(t - 1)) && f.ramp.contains(&t));
    let mut candidates: Vec<(usize, Transition)> = (1..step.len())
        .filter(|&t| step[t] > p.cut_threshold && !in_ramp(t))
        .map(|t| (t, Transition::HardCut))
        .collect();
    for f in &fades {
        if !candidates.iter().any(|&(t, _)| t == f.extremum) {
            candidates.push((f.extremum, Transition::Fade));
        }
    }
    candidates.sort_by_key(|&(t, _)| t);
    let mut kept = Vec::new();
    let mut last = 0;
    for (t, kind) in candidates {
        if t - last >= p.min_shot_len {
            kept.push((t, kind));
            last = t;
        }
    }
    kept
}

/// Splits `seq` into shots that tile it. Scene ids are provisional (one per
/// shot) until [`super::group_scenes`] runs.
pub fn detect_shots(seq: &FrameSequence, params: &ShotDetectParams) -> Result<Vec<Shot>, ShotError> {
    params.validate()?;
    if seq.is_empty() {
        return Err(ShotError::EmptySequence);
    }
    let sig = FrameSignals::compute(seq);
    Ok(shots_from_boundaries(seq.len(), &detect_boundaries(&sig, params)))
}

pub fn shots_from_boundaries(len: usize, boundaries: &[(usize, Transition)]) -> Vec<Shot> {
    let mut starts = vec![(0, Transition::HardCut)];
    starts.extend_from_slice(boundaries);
    starts
        .iter()
        .enumerate()
        .map(|(i, &(start, transition_in))| Shot {
            start,
            end: starts.get(i + 1).map_or(len, |s| s.0),
            transition_in,
            scene_id: i,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media_io::{Frame, FrameRate};
    use crate::synth::{noise_texture, scale_brightness, Palette};

    fn seq(frames: Vec<Frame>) -> FrameSequence {
        FrameSequence::from_frames(frames, FrameRate::default(), "t").unwrap()
    }

    #[test]
    fn red_then_blue_is_one_cut() {
        let mut frames = vec![Frame::filled(16, 16, [255, 0, 0], 0); 20];
        frames.extend(vec![Frame::filled(16, 16, [0, 0, 255], 0); 20]);
        let shots = detect_shots(&seq(frames), &ShotDetectParams::default()).unwrap();
        assert_eq!(shots.len(), 2);
        assert_eq!((shots[1].start, shots[1].transition_in), (20, Transition::HardCut));
    }

    #[test]
    fn identical_frames_are_one_shot() {
        let shots = detect_shots(&seq(vec![Frame::filled(8, 8, [9, 9, 9], 0); 40]), &ShotDetectParams::default()).unwrap();
        assert_eq!(shots.len(), 1);
        assert_eq!((shots[0].start, shots[0].end), (0, 40));
    }

    #[test]
    fn fade_to_black_then_cut() {
        let red = noise_texture(48, 48, 1, Palette::DISTINCT[0]);
        let blue = noise_texture(48, 48, 2, Palette::DISTINCT[2]);
        let mut frames = vec![red.clone(); 20];
        for k in 1..=10 {
            frames.push(scale_brightness(&red, 1.0 - k as f64 / 10.0));
        }
        frames.extend(vec![blue; 20]);
        let sequence = seq(frames);
        // oracle: darkest frame of the ramp
        let luma: Vec<f64> = sequence.frames().iter().map(mean_luma).collect();
        let darkest = (0..luma.len()).min_by(|&a, &b| luma[a].total_cmp(&luma[b])).unwrap();
        let params = ShotDetectParams {
            min_shot_len: 1,
            ..ShotDetectParams::default()
        };
        let shots = detect_shots(&sequence, &params).unwrap();
        assert_eq!(shots.len(), 3, "{shots:?}");
        assert_eq!((shots[1].start, shots[1].transition_in), (darkest, Transition::Fade));
        assert_eq!((shots[2].start, shots[2].transition_in), (30, Transition::HardCut));
    }

    #[test]
    fn fade_out_and_in_is_one_boundary() {
        let red = noise_texture(48, 48, 1, Palette::DISTINCT[0]);
        let blue = noise_texture(48, 48, 2, Palette::DISTINCT[2]);
        let mut frames = vec![red.clone(); 20];
        for k in 1..=6 {
            frames.push(scale_brightness(&red, 1.0 - k as f64 / 6.0));
        }
        for k in 1..=6 {
            frames.push(scale_brightness(&blue, k as f64 / 6.0));
        }
        frames.extend(vec![blue; 20]);
        let params = ShotDetectParams {
            min_shot_len: 1,
            ..ShotDetectParams::default()
        };
        let shots = detect_shots(&seq(frames), &params).unwrap();
        assert_eq!(shots.len(), 2, "{shots:?}");
        assert_eq!((shots[1].start, shots[1].transition_in), (25, Transition::Fade));
    }

    #[test]
    fn short_shots_are_suppressed() {
        let colors = [[255, 0, 0], [0, 255, 0], [0, 0, 255]];
        let mut frames = Vec::new();
        for (i, len) in [10usize, 3, 10].iter().enumerate() {
            frames.extend(vec![Frame::filled(8, 8, colors[i], 0); *len]);
        }
        let shots = detect_shots(&seq(frames), &ShotDetectParams::default()).unwrap();
        assert_eq!(shots.iter().map(|s| s.start).collect::<Vec<_>>(), vec![0, 10]);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = ShotDetectParams {
            fade_threshold: 0.7,
            ..ShotDetectParams::default()
        };
        assert!(p.validate().is_err());
    }
}
