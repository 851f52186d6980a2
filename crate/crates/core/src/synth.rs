//! Synthetic footage with known camera motion, for tests, demos and
//! calibration runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::media_io::{Frame, FrameRate, FrameSequence};
use crate::motion::{BoundingBox, ForegroundAnnotation};
use crate::vision::Homography;
use crate::warp::{sample_bilinear, to_rgb};

/// Two endpoint colors a texture's intensity is mapped between.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Palette {
    pub dark: [u8; 3],
    pub light: [u8; 3],
}

impl Palette {
    pub const GRAY: Palette = Palette {
        dark: [30, 30, 30],
        light: [225, 225, 225],
    };

    /// Palettes with pairwise disjoint color-histogram support.
    pub const DISTINCT: [Palette; 6] = [
        Palette {
            dark: [96, 0, 0],
            light: [255, 60, 60],
        },
        Palette {
            dark: [0, 96, 0],
            light: [60, 255, 60],
        },
        Palette {
            dark: [0, 0, 96],
            light: [60, 60, 255],
        },
        Palette {
            dark: [96, 96, 0],
            light: [255, 255, 60],
        },
        Palette {
            dark: [0, 96, 96],
            light: [60, 255, 255],
        },
        Palette {
            dark: [96, 0, 96],
            light: [255, 60, 255],
        },
    ];
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Multi-octave value noise in `[0, 1]`, finest period 4 px.
pub fn value_noise(width: u32, height: u32, seed: u64) -> Vec<f64> {
    const OCTAVES: [(f64, f64); 5] = [(64.0, 1.0), (32.0, 0.9), (16.0, 0.8), (8.0, 0.8), (4.0, 0.7)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![0.0f64; width as usize * height as usize];
    for (period, amp) in OCTAVES {
        let gw = (width as f64 / period).ceil() as usize + 2;
        let gh = (height as f64 / period).ceil() as usize + 2;
        let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.gen::<f64>()).collect();
        for y in 0..height as usize {
            let fy = y as f64 / period;
            let (y0, ty) = (fy.floor() as usize, smoothstep(fy.fract()));
            for x in 0..width as usize {
                let fx = x as f64 / period;
                let (x0, tx) = (fx.floor() as usize, smoothstep(fx.fract()));
                let l = |i: usize, j: usize| lattice[j * gw + i];
                let top = l(x0, y0) * (1.0 - tx) + l(x0 + 1, y0) * tx;
                let bottom = l(x0, y0 + 1) * (1.0 - tx) + l(x0 + 1, y0 + 1) * tx;
                acc[y * width as usize + x] += amp * (top * (1.0 - ty) + bottom * ty);
            }
        }
    }
    let (lo, hi) = acc
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = (hi - lo).max(1e-12);
    acc.iter_mut().for_each(|v| *v = (*v - lo) / span);
    acc
}

/// Value-noise texture colored between the palette endpoints.
pub fn noise_texture(width: u32, height: u32, seed: u64, palette: Palette) -> Frame {
    let g = value_noise(width, height, seed);
    Frame::from_fn(width, height, 0, |x, y| {
        let t = g[y as usize * width as usize + x as usize];
        let mut rgb = [0u8; 3];
        for c in 0..3 {
            let (d, l) = (palette.dark[c] as f64, palette.light[c] as f64);
            rgb[c] = (d + (l - d) * t).round() as u8;
        }
        rgb
    })
}

/// High-contrast random `block x block` squares, a dense keypoint source.
pub fn block_texture(width: u32, height: u32, block: u32, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = block.max(1);
    let bw = width.div_ceil(block) as usize;
    let bh = height.div_ceil(block) as usize;
    let blocks: Vec<u8> = (0..bw * bh).map(|_| if rng.gen::<bool>() { 250 } else { 5 }).collect();
    Frame::from_fn(width, height, 0, |x, y| {
        let v = blocks[(y / block) as usize * bw + (x / block) as usize];
        [v, v, v]
    })
}

/// Renders a `w x h` view whose pixel `p` shows `texture` at `view * p`.
pub fn render_view(texture: &Frame, view: &Homography<f64>, w: u32, h: u32, index: usize) -> Frame {
    let m = *view.matrix();
    Frame::from_fn(w, h, index, |x, y| {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        let z = m[(2, 0)] * px + m[(2, 1)] * py + m[(2, 2)];
        let u = (m[(0, 0)] * px + m[(0, 1)] * py + m[(0, 2)]) / z;
        let v = (m[(1, 0)] * px + m[(1, 1)] * py + m[(1, 2)]) / z;
        sample_bilinear(texture, u, v).map(to_rgb).unwrap_or([0, 0, 0])
    })
}

/// View placing a `w x h` frame at the center of the texture.
pub fn centered_view(texture: &Frame, w: u32, h: u32) -> Homography<f64> {
    Homography::translation(
        (texture.width() as f64 - w as f64) / 2.0,
        (texture.height() as f64 - h as f64) / 2.0,
    )
}

/// Per-frame camera motion expressed in frame coordinates: a frame-`t` point
/// `p` sits at frame-`(t-1)` position `motion * p`.
pub fn pan(dx: f64, dy: f64) -> Homography<f64> {
    Homography::translation(dx, dy)
}

/// Zoom about the frame center; `s > 1` widens the field of view.
pub fn zoom(s: f64, w: u32, h: u32) -> Homography<f64> {
    Homography::about(Homography::scaling(s), w as f64 / 2.0, h as f64 / 2.0)
}

/// Roll about the frame center.
pub fn roll(degrees: f64, w: u32, h: u32) -> Homography<f64> {
    Homography::about(Homography::rotation(degrees.to_radians()), w as f64 / 2.0, h as f64 / 2.0)
}

/// A rendered clip together with its ground truth.
#[derive(Clone, Debug)]
pub struct CameraClip {
    pub seq: FrameSequence,
    /// `views[t]` maps frame-`t` coordinates into texture coordinates.
    pub views: Vec<Homography<f64>>,
    /// `truth[t]` maps frame-`t` coordinates into frame-0 coordinates.
    pub truth: Vec<Homography<f64>>,
}

/// Renders `n` frames starting at `start_view`, composing `motion` once per
/// frame.
pub fn camera_clip(
    texture: &Frame,
    start_view: Homography<f64>,
    motion: Homography<f64>,
    n: usize,
    size: (u32, u32),
    id: &str,
) -> CameraClip {
    camera_clip_with(texture, start_view, |_| motion, n, size, id)
}

/// Like [`camera_clip`] with a per-frame motion `motion_at(t)` for `t >= 1`.
pub fn camera_clip_with(
    texture: &Frame,
    start_view: Homography<f64>,
    motion_at: impl Fn(usize) -> Homography<f64>,
    n: usize,
    size: (u32, u32),
    id: &str,
) -> CameraClip {
    let mut views = Vec::with_capacity(n);
    let mut view = start_view;
    for t in 0..n {
        if t > 0 {
            view = view * motion_at(t);
        }
        views.push(view);
    }
    let frames: Vec<Frame> = views
        .iter()
        .enumerate()
        .map(|(t, v)| render_view(texture, v, size.0, size.1, t))
        .collect();
    let origin_inv = start_view.inverse();
    let truth = views.iter().map(|v| origin_inv * *v).collect();
    let seq = FrameSequence::new(frames, FrameRate::new(30, 1).expect("valid rate"), id).expect("frames share a size");
    CameraClip { seq, views, truth }
}

/// `n` copies of one frame.
pub fn static_clip(frame: &Frame, n: usize, id: &str) -> FrameSequence {
    let frames = (0..n).map(|t| frame.clone().with_index(t)).collect();
    FrameSequence::new(frames, FrameRate::new(30, 1).expect("valid rate"), id).expect("identical frames")
}

/// Multiplies every channel by `gain`, rounding and clamping.
pub fn scale_brightness(frame: &Frame, gain: f64) -> Frame {
    Frame::from_fn(frame.width(), frame.height(), frame.index(), |x, y| {
        let p = frame.pixel(x, y);
        [
            (p[0] as f64 * gain).round().clamp(0.0, 255.0) as u8,
            (p[1] as f64 * gain).round().clamp(0.0, 255.0) as u8,
            (p[2] as f64 * gain).round().clamp(0.0, 255.0) as u8,
        ]
    })
}

/// Pastes `patch` with its top-left pixel at `(x, y)`, clipping at the frame
/// edges.
pub fn paste(frame: &Frame, patch: &Frame, x: i64, y: i64) -> Frame {
    let (pw, ph) = (patch.width() as i64, patch.height() as i64);
    Frame::from_fn(frame.width(), frame.height(), frame.index(), |fx, fy| {
        let (u, v) = (fx as i64 - x, fy as i64 - y);
        if (0..pw).contains(&u) && (0..ph).contains(&v) {
            patch.pixel(u as u32, v as u32)
        } else {
            frame.pixel(fx, fy)
        }
    })
}

/// Overlays a rigid patch moving at a constant integer velocity in frame
/// coordinates and returns the clip with one annotation box per frame.
pub fn with_distractor(
    seq: &FrameSequence,
    patch: &Frame,
    start: (i64, i64),
    velocity: (i64, i64),
    label: &str,
) -> (FrameSequence, Vec<ForegroundAnnotation>) {
    let mut frames = Vec::with_capacity(seq.len());
    let mut annotations = Vec::with_capacity(seq.len());
    for (t, f) in seq.frames().iter().enumerate() {
        let (x, y) = (start.0 + velocity.0 * t as i64, start.1 + velocity.1 * t as i64);
        frames.push(paste(f, patch, x, y));
        let x0 = x.max(0) as f64;
        let y0 = y.max(0) as f64;
        let x1 = ((x + patch.width() as i64).min(f.width() as i64) as f64).max(x0);
        let y1 = ((y + patch.height() as i64).min(f.height() as i64) as f64).max(y0);
        annotations.push(ForegroundAnnotation {
            frame: t,
            boxes: vec![BoundingBox::new(x0, y0, x1 - x0, y1 - y0, label)],
        });
    }
    let seq = FrameSequence::new(frames, seq.frame_rate(), seq.source_id()).expect("frames keep their size");
    (seq, annotations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pan_clip_truth_is_translation() {
        let tex = noise_texture(128, 128, 1, Palette::GRAY);
        let clip = camera_clip(&tex, centered_view(&tex, 32, 32), pan(2.0, 0.0), 5, (32, 32), "p");
        assert_eq!(clip.seq.len(), 5);
        let t4 = clip.truth[4].apply_xy(0.0, 0.0);
        assert!((t4.0 - 8.0).abs() < 1e-12 && t4.1.abs() < 1e-12);
        // frame 1 pixel x shows what frame 0 shows at x + 2
        let f0 = &clip.seq.frames()[0];
        let f1 = &clip.seq.frames()[1];
        assert_eq!(f1.pixel(3, 7), f0.pixel(5, 7));
    }

    #[test]
    fn value_noise_spans_unit_interval() {
        let g = value_noise(64, 48, 3);
        let lo = g.iter().cloned().fold(f64::MAX, f64::min);
        let hi = g.iter().cloned().fold(f64::MIN, f64::max);
        assert!(lo.abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }
}
