use serde::{Deserialize, Serialize};

use super::{HomographyTrack, MotionError};
use crate::media_io::Frame;
use crate::vision::frame_corners;
use crate::warp::{sample_bilinear, to_rgb};
use crate::Scalar;

/// Default mosaic canvas limit, in pixels.
pub const MAX_MOSAIC_AREA: u64 = 16_000_000;

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn contains_point(&self, x: f64, y: f64, tol: f64) -> bool {
        x >= self.x0 - tol && x <= self.x1 + tol && y >= self.y0 - tol && y <= self.y1 + tol
    }
}

/// Union of every frame's corners mapped into start-frame coordinates.
pub fn mosaic_bounds<T: Scalar>(track: &HomographyTrack<T>, w: u32, h: u32) -> Rect {
    let mut r = Rect {
        x0: f64::INFINITY,
        y0: f64::INFINITY,
        x1: f64::NEG_INFINITY,
        y1: f64::NEG_INFINITY,
    };
    let corners = frame_corners(T::lit(w as f64), T::lit(h as f64));
    for c in &track.cumulative {
        for p in corners.iter().map(|&p| c.apply(p)) {
            let (x, y) = (p.x.as_f64(), p.y.as_f64());
            r.x0 = r.x0.min(x);
            r.y0 = r.y0.min(y);
            r.x1 = r.x1.max(x);
            r.y1 = r.y1.max(y);
        }
    }
    if track.cumulative.is_empty() {
        return Rect {
            x0: 0.0,
            y0: 0.0,
            x1: w as f64,
            y1: h as f64,
        };
    }
    r
}

/// Composites every frame into start-frame coordinates; earlier frames win.
pub fn render_mosaic<T: Scalar>(frames: &[Frame], track: &HomographyTrack<T>, max_area: u64) -> Result<Frame, MotionError> {
    track.validate()?;
    if frames.len() != track.len() {
        return Err(MotionError::LengthMismatch {
            frames: frames.len(),
            track: track.len(),
        });
    }
    let (w, h) = frames[0].dimensions();
    let b = mosaic_bounds(track, w, h);
    // snap to the pixel grid, absorbing rounding noise at integer bounds
    let snap = |v: f64| if (v - v.round()).abs() < 1e-6 { v.round() } else { v };
    let (ox, oy) = (snap(b.x0).floor(), snap(b.y0).floor());
    let cw = (snap(b.x1).ceil() - ox) as u64;
    let ch = (snap(b.y1).ceil() - oy) as u64;
    if cw * ch > max_area {
        return Err(MotionError::MosaicTooLarge {
            width: cw,
            height: ch,
            max_area,
        });
    }
    let inverse: Vec<[f64; 9]> = track
        .cumulative
        .iter()
        .map(|c| {
            let m = c.inverse().cast::<f64>();
            let m = m.matrix();
            [
                m[(0, 0)],
                m[(0, 1)],
                m[(0, 2)],
                m[(1, 0)],
                m[(1, 1)],
                m[(1, 2)],
                m[(2, 0)],
                m[(2, 1)],
                m[(2, 2)],
            ]
        })
        .collect();
    Ok(Frame::from_fn(cw as u32, ch as u32, 0, |x, y| {
        let (px, py) = (x as f64 + 0.5 + ox, y as f64 + 0.5 + oy);
        for (f, m) in frames.iter().zip(&inverse) {
            let z = m[6] * px + m[7] * py + m[8];
            let u = (m[0] * px + m[1] * py + m[2]) / z;
            let v = (m[3] * px + m[4] * py + m[5]) / z;
            if let Some(rgb) = sample_bilinear(f, u, v) {
                return to_rgb(rgb);
            }
        }
        [0, 0, 0]
    }))
}
