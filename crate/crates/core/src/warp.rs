//! Inverse-mapped bilinear resampling.
//!
//! Continuous coordinates follow the pixel-area convention: pixel `(i, j)`
//! covers `[i, i + 1) x [j, j + 1)` and is sampled at its center. A frame of
//! size `w x h` therefore spans the rectangle `[0, w] x [0, h]`.

use crate::media_io::Frame;
use crate::vision::Homography;
use crate::Scalar;

/// Bilinear sample at continuous position `(u, v)`. Positions inside the
/// frame rectangle but outside the outermost pixel centers are clamped to the
/// edge; positions outside the rectangle yield `None`.
#[inline]
pub fn sample_bilinear(frame: &Frame, u: f64, v: f64) -> Option<[f64; 3]> {
    let (w, h) = (frame.width() as f64, frame.height() as f64);
    const EPS: f64 = 1e-9;
    if !(u >= -EPS && v >= -EPS && u <= w + EPS && v <= h + EPS) {
        return None;
    }
    let fx = (u - 0.5).clamp(0.0, w - 1.0);
    let fy = (v - 0.5).clamp(0.0, h - 1.0);
    let (x0, y0) = (fx.floor() as u32, fy.floor() as u32);
    let (x1, y1) = ((x0 + 1).min(frame.width() - 1), (y0 + 1).min(frame.height() - 1));
    let (ax, ay) = (fx - x0 as f64, fy - y0 as f64);
    let p00 = frame.pixel(x0, y0);
    let p10 = frame.pixel(x1, y0);
    let p01 = frame.pixel(x0, y1);
    let p11 = frame.pixel(x1, y1);
    let mut out = [0.0; 3];
    for c in 0..3 {
        let top = p00[c] as f64 * (1.0 - ax) + p10[c] as f64 * ax;
        let bottom = p01[c] as f64 * (1.0 - ax) + p11[c] as f64 * ax;
        out[c] = top * (1.0 - ay) + bottom * ay;
    }
    Some(out)
}

#[inline]
pub(crate) fn to_rgb(v: [f64; 3]) -> [u8; 3] {
    [
        v[0].round().clamp(0.0, 255.0) as u8,
        v[1].round().clamp(0.0, 255.0) as u8,
        v[2].round().clamp(0.0, 255.0) as u8,
    ]
}

/// Renders an `out_w x out_h` frame whose pixel `p` takes the value of `src`
/// at `w_matrix * p`. Samples outside `src` are black.
pub fn warp_frame<T: Scalar>(src: &Frame, w_matrix: &Homography<T>, out_size: (u32, u32)) -> Frame {
    let h = w_matrix.cast::<f64>();
    let m = *h.matrix();
    let (ow, oh) = out_size;
    Frame::from_fn(ow, oh, src.index(), |x, y| {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        let z = m[(2, 0)] * px + m[(2, 1)] * py + m[(2, 2)];
        let u = (m[(0, 0)] * px + m[(0, 1)] * py + m[(0, 2)]) / z;
        let v = (m[(1, 0)] * px + m[(1, 1)] * py + m[(1, 2)]) / z;
        sample_bilinear(src, u, v).map(to_rgb).unwrap_or([0, 0, 0])
    })
}
