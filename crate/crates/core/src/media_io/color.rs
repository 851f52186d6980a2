//! Full-range BT.601 conversions. YUV only exists at the file boundary.

use super::{Frame, LumaImage};

#[inline]
pub(crate) fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[inline]
pub fn luma_of(rgb: [u8; 3]) -> u8 {
    clamp_u8(0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64)
}

/// `Y = round(0.299 R + 0.587 G + 0.114 B)` per pixel.
pub fn luma(frame: &Frame) -> LumaImage {
    let data = frame
        .pixels()
        .chunks_exact(3)
        .map(|p| luma_of([p[0], p[1], p[2]]))
        .collect();
    LumaImage::new(frame.width(), frame.height(), data).expect("dimensions come from a valid frame")
}

/// Mean of the per-pixel luma values.
pub fn mean_luma(frame: &Frame) -> f64 {
    let sum: u64 = frame
        .pixels()
        .chunks_exact(3)
        .map(|p| luma_of([p[0], p[1], p[2]]) as u64)
        .sum();
    sum as f64 / (frame.width() as u64 * frame.height() as u64) as f64
}

#[inline]
pub fn rgb_to_yuv(rgb: [u8; 3]) -> [u8; 3] {
    let (r, g, b) = (rgb[0] as f64, rgb[1] as f64, rgb[2] as f64);
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let u = 128.0 - 0.168_736 * r - 0.331_264 * g + 0.5 * b;
    let v = 128.0 + 0.5 * r - 0.418_688 * g - 0.081_312 * b;
    [clamp_u8(y), clamp_u8(u), clamp_u8(v)]
}

#[inline]
pub fn yuv_to_rgb(y: f64, u: f64, v: f64) -> [u8; 3] {
    let (u, v) = (u - 128.0, v - 128.0);
    [
        clamp_u8(y + 1.402 * v),
        clamp_u8(y - 0.344_136 * u - 0.714_136 * v),
        clamp_u8(y + 1.772 * u),
    ]
}
