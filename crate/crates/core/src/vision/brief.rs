//! 256-bit BRIEF descriptors over a fixed sampling pattern.

use serde::{Deserialize, Serialize};

use super::pattern::PATTERN;
use super::Keypoint;
use crate::media_io::LumaImage;

/// Keypoints closer than this to any border are not described.
pub const DESCRIPTOR_BORDER: u32 = 16;

const BOX_RADIUS: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Descriptor {
    pub bits: [u64; 4],
}

impl Descriptor {
    #[inline]
    pub fn hamming(&self, other: &Descriptor) -> u32 {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    pub fn bit(&self, k: usize) -> bool {
        (self.bits[k / 64] >> (k % 64)) & 1 == 1
    }

    /// 32-bit substring `k` (0..8), used as an LSH bucket key.
    #[inline]
    pub fn word32(&self, k: usize) -> u32 {
        (self.bits[k / 2] >> (32 * (k % 2))) as u32
    }
}

/// Output of [`describe`]: descriptors for the kept keypoints plus the input
/// indices that were too close to the border.
#[derive(Clone, Debug, Default)]
pub struct Described {
    /// Input index of each descriptor.
    pub indices: Vec<usize>,
    pub descriptors: Vec<Descriptor>,
    pub dropped: Vec<usize>,
}

/// 5x5 box sums with edge replication. Sums are kept unnormalised so no
/// precision is lost to rounding.
pub fn box_filter_5x5(image: &LumaImage) -> Vec<u16> {
    let (w, h) = (image.width() as i32, image.height() as i32);
    let clamp = |v: i32, hi: i32| v.clamp(0, hi - 1);
    let mut horiz = vec![0u16; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0u16;
            for dx in -BOX_RADIUS..=BOX_RADIUS {
                s += image.get(clamp(x + dx, w) as u32, y as u32) as u16;
            }
            horiz[(y * w + x) as usize] = s;
        }
    }
    let mut out = vec![0u16; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0u16;
            for dy in -BOX_RADIUS..=BOX_RADIUS {
                s += horiz[(clamp(y + dy, h) * w + x) as usize];
            }
            out[(y * w + x) as usize] = s;
        }
    }
    out
}

/// Describes each keypoint at least [`DESCRIPTOR_BORDER`] pixels from the
/// border; bit `k` is `S(p + u_k) < S(p + v_k)` on the box-filtered image.
pub fn describe(image: &LumaImage, points: &[Keypoint]) -> Described {
    let smooth = box_filter_5x5(image);
    describe_smoothed(&smooth, image.width(), image.height(), points)
}

pub(crate) fn describe_smoothed(smooth: &[u16], width: u32, height: u32, points: &[Keypoint]) -> Described {
    let mut out = Described::default();
    let w = width as i32;
    for (i, kp) in points.iter().enumerate() {
        let (px, py) = kp.pixel();
        if px < DESCRIPTOR_BORDER
            || py < DESCRIPTOR_BORDER
            || px + DESCRIPTOR_BORDER >= width
            || py + DESCRIPTOR_BORDER >= height
        {
            out.dropped.push(i);
            continue;
        }
        let (px, py) = (px as i32, py as i32);
        let at = |dx: i8, dy: i8| smooth[((py + dy as i32) * w + px + dx as i32) as usize];
        let mut bits = [0u64; 4];
        for (k, p) in PATTERN.iter().enumerate() {
            if at(p[0], p[1]) < at(p[2], p[3]) {
                bits[k / 64] |= 1 << (k % 64);
            }
        }
        out.indices.push(i);
        out.descriptors.push(Descriptor { bits });
    }
    out
}
