//! FAST-9 segment-test corners.

use serde::{Deserialize, Serialize};

use crate::media_io::LumaImage;

/// Bresenham circle of radius 3, clockwise from 12 o'clock.
pub const RING: [(i32, i32); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

/// Minimum contiguous arc length.
pub const ARC_LEN: usize = 9;

/// Detected corner. Coordinates use the pixel-center convention: the pixel at
/// column `i` spans `[i, i + 1)` and its center is `i + 0.5`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f32,
    pub y: f32,
    pub score: f32,
    pub is_foreground: bool,
}

impl Keypoint {
    pub fn new(x: f32, y: f32, score: f32) -> Self {
        Self {
            x,
            y,
            score,
            is_foreground: false,
        }
    }

    /// Integer pixel containing the keypoint.
    pub fn pixel(&self) -> (u32, u32) {
        (self.x.max(0.0) as u32, self.y.max(0.0) as u32)
    }
}

#[inline]
fn ring_values(image: &LumaImage, x: u32, y: u32) -> [i16; 16] {
    let mut out = [0i16; 16];
    for (k, (dx, dy)) in RING.iter().enumerate() {
        out[k] = image.get((x as i32 + dx) as u32, (y as i32 + dy) as u32) as i16;
    }
    out
}

/// True if at least `ARC_LEN` contiguous ring pixels are all brighter than
/// `center + t` or all darker than `center - t`.
#[inline]
fn passes(ring: &[i16; 16], center: i16, t: i16) -> bool {
    let mut run_bright = 0;
    let mut run_dark = 0;
    // walk the ring twice to catch arcs that wrap around
    for k in 0..32 {
        let v = ring[k & 15];
        if v > center + t {
            run_bright += 1;
            run_dark = 0;
        } else if v < center - t {
            run_dark += 1;
            run_bright = 0;
        } else {
            run_bright = 0;
            run_dark = 0;
        }
        if run_bright >= ARC_LEN || run_dark >= ARC_LEN {
            return true;
        }
    }
    false
}

/// Sum of absolute ring differences beyond the threshold, taken over the
/// brighter or darker set, whichever is larger.
fn corner_score(ring: &[i16; 16], center: i16, t: i16) -> i32 {
    let (mut bright, mut dark) = (0i32, 0i32);
    for &v in ring {
        let d = (v - center) as i32;
        if d > t as i32 {
            bright += d - t as i32;
        } else if -d > t as i32 {
            dark += -d - t as i32;
        }
    }
    bright.max(dark)
}

/// FAST-9 detection with 3x3 non-maximum suppression, keeping the
/// `max_points` strongest corners.
///
/// Images smaller than 7x7 and flat images produce no corners. The result is
/// ordered by descending score, ties broken in raster order.
pub fn fast_detect(image: &LumaImage, threshold: u8, max_points: usize) -> Vec<Keypoint> {
    let (w, h) = (image.width(), image.height());
    if w < 7 || h < 7 || max_points == 0 {
        return Vec::new();
    }
    let t = threshold.max(1) as i16;
    let mut scores = vec![0i32; w as usize * h as usize];
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let c = image.get(x, y) as i16;
            // an arc of 9 covers at least two of the four compass points
            let compass = [
                image.get(x, y - 3) as i16,
                image.get(x + 3, y) as i16,
                image.get(x, y + 3) as i16,
                image.get(x - 3, y) as i16,
            ];
            let bright = compass.iter().filter(|&&v| v > c + t).count();
            let dark = compass.iter().filter(|&&v| v < c - t).count();
            if bright < 2 && dark < 2 {
                continue;
            }
            let ring = ring_values(image, x, y);
            if passes(&ring, c, t) {
                scores[y as usize * w as usize + x as usize] = corner_score(&ring, c, t);
            }
        }
    }

    let mut corners = Vec::new();
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let i = y as usize * w as usize + x as usize;
            let s = scores[i];
            if s == 0 || !is_local_max(&scores, w as usize, x as usize, y as usize) {
                continue;
            }
            corners.push(Keypoint::new(x as f32 + 0.5, y as f32 + 0.5, s as f32));
        }
    }
    // stable sort keeps raster order among equal scores
    corners.sort_by(|a, b| b.score.total_cmp(&a.score));
    corners.truncate(max_points);
    corners
}

/// 3x3 suppression; equal neighbours earlier in raster order win.
fn is_local_max(scores: &[i32], w: usize, x: usize, y: usize) -> bool {
    let s = scores[y * w + x];
    for dy in -1i32..=1 {
        for dx in -1i32..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let n = scores[(y as i32 + dy) as usize * w + (x as i32 + dx) as usize];
            let earlier = dy < 0 || (dy == 0 && dx < 0);
            if n > s || (earlier && n == s) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct segment test, written independently of the detector.
    fn oracle_is_corner(img: &LumaImage, x: u32, y: u32, t: i32) -> bool {
        if x < 3 || y < 3 || x + 3 >= img.width() || y + 3 >= img.height() {
            return false;
        }
        let c = img.get(x, y) as i32;
        let vals: Vec<i32> = RING
            .iter()
            .map(|(dx, dy)| img.get((x as i32 + dx) as u32, (y as i32 + dy) as u32) as i32)
            .collect();
        (0..16).any(|start| {
            (0..9).all(|k| vals[(start + k) % 16] > c + t) || (0..9).all(|k| vals[(start + k) % 16] < c - t)
        })
    }

    fn square_image() -> LumaImage {
        LumaImage::from_fn(20, 20, |x, y| if (6..14).contains(&x) && (6..14).contains(&y) { 220 } else { 20 })
    }

    #[test]
    fn uniform_image_has_no_corners() {
        let img = LumaImage::from_fn(32, 32, |_, _| 128);
        assert!(fast_detect(&img, 10, 100).is_empty());
    }

    #[test]
    fn square_corners_are_found() {
        let img = square_image();
        let all: Vec<(u32, u32)> = (0..20)
            .flat_map(|y| (0..20).map(move |x| (x, y)))
            .filter(|&(x, y)| oracle_is_corner(&img, x, y, 40))
            .collect();
        for corner in [(6, 6), (13, 6), (6, 13), (13, 13)] {
            assert!(all.contains(&corner), "oracle misses {corner:?}");
        }
        let found: Vec<(u32, u32)> = fast_detect(&img, 40, 100).iter().map(Keypoint::pixel).collect();
        for corner in [(6, 6), (13, 6), (6, 13), (13, 13)] {
            assert!(found.contains(&corner), "detector misses {corner:?}: {found:?}");
        }
        for p in &found {
            assert!(all.contains(p), "{p:?} is not a segment-test corner");
        }
    }

    #[test]
    fn saturated_threshold_finds_nothing() {
        assert!(fast_detect(&square_image(), 255, 100).is_empty());
    }

    #[test]
    fn tiny_image_is_empty() {
        let img = LumaImage::from_fn(6, 6, |x, _| (x * 40) as u8);
        assert!(fast_detect(&img, 1, 10).is_empty());
    }

    #[test]
    fn detections_match_oracle_on_noise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let img = LumaImage::from_fn(48, 40, |_, _| rng.gen());
        let found = fast_detect(&img, 30, usize::MAX);
        assert!(!found.is_empty());
        for kp in &found {
            let (x, y) = kp.pixel();
            assert!(oracle_is_corner(&img, x, y, 30));
            assert!(kp.score > 0.0);
            assert!(kp.x >= 0.0 && kp.x < 48.0 && kp.y >= 0.0 && kp.y < 40.0);
        }
    }

    #[test]
    fn max_points_keeps_strongest() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let img = LumaImage::from_fn(64, 64, |_, _| rng.gen());
        let all = fast_detect(&img, 20, usize::MAX);
        let top = fast_detect(&img, 20, 10);
        assert_eq!(top.len(), 10.min(all.len()));
        assert_eq!(&all[..top.len()], &top[..]);
        assert!(top.windows(2).all(|w| w[0].score >= w[1].score));
    }
}
