use serde::{Deserialize, Serialize};

use crate::media_io::Frame;

pub const BINS_PER_CHANNEL: usize = 8;
pub const HISTOGRAM_BINS: usize = BINS_PER_CHANNEL * BINS_PER_CHANNEL * BINS_PER_CHANNEL;

/// Normalised 8x8x8 RGB histogram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    bins: Vec<f64>,
}

impl Histogram {
    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    #[inline]
    pub fn bin_index(rgb: [u8; 3]) -> usize {
        ((rgb[0] >> 5) as usize) << 6 | ((rgb[1] >> 5) as usize) << 3 | (rgb[2] >> 5) as usize
    }

    /// Mass in the bin holding `(r, g, b)` bin coordinates, each in `0..8`.
    pub fn at(&self, r: usize, g: usize, b: usize) -> f64 {
        self.bins[r << 6 | g << 3 | b]
    }
}

pub fn color_histogram(frame: &Frame) -> Histogram {
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    for px in frame.pixels().chunks_exact(3) {
        counts[Histogram::bin_index([px[0], px[1], px[2]])] += 1;
    }
    let total = (frame.width() as u64 * frame.height() as u64).max(1) as f64;
    Histogram {
        bins: counts.into_iter().map(|c| c as f64 / total).collect(),
    }
}

/// One minus histogram intersection, clamped to `[0, 1]`.
pub fn hist_distance(a: &Histogram, b: &Histogram) -> f64 {
    let inter: f64 = a.bins.iter().zip(&b.bins).map(|(x, y)| x.min(*y)).sum();
    (1.0 - inter).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solid_frames_fill_one_bin() {
        let black = color_histogram(&Frame::filled(4, 4, [0, 0, 0], 0));
        assert_eq!(black.at(0, 0, 0), 1.0);
        let white = color_histogram(&Frame::filled(4, 4, [255, 255, 255], 0));
        assert_eq!(white.at(7, 7, 7), 1.0);
        assert_eq!(hist_distance(&black, &white), 1.0);
        assert_eq!(hist_distance(&black, &black), 0.0);
    }

    #[test]
    fn half_and_half() {
        let f = Frame::from_fn(10, 4, 0, |x, _| if x < 5 { [0; 3] } else { [255; 3] });
        let h = color_histogram(&f);
        assert_eq!(h.at(0, 0, 0), 0.5);
        assert_eq!(h.at(7, 7, 7), 0.5);
        let all_black = color_histogram(&Frame::filled(10, 4, [0; 3], 0));
        assert!((hist_distance(&all_black, &h) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bin_mapping_uses_top_three_bits() {
        assert_eq!(Histogram::bin_index([31, 32, 255]), 1 << 3 | 7);
        assert_eq!(Histogram::bin_index([224, 0, 0]), 7 << 6);
    }
}
