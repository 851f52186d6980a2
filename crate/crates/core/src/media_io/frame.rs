use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::MediaError;

/// One decoded RGB image.
///
/// Pixels are row-major 8-bit RGB triples. Frames are immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
    index: usize,
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Frame")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("index", &self.index)
            .finish_non_exhaustive()
    }
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>, index: usize) -> Result<Self, MediaError> {
        if width == 0 || height == 0 {
            return Err(MediaError::InvalidFrame(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(MediaError::InvalidFrame(format!(
                "{width}x{height} frame needs {expected} bytes, got {}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
            index,
        })
    }

    /// Solid-color frame.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3], index: usize) -> Self {
        Self::from_fn(width, height, index, |_, _| rgb)
    }

    /// Builds a frame by evaluating `f(x, y)` for every pixel.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: u32, height: u32, index: usize, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "frame dimensions must be positive");
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
            index,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }

    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }
}

/// Single-channel 8-bit image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LumaImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl LumaImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, MediaError> {
        if width == 0 || height == 0 || data.len() != width as usize * height as usize {
            return Err(MediaError::InvalidFrame(format!(
                "luma buffer of {} bytes does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn mean(&self) -> f64 {
        let sum: u64 = self.data.iter().map(|&v| v as u64).sum();
        sum as f64 / self.data.len() as f64
    }
}

/// Frames per second as an exact rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FrameRate(Ratio<u32>);

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Result<Self, MediaError> {
        if num == 0 || den == 0 {
            return Err(MediaError::InvalidFrame(format!(
                "frame rate {num}/{den} must have a positive numerator and denominator"
            )));
        }
        Ok(Self(Ratio::new(num, den)))
    }

    pub fn num(&self) -> u32 {
        *self.0.numer()
    }

    pub fn den(&self) -> u32 {
        *self.0.denom()
    }

    pub fn ratio(&self) -> Ratio<u32> {
        self.0
    }

    pub fn as_f64(&self) -> f64 {
        self.num() as f64 / self.den() as f64
    }
}

impl Default for FrameRate {
    fn default() -> Self {
        Self(Ratio::from_integer(30))
    }
}

impl fmt::Display for FrameRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.num(), self.den())
    }
}

#[derive(Serialize, Deserialize)]
struct FrameRateRepr {
    num: u32,
    den: u32,
}

impl Serialize for FrameRate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FrameRateRepr {
            num: self.num(),
            den: self.den(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FrameRate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = FrameRateRepr::deserialize(d)?;
        FrameRate::new(r.num, r.den).map_err(serde::de::Error::custom)
    }
}

/// Ordered frames sharing one size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    frame_rate: FrameRate,
    source_id: String,
}

impl FrameSequence {
    /// Validates shared dimensions and `0..n` frame indices.
    pub fn new(frames: Vec<Frame>, frame_rate: FrameRate, source_id: impl Into<String>) -> Result<Self, MediaError> {
        if let Some(first) = frames.first() {
            let dims = first.dimensions();
            for (i, f) in frames.iter().enumerate() {
                if f.dimensions() != dims {
                    return Err(MediaError::MixedDimensions {
                        index: i,
                        expected: dims,
                        found: f.dimensions(),
                    });
                }
                if f.index() != i {
                    return Err(MediaError::NonConsecutive {
                        expected: i,
                        found: f.index(),
                    });
                }
            }
        }
        Ok(Self {
            frames,
            frame_rate,
            source_id: source_id.into(),
        })
    }

    /// Like [`FrameSequence::new`] but renumbers the frames `0..n` first.
    pub fn from_frames(frames: Vec<Frame>, frame_rate: FrameRate, source_id: impl Into<String>) -> Result<Self, MediaError> {
        let frames = frames
            .into_iter()
            .enumerate()
            .map(|(i, f)| f.with_index(i))
            .collect();
        Self::new(frames, frame_rate, source_id)
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_rate(&self) -> FrameRate {
        self.frame_rate
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// `(width, height)` of the frames, `None` when empty.
    pub fn dimensions(&self) -> Option<(u32, u32)> {
        self.frames.first().map(Frame::dimensions)
    }

    /// Copies `start..end` into a new sequence renumbered from zero.
    pub fn slice(&self, start: usize, end: usize) -> FrameSequence {
        let frames = self.frames[start..end]
            .iter()
            .enumerate()
            .map(|(i, f)| f.clone().with_index(i))
            .collect();
        FrameSequence {
            frames,
            frame_rate: self.frame_rate,
            source_id: self.source_id.clone(),
        }
    }
}
