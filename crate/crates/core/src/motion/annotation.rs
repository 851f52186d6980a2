use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MotionError;

/// Axis-aligned labelled box in pixel coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub label: String,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64, label: impl Into<String>) -> Self {
        Self {
            x,
            y,
            w,
            h,
            label: label.into(),
        }
    }

    #[inline]
    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= self.x && px < self.x + self.w && py >= self.y && py < self.y + self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// Detections for one frame of a clip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForegroundAnnotation {
    pub frame: usize,
    pub boxes: Vec<BoundingBox>,
}

impl ForegroundAnnotation {
    pub fn validate(&self, width: u32, height: u32) -> Result<(), MotionError> {
        for b in &self.boxes {
            let inside = b.w >= 0.0
                && b.h >= 0.0
                && b.x >= 0.0
                && b.y >= 0.0
                && b.x + b.w <= width as f64
                && b.y + b.h <= height as f64;
            if !inside {
                return Err(MotionError::InvalidAnnotation {
                    frame: self.frame,
                    reason: format!(
                        "box ({}, {}, {}, {}) `{}` exceeds the {width}x{height} frame",
                        b.x, b.y, b.w, b.h, b.label
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Boxes annotated on `frame`, empty if the frame has no entry.
pub fn boxes_for_frame(annotations: &[ForegroundAnnotation], frame: usize) -> impl Iterator<Item = &BoundingBox> {
    annotations.iter().filter(move |a| a.frame == frame).flat_map(|a| a.boxes.iter())
}

/// Reads a per-clip sidecar: `[{frame, boxes: [{x, y, w, h, label}]}]`.
pub fn load_sidecar(path: &Path) -> Result<Vec<ForegroundAnnotation>, MotionError> {
    let text = fs::read_to_string(path).map_err(|e| MotionError::Sidecar {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| MotionError::Sidecar {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Re-bases annotations of a clip onto a sub-range starting at `start`.
pub fn slice_annotations(annotations: &[ForegroundAnnotation], start: usize, end: usize) -> Vec<ForegroundAnnotation> {
    annotations
        .iter()
        .filter(|a| a.frame >= start && a.frame < end)
        .map(|a| ForegroundAnnotation {
            frame: a.frame - start,
            boxes: a.boxes.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_schema() {
        let json = r#"[{"frame": 3, "boxes": [{"x": 1, "y": 2, "w": 10, "h": 20, "label": "person"}]}]"#;
        let ann: Vec<ForegroundAnnotation> = serde_json::from_str(json).unwrap();
        assert_eq!(ann[0].frame, 3);
        assert_eq!(ann[0].boxes[0].label, "person");
        assert!(ann[0].validate(64, 64).is_ok());
        assert!(ann[0].validate(8, 64).is_err());
        assert_eq!(boxes_for_frame(&ann, 3).count(), 1);
        assert_eq!(boxes_for_frame(&ann, 4).count(), 0);
    }

    #[test]
    fn containment_is_half_open() {
        let b = BoundingBox::new(10.0, 10.0, 5.0, 5.0, "face");
        assert!(b.contains(10.0, 14.9));
        assert!(!b.contains(15.0, 12.0));
    }

    #[test]
    fn slicing_rebases_frames() {
        let ann: Vec<_> = (0..6)
            .map(|f| ForegroundAnnotation {
                frame: f,
                boxes: vec![],
            })
            .collect();
        let s = slice_annotations(&ann, 2, 4);
        assert_eq!(s.iter().map(|a| a.frame).collect::<Vec<_>>(), vec![0, 1]);
    }
}
