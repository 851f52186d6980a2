//! Keypoints, binary descriptors, matching and robust two-view geometry.

mod brief;
mod fast;
mod fundamental;
mod homography;
mod matching;
mod pattern;
mod ransac;

use thiserror::Error;

pub(crate) use brief::describe_smoothed;
pub use brief::{box_filter_5x5, describe, Described, Descriptor, DESCRIPTOR_BORDER};
pub use fast::{fast_detect, Keypoint, ARC_LEN, RING};
pub use fundamental::{eight_point, FundamentalMatrix};
pub use homography::{
    dlt_homography, frame_corners, hartley_normalization, symmetric_transfer_error, Homography, MIN_DET,
};
pub use matching::{match_descriptors, Match, MatchSet, EXHAUSTIVE_LIMIT};
pub use ransac::{
    estimate_fundamental_ransac, estimate_homography_ransac, is_degenerate_quad, required_iterations, RansacFit,
    RansacParams,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VisionError {
    #[error("need at least {needed} correspondences, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("point lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("degenerate point configuration")]
    Degenerate,
    #[error("only {got} inliers, need at least {needed}")]
    TooFewInliers { needed: usize, got: usize },
    #[error("matrix is singular (det = {0:e})")]
    Singular(f64),
}
