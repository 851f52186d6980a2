pub mod media_io;
pub mod motion;
pub mod retrieval;
mod scalar;
pub mod shot_detect;
pub mod style;
pub mod synth;
pub mod transfer;
pub mod vision;
pub mod warp;

pub use scalar::Scalar;

pub type Homography64 = vision::Homography<f64>;
pub type Homography32 = vision::Homography<f32>;
pub type HomographyTrack64 = motion::HomographyTrack<f64>;
pub type HomographyTrack32 = motion::HomographyTrack<f32>;
