use nalgebra::Point2;
use rayon::prelude::*;

use super::boundaries::{Shot, ShotDetectParams};
use crate::media_io::{luma, Frame, FrameSequence};
use crate::vision::{describe, estimate_fundamental_ransac, fast_detect, match_descriptors, Described, Keypoint};

const MAX_SCENE_POINTS: usize = 500;
const SCENE_MATCH_RATIO: f32 = 0.8;

/// First, middle and last frame of a shot (deduplicated).
pub fn representative_frames(shot: &Shot) -> Vec<usize> {
    let mut v = vec![shot.start, shot.start + shot.len() / 2, shot.end - 1];
    v.dedup();
    v
}

struct RepFeatures {
    points: Vec<Keypoint>,
    described: Described,
}

fn rep_features(frame: &Frame, threshold: u8) -> RepFeatures {
    let image = luma(frame);
    let points = fast_detect(&image, threshold, MAX_SCENE_POINTS);
    let described = describe(&image, &points);
    RepFeatures { points, described }
}

/// Correspondences between two frames that survive fundamental-matrix RANSAC.
fn consistent_matches(a: &RepFeatures, b: &RepFeatures, params: &ShotDetectParams) -> usize {
    let matches = match_descriptors(&a.described.descriptors, &b.described.descriptors, SCENE_MATCH_RATIO);
    if matches.len() < params.scene_match_threshold.max(8) {
        return 0;
    }
    let to_point = |f: &RepFeatures, i: usize| {
        let k = &f.points[f.described.indices[i]];
        Point2::new(k.x as f64, k.y as f64)
    };
    let src: Vec<_> = matches.pairs.iter().map(|m| to_point(a, m.a)).collect();
    let dst: Vec<_> = matches.pairs.iter().map(|m| to_point(b, m.b)).collect();
    estimate_fundamental_ransac(&src, &dst, &params.scene_ransac).map_or(0, |fit| fit.inlier_count())
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Assigns `scene_id`s: shots are linked when any pair of their
/// representative frames shares at least `scene_match_threshold`
/// epipolar-consistent matches; scenes are the connected components,
/// numbered in order of first appearance.
pub fn group_scenes(seq: &FrameSequence, shots: &[Shot], params: &ShotDetectParams) -> Vec<Shot> {
    let reps: Vec<Vec<RepFeatures>> = shots
        .par_iter()
        .map(|s| {
            representative_frames(s)
                .into_iter()
                .map(|i| rep_features(&seq.frames()[i], params.scene_fast_threshold))
                .collect()
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..shots.len())
        .flat_map(|i| (i + 1..shots.len()).map(move |j| (i, j)))
        .collect();
    let links: Vec<(usize, usize)> = pairs
        .into_par_iter()
        .filter(|&(i, j)| {
            reps[i].iter().any(|a| {
                reps[j]
                    .iter()
                    .any(|b| consistent_matches(a, b, params) >= params.scene_match_threshold)
            })
        })
        .collect();
    let mut parent: Vec<usize> = (0..shots.len()).collect();
    for (i, j) in links {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut ids = vec![usize::MAX; shots.len()];
    let mut next = 0;
    let mut out = shots.to_vec();
    for i in 0..shots.len() {
        let root = find(&mut parent, i);
        if ids[root] == usize::MAX {
            ids[root] = next;
            next += 1;
        }
        out[i].scene_id = ids[root];
    }
    out
}
