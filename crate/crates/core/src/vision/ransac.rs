//! Seeded RANSAC for homographies and fundamental matrices.

use nalgebra::Point2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fundamental::{eight_point, FundamentalMatrix};
use super::homography::{dlt_homography, symmetric_transfer_error, Homography};
use super::VisionError;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacParams {
    pub inlier_px: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Early-exit confidence that an all-inlier sample has been drawn.
    pub confidence: f64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            inlier_px: 1.0,
            max_iters: 1000,
            seed: 0,
            confidence: 0.99,
        }
    }
}

impl RansacParams {
    pub fn new(inlier_px: f64, max_iters: usize, seed: u64) -> Self {
        Self {
            inlier_px,
            max_iters,
            seed,
            ..Self::default()
        }
    }
}

/// Estimate plus the per-correspondence inlier flags.
#[derive(Clone, Debug)]
pub struct RansacFit<M> {
    pub model: M,
    pub inliers: Vec<bool>,
    pub iterations: usize,
}

impl<M> RansacFit<M> {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }

    pub fn inlier_indices(&self) -> Vec<usize> {
        self.inliers.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect()
    }
}

/// Iterations needed to draw one all-inlier sample of `sample_size` with
/// probability `confidence`, given inlier ratio `w`.
pub fn required_iterations(confidence: f64, w: f64, sample_size: usize) -> usize {
    if w >= 1.0 {
        return 1;
    }
    let p_good = w.powi(sample_size as i32);
    if p_good <= 0.0 {
        return usize::MAX;
    }
    let n = (1.0 - confidence).ln() / (1.0 - p_good).ln();
    if n.is_finite() {
        n.ceil().max(1.0) as usize
    } else {
        usize::MAX
    }
}

fn triangle_area<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> f64 {
    let (ax, ay) = (a.x.as_f64(), a.y.as_f64());
    let (bx, by) = (b.x.as_f64(), b.y.as_f64());
    let (cx, cy) = (c.x.as_f64(), c.y.as_f64());
    0.5 * ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)).abs()
}

/// True when any three of the four points span less than 1 px² of area.
pub fn is_degenerate_quad<T: Scalar>(pts: &[Point2<T>; 4]) -> bool {
    const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    TRIPLES
        .iter()
        .any(|t| triangle_area(pts[t[0]], pts[t[1]], pts[t[2]]) < 1.0)
}

#[derive(Clone, Copy)]
struct Score {
    count: usize,
    error_sum: f64,
}

impl Score {
    fn better_than(&self, other: &Score) -> bool {
        self.count > other.count || (self.count == other.count && self.error_sum < other.error_sum)
    }
}

fn score<T: Scalar>(errors: impl Iterator<Item = T>, threshold: f64, mask: &mut [bool]) -> Score {
    let mut s = Score { count: 0, error_sum: 0.0 };
    for (slot, e) in mask.iter_mut().zip(errors) {
        let e = e.as_f64();
        *slot = e < threshold;
        if *slot {
            s.count += 1;
            s.error_sum += e;
        }
    }
    s
}

fn gather<T: Scalar>(points: &[Point2<T>], mask: &[bool]) -> Vec<Point2<T>> {
    points.iter().zip(mask).filter(|(_, &m)| m).map(|(p, _)| *p).collect()
}

fn homography_errors<'a, T: Scalar>(
    h: &'a Homography<T>,
    src: &'a [Point2<T>],
    dst: &'a [Point2<T>],
) -> impl Iterator<Item = T> + 'a {
    let h_inv = h.inverse();
    src.iter()
        .zip(dst)
        .map(move |(&s, &d)| symmetric_transfer_error(h, &h_inv, s, d))
}

/// Robust homography mapping `src` onto `dst`.
///
/// Minimal 4-point samples with any three near-collinear points (in either
/// image) are skipped. The best hypothesis by inlier count under the
/// symmetric transfer error is refit by normalised DLT on its inliers, and
/// inliers are re-selected until the set is stable.
pub fn estimate_homography_ransac<T: Scalar>(
    src: &[Point2<T>],
    dst: &[Point2<T>],
    params: &RansacParams,
) -> Result<RansacFit<Homography<T>>, VisionError> {
    if src.len() != dst.len() {
        return Err(VisionError::LengthMismatch(src.len(), dst.len()));
    }
    let n = src.len();
    if n < 4 {
        return Err(VisionError::TooFewPoints { needed: 4, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(Homography<T>, Score)> = None;
    let mut mask = vec![false; n];
    let mut needed = params.max_iters;
    let mut iterations = 0;
    let mut any_valid_sample = false;

    while iterations < needed.min(params.max_iters) {
        iterations += 1;
        let idx = rand::seq::index::sample(&mut rng, n, 4);
        let s4 = [src[idx.index(0)], src[idx.index(1)], src[idx.index(2)], src[idx.index(3)]];
        let d4 = [dst[idx.index(0)], dst[idx.index(1)], dst[idx.index(2)], dst[idx.index(3)]];
        if is_degenerate_quad(&s4) || is_degenerate_quad(&d4) {
            continue;
        }
        any_valid_sample = true;
        let Ok(h) = dlt_homography(&s4, &d4) else {
            continue;
        };
        let s = score(homography_errors(&h, src, dst), params.inlier_px, &mut mask);
        if best.as_ref().is_none_or(|(_, b)| s.better_than(b)) {
            best = Some((h, s));
            needed = required_iterations(params.confidence, s.count as f64 / n as f64, 4);
        }
    }
    if !any_valid_sample {
        return Err(VisionError::Degenerate);
    }
    let (mut model, best_score) = best.ok_or(VisionError::Degenerate)?;
    if best_score.count < 4 {
        return Err(VisionError::TooFewInliers { needed: 4, got: best_score.count });
    }

    score(homography_errors(&model, src, dst), params.inlier_px, &mut mask);
    for _ in 0..5 {
        let refit = dlt_homography(&gather(src, &mask), &gather(dst, &mask))?;
        let mut next = vec![false; n];
        let s = score(homography_errors(&refit, src, dst), params.inlier_px, &mut next);
        if s.count < 4 {
            break;
        }
        model = refit;
        let stable = next == mask;
        mask = next;
        if stable {
            break;
        }
    }
    let count = mask.iter().filter(|&&b| b).count();
    if count < 4 {
        return Err(VisionError::TooFewInliers { needed: 4, got: count });
    }
    Ok(RansacFit {
        model,
        inliers: mask,
        iterations,
    })
}

/// Robust fundamental matrix from `src`/`dst` correspondences, scored by
/// Sampson distance.
pub fn estimate_fundamental_ransac<T: Scalar>(
    src: &[Point2<T>],
    dst: &[Point2<T>],
    params: &RansacParams,
) -> Result<RansacFit<FundamentalMatrix<T>>, VisionError> {
    if src.len() != dst.len() {
        return Err(VisionError::LengthMismatch(src.len(), dst.len()));
    }
    let n = src.len();
    if n < 8 {
        return Err(VisionError::TooFewPoints { needed: 8, got: n });
    }
    let errors = |f: &FundamentalMatrix<T>| {
        let f = *f;
        src.iter().zip(dst).map(move |(&s, &d)| f.sampson_distance(s, d))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(FundamentalMatrix<T>, Score)> = None;
    let mut mask = vec![false; n];
    let mut needed = params.max_iters;
    let mut iterations = 0;
    while iterations < needed.min(params.max_iters) {
        iterations += 1;
        let idx = rand::seq::index::sample(&mut rng, n, 8);
        let s8: Vec<_> = idx.iter().map(|i| src[i]).collect();
        let d8: Vec<_> = idx.iter().map(|i| dst[i]).collect();
        let Ok(f) = eight_point(&s8, &d8) else {
            continue;
        };
        let s = score(errors(&f), params.inlier_px, &mut mask);
        if best.as_ref().is_none_or(|(_, b)| s.better_than(b)) {
            best = Some((f, s));
            needed = required_iterations(params.confidence, s.count as f64 / n as f64, 8);
        }
    }
    let Some((mut model, best_score)) = best else {
        return Err(VisionError::TooFewInliers { needed: 8, got: 0 });
    };
    if best_score.count < 8 {
        return Err(VisionError::TooFewInliers { needed: 8, got: best_score.count });
    }
    score(errors(&model), params.inlier_px, &mut mask);
    if let Ok(refit) = eight_point(&gather(src, &mask), &gather(dst, &mask)) {
        let mut next = vec![false; n];
        let s = score(errors(&refit), params.inlier_px, &mut next);
        if s.count >= best_score.count {
            model = refit;
            mask = next;
        }
    }
    Ok(RansacFit {
        model,
        inliers: mask,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix3, Matrix3x4, Vector3, Vector4};
    use rand::Rng;

    fn spread_points(seed: u64, n: usize) -> Vec<Point2<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| Point2::new(rng.gen_range(0.0..640.0), rng.gen_range(0.0..480.0))).collect()
    }

    #[test]
    fn identity_correspondences() {
        let src = spread_points(1, 8);
        let fit = estimate_homography_ransac(&src, &src, &RansacParams::new(1.0, 1000, 0)).unwrap();
        assert!(fit.model.max_abs_diff(&Homography::identity()) < 1e-6);
        assert!(fit.inliers.iter().all(|&b| b));
    }

    #[test]
    fn translation_with_outliers() {
        let truth = Homography::translation(5.0, -3.0);
        let mut src = spread_points(2, 20);
        let mut dst: Vec<_> = src.iter().map(|&p| truth.apply(p)).collect();
        let outliers = spread_points(3, 20);
        src.extend_from_slice(&outliers[..10]);
        dst.extend_from_slice(&outliers[10..]);
        let fit = estimate_homography_ransac(&src, &dst, &RansacParams::new(1.0, 1000, 42)).unwrap();
        for i in 0..20 {
            assert!(fit.inliers[i]);
            assert!(nalgebra::distance(&fit.model.apply(src[i]), &dst[i]) < 0.1);
        }
        assert!(fit.inliers[20..].iter().all(|&b| !b));
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let src: Vec<_> = (0..4).map(|i| Point2::new(10.0 * i as f64, 5.0 * i as f64)).collect();
        let dst = src.clone();
        assert!(matches!(
            estimate_homography_ransac(&src, &dst, &RansacParams::default()),
            Err(VisionError::Degenerate)
        ));
    }

    #[test]
    fn too_few_points_for_homography() {
        let p = spread_points(4, 3);
        assert!(matches!(
            estimate_homography_ransac(&p, &p, &RansacParams::default()),
            Err(VisionError::TooFewPoints { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let truth = Homography::about(Homography::rotation(0.05), 320.0, 240.0);
        let mut src = spread_points(5, 60);
        let mut dst: Vec<_> = src.iter().map(|&p| truth.apply(p)).collect();
        src.extend(spread_points(6, 30));
        dst.extend(spread_points(7, 30));
        let params = RansacParams::new(1.0, 1000, 9);
        let a = estimate_homography_ransac(&src, &dst, &params).unwrap();
        let b = estimate_homography_ransac(&src, &dst, &params).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.inliers, b.inliers);
    }

    #[test]
    fn required_iterations_matches_closed_form() {
        // log(0.01) / log(1 - 0.5^4) = 71.36
        assert_eq!(required_iterations(0.99, 0.5, 4), 72);
        assert_eq!(required_iterations(0.99, 1.0, 4), 1);
        assert_eq!(required_iterations(0.99, 0.0, 4), usize::MAX);
    }

    fn two_view_scene(seed: u64, n: usize) -> (Vec<Point2<f64>>, Vec<Point2<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = Matrix3::new(500.0, 0.0, 320.0, 0.0, 500.0, 240.0, 0.0, 0.0, 1.0);
        let p1 = k * Matrix3x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let (c, s) = (0.1f64.cos(), 0.1f64.sin());
        let rt = Matrix3x4::new(c, 0.0, s, -0.5, 0.0, 1.0, 0.0, 0.1, -s, 0.0, c, 0.05);
        let p2 = k * rt;
        let project = |p: &nalgebra::Matrix3x4<f64>, x: &Vector4<f64>| {
            let v: Vector3<f64> = p * x;
            Point2::new(v.x / v.z, v.y / v.z)
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        for _ in 0..n {
            let x = Vector4::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.5..1.5), rng.gen_range(4.0..9.0), 1.0);
            a.push(project(&p1, &x));
            b.push(project(&p2, &x));
        }
        (a, b)
    }

    #[test]
    fn fundamental_from_two_views() {
        let (mut src, mut dst) = two_view_scene(11, 80);
        src.extend(spread_points(12, 20));
        dst.extend(spread_points(13, 20));
        let params = RansacParams::new(1.0, 1000, 3);
        let fit = estimate_fundamental_ransac(&src, &dst, &params).unwrap();
        assert!(fit.inlier_count() >= 80);
        for i in fit.inlier_indices() {
            assert!(fit.model.sampson_distance(src[i], dst[i]) < 1.0);
        }
        assert!(fit.inliers[..80].iter().all(|&b| b));
        assert!(fit.model.singular_values().min() < 1e-9);
    }

    #[test]
    fn fundamental_on_planar_scene() {
        let h = Homography::new(Matrix3::new(1.05, 0.02, 8.0, -0.01, 0.98, -4.0, 1e-5, 2e-5, 1.0)).unwrap();
        let src = spread_points(14, 40);
        let dst: Vec<_> = src.iter().map(|&p| h.apply(p)).collect();
        let fit = estimate_fundamental_ransac(&src, &dst, &RansacParams::new(1.0, 1000, 5)).unwrap();
        for i in fit.inlier_indices() {
            let x = Vector3::new(src[i].x, src[i].y, 1.0);
            let xp = Vector3::new(dst[i].x, dst[i].y, 1.0);
            let r = xp.dot(&(fit.model.matrix() * x));
            // unit-norm F on pixel coordinates: residual scale ~ |x||x'|
            assert!(r.abs() / (x.norm() * xp.norm()) < 1e-6, "residual {r}");
        }
        assert!(fit.inlier_count() >= 8);
    }

    #[test]
    fn fundamental_needs_eight() {
        let p = spread_points(15, 7);
        assert!(matches!(
            estimate_fundamental_ransac(&p, &p, &RansacParams::default()),
            Err(VisionError::TooFewPoints { needed: 8, got: 7 })
        ));
    }
}
