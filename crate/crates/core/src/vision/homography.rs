use std::ops::Mul;

use nalgebra::{DMatrix, Matrix3, Point2, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::VisionError;
use crate::Scalar;

/// Determinant magnitude below which a matrix is treated as singular.
pub const MIN_DET: f64 = 1e-12;

/// Invertible 3x3 projective transform, normalised so `m[2][2] = 1` whenever
/// that entry is nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography<T: Scalar> {
    m: Matrix3<T>,
}

fn normalized<T: Scalar>(mut m: Matrix3<T>) -> Matrix3<T> {
    let h22 = m[(2, 2)];
    if h22.abs() > T::lit(1e-15) {
        m /= h22;
    }
    m
}

impl<T: Scalar> Homography<T> {
    pub fn new(m: Matrix3<T>) -> Result<Self, VisionError> {
        let m = normalized(m);
        let det = m.determinant();
        if !det.is_finite() || det.abs().as_f64() <= MIN_DET {
            return Err(VisionError::Singular(det.as_f64()));
        }
        Ok(Self { m })
    }

    pub fn from_rows(rows: [[T; 3]; 3]) -> Result<Self, VisionError> {
        Self::new(Matrix3::from_fn(|r, c| rows[r][c]))
    }

    pub fn identity() -> Self {
        Self { m: Matrix3::identity() }
    }

    pub fn translation(tx: T, ty: T) -> Self {
        let mut m = Matrix3::identity();
        m[(0, 2)] = tx;
        m[(1, 2)] = ty;
        Self { m }
    }

    /// Uniform scale about the origin. Panics if `s` is zero.
    pub fn scaling(s: T) -> Self {
        assert!(s != T::zero(), "scale must be nonzero");
        let mut m = Matrix3::identity();
        m[(0, 0)] = s;
        m[(1, 1)] = s;
        Self { m }
    }

    pub fn rotation(theta: T) -> Self {
        let (s, c) = (theta.sin(), theta.cos());
        let m = Matrix3::new(c, -s, T::zero(), s, c, T::zero(), T::zero(), T::zero(), T::one());
        Self { m }
    }

    /// `translate(c) * inner * translate(-c)`: applies `inner` about `(cx, cy)`.
    pub fn about(inner: Homography<T>, cx: T, cy: T) -> Self {
        Self::translation(cx, cy) * inner * Self::translation(-cx, -cy)
    }

    pub fn matrix(&self) -> &Matrix3<T> {
        &self.m
    }

    pub fn rows(&self) -> [[T; 3]; 3] {
        let m = &self.m;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn inverse(&self) -> Self {
        let inv = self.m.try_inverse().expect("homographies are invertible by construction");
        Self { m: normalized(inv) }
    }

    #[inline]
    pub fn apply(&self, p: Point2<T>) -> Point2<T> {
        let v = self.m * Vector3::new(p.x, p.y, T::one());
        Point2::new(v.x / v.z, v.y / v.z)
    }

    #[inline]
    pub fn apply_xy(&self, x: T, y: T) -> (T, T) {
        let p = self.apply(Point2::new(x, y));
        (p.x, p.y)
    }

    /// Max absolute entry difference after normalisation.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.m - other.m).abs().max()
    }

    /// Largest displacement between the images of the four corners of a
    /// `w x h` frame under `self` and `other`.
    pub fn corner_distance(&self, other: &Self, w: T, h: T) -> T {
        frame_corners(w, h)
            .iter()
            .map(|&p| nalgebra::distance(&self.apply(p), &other.apply(p)))
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn cast<U: Scalar>(&self) -> Homography<U> {
        Homography {
            m: self.m.map(|v| U::lit(v.as_f64())),
        }
    }
}

impl<T: Scalar> Default for Homography<T> {
    fn default() -> Self {
        Self::identity()
    }
}

/// `(a * b).apply(p) == a.apply(b.apply(p))`.
impl<T: Scalar> Mul for Homography<T> {
    type Output = Homography<T>;

    fn mul(self, rhs: Self) -> Self::Output {
        Homography { m: normalized(self.m * rhs.m) }
    }
}

impl<T: Scalar> Mul<&Homography<T>> for &Homography<T> {
    type Output = Homography<T>;

    fn mul(self, rhs: &Homography<T>) -> Self::Output {
        Homography { m: normalized(self.m * rhs.m) }
    }
}

impl<T: Scalar> Serialize for Homography<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Homography<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = <[[T; 3]; 3]>::deserialize(d)?;
        Homography::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Corners of the `[0, w] x [0, h]` frame rectangle, clockwise from the origin.
pub fn frame_corners<T: Scalar>(w: T, h: T) -> [Point2<T>; 4] {
    [
        Point2::new(T::zero(), T::zero()),
        Point2::new(w, T::zero()),
        Point2::new(w, h),
        Point2::new(T::zero(), h),
    ]
}

/// Similarity that moves the centroid to the origin and scales the mean
/// distance from it to `sqrt(2)`. `None` if all points coincide.
pub fn hartley_normalization<T: Scalar>(points: &[Point2<T>]) -> Option<Matrix3<T>> {
    let n = T::lit(points.len() as f64);
    let (sx, sy) = points.iter().fold((T::zero(), T::zero()), |(ax, ay), p| (ax + p.x, ay + p.y));
    let (cx, cy) = (sx / n, sy / n);
    let mean_dist = points
        .iter()
        .map(|p| ((p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy)).sqrt())
        .fold(T::zero(), |a, b| a + b)
        / n;
    if mean_dist.as_f64() <= 1e-12 {
        return None;
    }
    let s = T::lit(std::f64::consts::SQRT_2) / mean_dist;
    Some(Matrix3::new(s, T::zero(), -s * cx, T::zero(), s, -s * cy, T::zero(), T::zero(), T::one()))
}

pub(crate) fn transform_points<T: Scalar>(t: &Matrix3<T>, points: &[Point2<T>]) -> Vec<Point2<T>> {
    points
        .iter()
        .map(|p| {
            let v = t * Vector3::new(p.x, p.y, T::one());
            Point2::new(v.x / v.z, v.y / v.z)
        })
        .collect()
}

/// Right singular vector of the smallest singular value, reshaped row-major
/// to 3x3. Rows are zero-padded so the full null space is available.
pub(crate) fn smallest_singular_vector<T: Scalar>(rows: &[[T; 9]]) -> Option<Matrix3<T>> {
    let n = rows.len().max(9);
    let mut a = DMatrix::<T>::zeros(n, 9);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    let svd = a.try_svd(false, true, T::default_epsilon(), 0)?;
    let v_t = svd.v_t?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))?;
    let row = v_t.row(idx);
    Some(Matrix3::from_fn(|r, c| row[3 * r + c]))
}

/// Normalised direct linear transform over `n >= 4` correspondences.
pub fn dlt_homography<T: Scalar>(src: &[Point2<T>], dst: &[Point2<T>]) -> Result<Homography<T>, VisionError> {
    if src.len() != dst.len() {
        return Err(VisionError::LengthMismatch(src.len(), dst.len()));
    }
    if src.len() < 4 {
        return Err(VisionError::TooFewPoints { needed: 4, got: src.len() });
    }
    let ts = hartley_normalization(src).ok_or(VisionError::Degenerate)?;
    let td = hartley_normalization(dst).ok_or(VisionError::Degenerate)?;
    let ns = transform_points(&ts, src);
    let nd = transform_points(&td, dst);
    let (z, o) = (T::zero(), T::one());
    let mut rows = Vec::with_capacity(2 * ns.len());
    for (p, q) in ns.iter().zip(nd.iter()) {
        let (x, y, u, v) = (p.x, p.y, q.x, q.y);
        rows.push([-x, -y, -o, z, z, z, u * x, u * y, u]);
        rows.push([z, z, z, -x, -y, -o, v * x, v * y, v]);
    }
    let hn = smallest_singular_vector(&rows).ok_or(VisionError::Degenerate)?;
    let td_inv = td.try_inverse().ok_or(VisionError::Degenerate)?;
    Homography::new(td_inv * hn * ts).map_err(|_| VisionError::Degenerate)
}

/// Squared forward plus squared backward transfer distance, square-rooted.
#[inline]
pub fn symmetric_transfer_error<T: Scalar>(h: &Homography<T>, h_inv: &Homography<T>, src: Point2<T>, dst: Point2<T>) -> T {
    let fwd = nalgebra::distance_squared(&h.apply(src), &dst);
    let bwd = nalgebra::distance_squared(&h_inv.apply(dst), &src);
    (fwd + bwd).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<Point2<f64>> {
        (0..5).flat_map(|i| (0..4).map(move |j| Point2::new(10.0 + 37.0 * i as f64, 5.0 + 23.0 * j as f64))).collect()
    }

    #[test]
    fn multiplication_composes_left_to_right() {
        let a = Homography::translation(3.0, -1.0);
        let b = Homography::about(Homography::scaling(2.0), 5.0, 5.0);
        let p = Point2::new(1.0, 2.0);
        let lhs = (a * b).apply(p);
        let rhs = a.apply(b.apply(p));
        assert!(nalgebra::distance(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn scalar_multiples_act_identically() {
        let h = Homography::new(Matrix3::new(1.1, 0.02, 3.0, -0.01, 0.95, 1.0, 1e-4, 2e-4, 1.0)).unwrap();
        for k in [-3.0, 0.5, 7.0] {
            let hk = Homography::new(h.matrix() * k).unwrap();
            assert!(hk.max_abs_diff(&h) < 1e-12);
        }
    }

    #[test]
    fn singular_is_rejected() {
        assert!(Homography::<f64>::new(Matrix3::zeros()).is_err());
        assert!(Homography::<f64>::from_rows([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn dlt_recovers_projective_map() {
        let truth = Homography::new(Matrix3::new(0.9, 0.05, 12.0, -0.03, 1.02, -7.0, 2e-4, -1e-4, 1.0)).unwrap();
        let src = grid();
        let dst: Vec<_> = src.iter().map(|&p| truth.apply(p)).collect();
        let est = dlt_homography(&src, &dst).unwrap();
        assert!(est.max_abs_diff(&truth) < 1e-8);
        let est4 = dlt_homography(&src[..4], &dst[..4]);
        assert!(est4.is_ok());
    }

    #[test]
    fn dlt_works_in_f32() {
        let truth = Homography::<f32>::translation(4.0, 2.5);
        let src: Vec<Point2<f32>> = grid().iter().map(|p| Point2::new(p.x as f32, p.y as f32)).collect();
        let dst: Vec<_> = src.iter().map(|&p| truth.apply(p)).collect();
        let est = dlt_homography(&src, &dst).unwrap();
        assert!(est.corner_distance(&truth, 200.0, 100.0) < 1e-2);
    }

    #[test]
    fn hartley_normalization_statistics() {
        let pts = grid();
        let t = hartley_normalization(&pts).unwrap();
        let n = transform_points(&t, &pts);
        let cx: f64 = n.iter().map(|p| p.x).sum::<f64>() / n.len() as f64;
        let cy: f64 = n.iter().map(|p| p.y).sum::<f64>() / n.len() as f64;
        let md: f64 = n.iter().map(|p| (p.x * p.x + p.y * p.y).sqrt()).sum::<f64>() / n.len() as f64;
        assert!(cx.abs() < 1e-12 && cy.abs() < 1e-12);
        assert!((md - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(hartley_normalization(&[Point2::new(1.0, 1.0); 3]).is_none());
    }

    #[test]
    fn serializes_as_rows() {
        let h = Homography::translation(2.0, 3.0);
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(json, "[[1.0,0.0,2.0],[0.0,1.0,3.0],[0.0,0.0,1.0]]");
        let back: Homography<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h);
        assert!(serde_json::from_str::<Homography<f64>>("[[0,0,0],[0,0,0],[0,0,0]]").is_err());
    }
}
