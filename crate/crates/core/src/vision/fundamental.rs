use nalgebra::{Matrix3, Point2, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::homography::{hartley_normalization, smallest_singular_vector, transform_points};
use super::VisionError;
use crate::Scalar;

/// Rank-2 epipolar matrix with unit Frobenius norm, so that
/// `x_dst^T F x_src = 0` for corresponding points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalMatrix<T: Scalar> {
    m: Matrix3<T>,
}

impl<T: Scalar> FundamentalMatrix<T> {
    /// Projects `m` onto rank 2 by zeroing its smallest singular value, then
    /// normalises to unit Frobenius norm with a positive largest entry.
    pub fn from_matrix(m: Matrix3<T>) -> Result<Self, VisionError> {
        let svd = m.try_svd(true, true, T::default_epsilon(), 0).ok_or(VisionError::Degenerate)?;
        let (u, v_t) = (svd.u.ok_or(VisionError::Degenerate)?, svd.v_t.ok_or(VisionError::Degenerate)?);
        let mut s = svd.singular_values;
        let imin = s.imin();
        s[imin] = T::zero();
        let r2 = u * Matrix3::from_diagonal(&s) * v_t;
        let norm = r2.norm();
        if norm.as_f64() <= 1e-15 {
            return Err(VisionError::Degenerate);
        }
        let mut r2 = r2 / norm;
        let pivot = r2.iter().copied().fold(T::zero(), |a, b| if b.abs() > a.abs() { b } else { a });
        if pivot < T::zero() {
            r2 = -r2;
        }
        Ok(Self { m: r2 })
    }

    pub fn matrix(&self) -> &Matrix3<T> {
        &self.m
    }

    /// Algebraic residual `x_dst^T F x_src`.
    pub fn residual(&self, src: Point2<T>, dst: Point2<T>) -> T {
        let x = Vector3::new(src.x, src.y, T::one());
        let xp = Vector3::new(dst.x, dst.y, T::one());
        xp.dot(&(self.m * x))
    }

    /// First-order geometric distance, in pixels.
    pub fn sampson_distance(&self, src: Point2<T>, dst: Point2<T>) -> T {
        let x = Vector3::new(src.x, src.y, T::one());
        let xp = Vector3::new(dst.x, dst.y, T::one());
        let fx = self.m * x;
        let ftxp = self.m.transpose() * xp;
        let r = xp.dot(&fx);
        let denom = fx.x * fx.x + fx.y * fx.y + ftxp.x * ftxp.x + ftxp.y * ftxp.y;
        if denom.as_f64() <= 1e-300 {
            return if r == T::zero() { T::zero() } else { T::max_value().unwrap_or_else(T::one) };
        }
        (r * r / denom).sqrt()
    }

    pub fn singular_values(&self) -> Vector3<T> {
        self.m.singular_values()
    }
}

impl<T: Scalar> Serialize for FundamentalMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m = &self.m;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for FundamentalMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = <[[T; 3]; 3]>::deserialize(d)?;
        FundamentalMatrix::from_matrix(Matrix3::from_fn(|r, c| rows[r][c])).map_err(serde::de::Error::custom)
    }
}

/// Normalised eight-point algorithm with rank-2 enforcement.
pub fn eight_point<T: Scalar>(src: &[Point2<T>], dst: &[Point2<T>]) -> Result<FundamentalMatrix<T>, VisionError> {
    if src.len() != dst.len() {
        return Err(VisionError::LengthMismatch(src.len(), dst.len()));
    }
    if src.len() < 8 {
        return Err(VisionError::TooFewPoints { needed: 8, got: src.len() });
    }
    let ts = hartley_normalization(src).ok_or(VisionError::Degenerate)?;
    let td = hartley_normalization(dst).ok_or(VisionError::Degenerate)?;
    let ns = transform_points(&ts, src);
    let nd = transform_points(&td, dst);
    let rows: Vec<[T; 9]> = ns
        .iter()
        .zip(nd.iter())
        .map(|(p, q)| [q.x * p.x, q.x * p.y, q.x, q.y * p.x, q.y * p.y, q.y, p.x, p.y, T::one()])
        .collect();
    let fn_ = smallest_singular_vector(&rows).ok_or(VisionError::Degenerate)?;
    // rank-2 in the normalised frame, again after denormalising
    let fn_ = FundamentalMatrix::from_matrix(fn_)?;
    FundamentalMatrix::from_matrix(td.transpose() * fn_.m * ts)
}
