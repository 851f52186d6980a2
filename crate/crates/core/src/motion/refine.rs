//! Direct photometric refinement of a step homography.
//!
//! Gauss-Newton on the eight free entries of `H` (with `h22 = 1`) minimising
//! the Huber-weighted luma difference `I_next(H p) - I_prev(p)`, evaluated in
//! coordinates centred on the frame and scaled to unit half-width.

use nalgebra::{Matrix3, SMatrix, SVector};

use super::annotation::BoundingBox;
use crate::media_io::LumaImage;
use crate::vision::Homography;
use crate::Scalar;

/// Luma as zero-mean, unit-variance floats.
pub(crate) struct Plane {
    w: usize,
    h: usize,
    v: Vec<f32>,
}

impl Plane {
    pub(crate) fn new(image: &LumaImage) -> Self {
        let (w, h) = (image.width() as usize, image.height() as usize);
        let raw: Vec<f32> = image.data().iter().map(|&v| v as f32).collect();
        let n = raw.len().max(1) as f32;
        let mean = raw.iter().sum::<f32>() / n;
        let var = raw.iter().map(|v| (v - mean) * (v - mean)).sum::<f32>() / n;
        let inv_sd = if var > 1e-6 { 1.0 / var.sqrt() } else { 1.0 };
        let v: Vec<f32> = raw.iter().map(|x| (x - mean) * inv_sd).collect();
        Self { w, h, v }
    }

    /// Bilinear value and its exact gradient at continuous `(u, v)`, `None` unless the
    /// four neighbouring pixel centres exist.
    #[inline]
    fn sample(&self, u: f64, v: f64) -> Option<(f32, f32, f32)> {
        let fx = u - 0.5;
        let fy = v - 0.5;
        if !(fx >= 0.0 && fy >= 0.0 && fx < (self.w - 1) as f64 && fy < (self.h - 1) as f64) {
            return None;
        }
        let (x0, y0) = (fx as usize, fy as usize);
        let (ax, ay) = ((fx - x0 as f64) as f32, (fy - y0 as f64) as f32);
        let i = y0 * self.w + x0;
        let c = &self.v;
        let (p00, p10, p01, p11) = (c[i], c[i + 1], c[i + self.w], c[i + self.w + 1]);
        let gx = (p10 - p00) * (1.0 - ay) + (p11 - p01) * ay;
        let gy = (p01 - p00) * (1.0 - ax) + (p11 - p10) * ax;
        let top = p00 * (1.0 - ax) + p10 * ax;
        let bottom = p01 * (1.0 - ax) + p11 * ax;
        Some((top * (1.0 - ay) + bottom * ay, gx, gy))
    }
}

const HUBER_K: f32 = 0.25;
const MAX_ITERS: usize = 20;
/// Converged once no frame pixel moves by more than this between iterations.
const STEP_TOL_PX: f64 = 1e-5;
/// Evaluate every `GRID`-th pixel in each direction.
const GRID: usize = 1;

/// Refines `init` (mapping `prev` coordinates to `next` coordinates) and
/// reports the fraction of `prev` samples that land inside `next`. Returns
/// `None` if the iteration leaves the data or fails to reduce the cost.
pub(crate) fn refine_step<T: Scalar>(
    prev: &Plane,
    next: &Plane,
    prev_fg: &[&BoundingBox],
    next_fg: &[&BoundingBox],
    init: &Homography<T>,
) -> Option<(Homography<T>, f64)> {
    let (w, h) = (prev.w as f64, prev.h as f64);
    let s = w.max(h) / 2.0;
    // n maps pixel coordinates into the normalised frame
    let n = Matrix3::new(1.0 / s, 0.0, -w / 2.0 / s, 0.0, 1.0 / s, -h / 2.0 / s, 0.0, 0.0, 1.0);
    let n_inv = n.try_inverse()?;
    let init = init.cast::<f64>();
    let mut g = n * init.matrix() * n_inv;
    g /= g[(2, 2)];

    let samples: Vec<(f64, f64, f32)> = (0..prev.h)
        .step_by(GRID)
        .flat_map(|y| (0..prev.w).step_by(GRID).map(move |x| (x, y)))
        .filter(|&(x, y)| {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            !prev_fg.iter().any(|b| b.contains(px, py))
        })
        .map(|(x, y)| {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            ((px - w / 2.0) / s, (py - h / 2.0) / s, prev.v[y * prev.w + x])
        })
        .collect();
    if samples.len() < 64 {
        return None;
    }

    let cost_of = |g: &Matrix3<f64>| -> Option<(f64, usize)> {
        let mut cost = 0.0;
        let mut used = 0;
        for &(x, y, target) in &samples {
            if let Some((r, _, _, _)) = residual(g, x, y, target, next, next_fg, s, w, h) {
                cost += huber(r) as f64;
                used += 1;
            }
        }
        (used >= samples.len() / 4).then_some((cost / used as f64, used))
    };
    let (mut cost, mut used) = cost_of(&g)?;
    let initial_cost = cost;

    for _ in 0..MAX_ITERS {
        let mut jtj = SMatrix::<f64, 8, 8>::zeros();
        let mut jtr = SVector::<f64, 8>::zeros();
        for &(x, y, target) in &samples {
            let Some((r, gu, gv, (u, v, z))) = residual(&g, x, y, target, next, next_fg, s, w, h) else {
                continue;
            };
            let wt = huber_weight(r) as f64;
            // image gradient is per pixel; convert to normalised units
            let (gu, gv) = (gu as f64 * s, gv as f64 * s);
            let j = SVector::<f64, 8>::from([
                gu * x / z,
                gu * y / z,
                gu / z,
                gv * x / z,
                gv * y / z,
                gv / z,
                -(gu * u + gv * v) * x / z,
                -(gu * u + gv * v) * y / z,
            ]);
            jtj += j * j.transpose() * wt;
            jtr += j * (r as f64 * wt);
        }
        let delta = jtj.cholesky()?.solve(&(-jtr));
        let mut trial = g;
        for k in 0..8 {
            trial[(k / 3, k % 3)] += delta[k];
        }
        let Some((c, u)) = cost_of(&trial) else {
            break;
        };
        if c > cost {
            break;
        }
        let moved = Homography::new(trial).ok()?.corner_distance(&Homography::new(g).ok()?, 2.0, 2.0) * s;
        g = trial;
        cost = c;
        used = u;
        if moved < STEP_TOL_PX {
            break;
        }
    }
    if cost > initial_cost {
        return None;
    }
    let out = n_inv * g * n;
    let overlap = used as f64 / samples.len() as f64;
    Homography::new(out.map(T::lit)).ok().map(|h| (h, overlap))
}

#[inline]
fn huber(r: f32) -> f32 {
    let a = r.abs();
    if a <= HUBER_K {
        0.5 * r * r
    } else {
        HUBER_K * (a - 0.5 * HUBER_K)
    }
}

#[inline]
fn huber_weight(r: f32) -> f32 {
    let a = r.abs();
    if a <= HUBER_K {
        1.0
    } else {
        HUBER_K / a
    }
}

/// Residual at normalised point `(x, y)` plus the next-frame gradient and the
/// warped normalised position.
#[allow(clippy::too_many_arguments)]
#[inline]
fn residual(
    g: &Matrix3<f64>,
    x: f64,
    y: f64,
    target: f32,
    next: &Plane,
    next_fg: &[&BoundingBox],
    s: f64,
    w: f64,
    h: f64,
) -> Option<(f32, f32, f32, (f64, f64, f64))> {
    let z = g[(2, 0)] * x + g[(2, 1)] * y + g[(2, 2)];
    let u = (g[(0, 0)] * x + g[(0, 1)] * y + g[(0, 2)]) / z;
    let v = (g[(1, 0)] * x + g[(1, 1)] * y + g[(1, 2)]) / z;
    let (pu, pv) = (u * s + w / 2.0, v * s + h / 2.0);
    if next_fg.iter().any(|b| b.contains(pu, pv)) {
        return None;
    }
    let (val, gx, gy) = next.sample(pu, pv)?;
    Some((val - target, gx, gy, (u, v, z)))
}
