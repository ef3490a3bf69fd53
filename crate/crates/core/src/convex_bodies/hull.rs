//! Hull construction and affine frames.

use nalgebra::DMatrix;

use crate::linalg::{dist, dot, sub};

pub(super) fn hull_1d(points: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= tol {
        vec![vec![lo]]
    } else {
        vec![vec![lo], vec![hi]]
    }
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
pub(super) fn hull_2d(points: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut uniq: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    for p in pts {
        if uniq.last().is_none_or(|q| dist(q, &p) > tol) {
            uniq.push(p);
        }
    }
    // merge near-duplicates that the lexicographic sort separated
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(uniq.len());
    for p in uniq {
        if !pts.iter().any(|q| dist(q, &p) <= tol) {
            pts.push(p);
        }
    }
    if pts.len() <= 2 {
        return pts;
    }
    let scale = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0);
    // area tolerance: collinearity is judged relative to the body's scale
    let eps = tol.max(1e-14) * scale;
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 {
            let n = lower.len();
            let c = cross(&lower[n - 2], &lower[n - 1], p);
            if c <= eps * dist(&lower[n - 2], p) {
                lower.pop();
            } else {
                break;
            }
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 {
            let n = upper.len();
            let c = cross(&upper[n - 2], &upper[n - 1], p);
            if c <= eps * dist(&upper[n - 2], p) {
                upper.pop();
            } else {
                break;
            }
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && dist(&lower[0], &lower[1]) <= tol {
        lower.truncate(1);
    }
    lower
}

pub(super) fn dedup(points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| dist(q, &p) <= tol) {
            out.push(p);
        }
    }
    out
}

/// Orthonormal frame of the affine hull of a point set.
#[derive(Debug, Clone)]
pub struct AffineFrame {
    pub origin: Vec<f64>,
    /// Orthonormal spanning directions, one per intrinsic dimension.
    pub basis: Vec<Vec<f64>>,
}

impl AffineFrame {
    pub fn of(points: &[Vec<f64>], tol: f64) -> AffineFrame {
        let origin = points[0].clone();
        let n = origin.len();
        let k = points.len() - 1;
        if k == 0 {
            return AffineFrame {
                origin,
                basis: Vec::new(),
            };
        }
        let m = DMatrix::from_fn(n, k, |i, j| points[j + 1][i] - origin[i]);
        let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(tol);
        let svd = m.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let mut basis = Vec::new();
        for (j, s) in svd.singular_values.iter().enumerate() {
            if *s > 1e-9 * scale && *s > tol {
                basis.push(u.column(j).iter().cloned().collect());
            }
        }
        AffineFrame { origin, basis }
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn to_local(&self, p: &[f64]) -> Vec<f64> {
        let d = sub(p, &self.origin);
        self.basis.iter().map(|b| dot(b, &d)).collect()
    }

    pub fn to_ambient(&self, q: &[f64]) -> Vec<f64> {
        let mut p = self.origin.clone();
        for (b, c) in self.basis.iter().zip(q) {
            for (pi, bi) in p.iter_mut().zip(b) {
                *pi += c * bi;
            }
        }
        p
    }
}
