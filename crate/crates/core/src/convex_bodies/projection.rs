//! Nearest point of a polytope given by its vertices.
//!
//! Wolfe's minimum-norm-point method: an active-set scheme over the vertex
//! simplex. Each major step adds the vertex returned by the Frank–Wolfe
//! linear oracle; minor steps move to the affine minimiser of the active set
//! and drop vertices whose barycentric weight would turn negative. The loop
//! stops once the Frank–Wolfe duality gap certifies the distance to 1e-9.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{dot, norm};

const GAP_TOL: f64 = 1e-9;
const WEIGHT_EPS: f64 = 1e-12;

/// Outcome of a projection onto `hull(points)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vec<f64>,
    pub distance: f64,
    /// Barycentric weights on the input points (sparse: index, weight).
    pub weights: Vec<(usize, f64)>,
    /// Final Frank–Wolfe duality gap of `½‖x − p‖²`.
    pub gap: f64,
}

/// Projects `target` onto the convex hull of `points`.
pub fn nearest_point(points: &[Vec<f64>], target: &[f64]) -> Projection {
    let n = target.len();
    if n == 1 {
        return nearest_1d(points, target[0]);
    }
    let q: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(target).map(|(a, b)| a - b).collect())
        .collect();
    let scale = q.iter().map(|v| norm(v)).fold(0.0, f64::max).max(1e-300);

    let i0 = (0..q.len())
        .min_by(|&a, &b| dot(&q[a], &q[a]).total_cmp(&dot(&q[b], &q[b])))
        .expect("nonempty vertex list");
    let mut active = vec![i0];
    let mut lambda = vec![1.0];
    let mut x = q[i0].clone();
    let mut gap = f64::INFINITY;

    let max_major = 20 * (q.len() + n) + 100;
    for _ in 0..max_major {
        let xx = dot(&x, &x);
        let (j, min_val) = (0..q.len())
            .map(|i| (i, dot(&x, &q[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        gap = xx - min_val;
        let len = xx.sqrt();
        if gap <= GAP_TOL * len.max(GAP_TOL) || len <= 1e-15 * scale {
            break;
        }
        if active.contains(&j) {
            // the oracle returned an active vertex: affine minimiser reached
            break;
        }
        active.push(j);
        lambda.push(0.0);

        for _ in 0..(active.len() + 2) {
            let alpha = affine_minimizer(&q, &active);
            if alpha.iter().all(|&a| a > WEIGHT_EPS) {
                lambda = alpha;
                x = combine(&q, &active, &lambda);
                break;
            }
            // step from lambda towards alpha until a weight hits zero
            let mut theta = 1.0f64;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= WEIGHT_EPS {
                    let denom = l - a;
                    if denom > 0.0 {
                        theta = theta.min(l / denom);
                    }
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            let mut k = 0;
            let mut removed = false;
            while k < active.len() {
                if lambda[k] <= WEIGHT_EPS && active.len() > 1 {
                    active.remove(k);
                    lambda.remove(k);
                    removed = true;
                } else {
                    k += 1;
                }
            }
            if !removed && active.len() > 1 {
                // numerical stall: drop the smallest weight
                let (kmin, _) = lambda
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("nonempty");
                active.remove(kmin);
                lambda.remove(kmin);
            }
            let total: f64 = lambda.iter().sum();
            for l in lambda.iter_mut() {
                *l /= total;
            }
            x = combine(&q, &active, &lambda);
        }
    }

    let point: Vec<f64> = x.iter().zip(target).map(|(a, b)| a + b).collect();
    Projection {
        distance: norm(&x),
        point,
        weights: active.into_iter().zip(lambda).collect(),
        gap: gap.max(0.0),
    }
}

/// Projection onto a polygon whose vertices are in counter-clockwise
/// order (as kept by [`super::ConvexBody`] in the plane).
pub(crate) fn nearest_point_polygon(ccw: &[Vec<f64>], p: &[f64]) -> Projection {
    let k = ccw.len();
    let seg = |i: usize, j: usize| {
        let (a, b) = (&ccw[i], &ccw[j]);
        let e = [b[0] - a[0], b[1] - a[1]];
        let ee = e[0] * e[0] + e[1] * e[1];
        let s = if ee > 0.0 {
            (((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / ee).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = vec![a[0] + s * e[0], a[1] + s * e[1]];
        let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        (q, d, vec![(i, 1.0 - s), (j, s)])
    };
    if k == 1 {
        let (point, distance, _) = seg(0, 0);
        return Projection { point, distance, weights: vec![(0, 1.0)], gap: 0.0 };
    }
    let cross = |i: usize, j: usize| {
        let (a, b) = (&ccw[i], &ccw[j]);
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    };
    if k >= 3 && (0..k).all(|i| cross(i, (i + 1) % k) >= 0.0) {
        // inside: barycentric weights from the fan at vertex 0
        let mut weights = vec![(0, 1.0)];
        for i in 1..k - 1 {
            let (a, b, c) = (&ccw[0], &ccw[i], &ccw[i + 1]);
            let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            let l1 = ((c[0] - b[0]) * (p[1] - b[1]) - (c[1] - b[1]) * (p[0] - b[0])) / area;
            let l2 = ((a[0] - c[0]) * (p[1] - c[1]) - (a[1] - c[1]) * (p[0] - c[0])) / area;
            if l1 >= -1e-12 && l2 >= -1e-12 && l1 + l2 <= 1.0 + 1e-12 {
                weights = vec![(0, l1), (i, l2), (i + 1, 1.0 - l1 - l2)];
                break;
            }
        }
        return Projection { point: p.to_vec(), distance: 0.0, weights, gap: 0.0 };
    }
    let edges = if k == 2 { 1 } else { k };
    let (point, distance, weights) = (0..edges)
        .map(|i| seg(i, (i + 1) % k))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty polygon");
    Projection { point, distance, weights, gap: 0.0 }
}

fn nearest_1d(points: &[Vec<f64>], t: f64) -> Projection {
    let (mut lo, mut hi) = (0usize, 0usize);
    for (i, p) in points.iter().enumerate() {
        if p[0] < points[lo][0] {
            lo = i;
        }
        if p[0] > points[hi][0] {
            hi = i;
        }
    }
    let (a, b) = (points[lo][0], points[hi][0]);
    let (point, weights) = if t <= a {
        (a, vec![(lo, 1.0)])
    } else if t >= b {
        (b, vec![(hi, 1.0)])
    } else {
        let w = (t - a) / (b - a);
        (t, vec![(lo, 1.0 - w), (hi, w)])
    };
    Projection {
        point: vec![point],
        distance: (t - point).abs(),
        weights,
        gap: 0.0,
    }
}

fn combine(q: &[Vec<f64>], active: &[usize], lambda: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; q[0].len()];
    for (&i, &l) in active.iter().zip(lambda) {
        for (xi, qi) in x.iter_mut().zip(&q[i]) {
            *xi += l * qi;
        }
    }
    x
}

/// Barycentric coordinates of the minimum-norm point of `aff{q_i : i ∈ active}`.
fn affine_minimizer(q: &[Vec<f64>], active: &[usize]) -> Vec<f64> {
    let k = active.len();
    if k == 1 {
        return vec![1.0];
    }
    let n = q[0].len();
    let base = &q[active[0]];
    let b = DMatrix::from_fn(n, k - 1, |r, c| q[active[c + 1]][r] - base[r]);
    let rhs = DVector::from_fn(n, |r, _| -base[r]);
    let svd = b.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max().max(1e-300);
    let c = svd
        .solve(&rhs, eps)
        .unwrap_or_else(|_| DVector::zeros(k - 1));
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - c.sum());
    alpha.extend(c.iter());
    alpha
}
