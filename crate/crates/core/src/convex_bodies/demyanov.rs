//! Demyanov distance `d_D(A, B) = sup ‖y(x, A) − y(x, B)‖` over directions
//! exposing a single point of both bodies.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::measure::uniform_sphere;
use super::{argmax_vertex, ConvexBody, GeometryError, Result, DEFAULT_TIE_TOL};
use crate::linalg::dist;
use crate::rng;

const CHUNK: usize = 4096;

/// Monte Carlo estimate from below: the maximum over `n_dirs` uniform
/// directions at which both exposed points are unique.
pub fn demyanov_distance(a: &ConvexBody, b: &ConvexBody, n_dirs: usize, seed: u64) -> Result<f64> {
    a.check_dim(b.dim())?;
    if a.vertices().len() == 1 && b.vertices().len() == 1 {
        return Ok(dist(&a.vertices()[0], &b.vertices()[0]));
    }
    let d = a.dim();
    let chunks = n_dirs.max(1).div_ceil(CHUNK);
    let parts: Vec<Option<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c as u64);
            let count = CHUNK.min(n_dirs.max(1) - c * CHUNK);
            let mut best: Option<f64> = None;
            for _ in 0..count {
                let x = uniform_sphere(&mut r, d);
                let (i, ua) = argmax_vertex(a, &x, DEFAULT_TIE_TOL);
                let (j, ub) = argmax_vertex(b, &x, DEFAULT_TIE_TOL);
                if ua && ub {
                    let v = dist(&a.vertices()[i], &b.vertices()[j]);
                    best = Some(best.map_or(v, |w| w.max(v)));
                }
            }
            best
        })
        .collect();
    parts
        .into_iter()
        .flatten()
        .reduce(f64::max)
        .ok_or(GeometryError::NoCommonExposingDirection)
}

/// Exact value in dimensions 1 and 2 by walking the common refinement of
/// the two normal fans.
pub fn demyanov_distance_exact_2d(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    a.check_dim(b.dim())?;
    match a.dim() {
        1 => {
            let (va, vb) = (a.vertices(), b.vertices());
            let lo = (va[0][0] - vb[0][0]).abs();
            let hi = (va[va.len() - 1][0] - vb[vb.len() - 1][0]).abs();
            Ok(lo.max(hi))
        }
        2 => {
            let mut best: f64 = 0.0;
            fan_walk(a, b, |_, _, ia, ib| {
                best = best.max(dist(&a.vertices()[ia], &b.vertices()[ib]));
            });
            Ok(best)
        }
        d => Err(GeometryError::DimMismatch {
            expected: 2,
            found: d,
        }),
    }
}

/// Exact in dimension ≤ 2, Monte Carlo above.
pub fn demyanov_distance_auto(
    a: &ConvexBody,
    b: &ConvexBody,
    n_dirs: usize,
    seed: u64,
) -> Result<f64> {
    if a.dim() <= 2 {
        demyanov_distance_exact_2d(a, b)
    } else {
        demyanov_distance(a, b, n_dirs, seed)
    }
}

/// Outward edge-normal angles of a CCW polygon, each paired with the vertex
/// exposed just after it, sorted by angle.
fn fan(body: &ConvexBody) -> Vec<(f64, usize)> {
    let v = body.vertices();
    let k = v.len();
    if k == 1 {
        return Vec::new();
    }
    let mut out: Vec<(f64, usize)> = (0..k)
        .map(|i| {
            let (p, q) = (&v[i], &v[(i + 1) % k]);
            ((-(q[0] - p[0])).atan2(q[1] - p[1]).rem_euclid(2.0 * PI), (i + 1) % k)
        })
        .collect();
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Arcs of the common fan narrower than this are taken as rounding noise
/// between normals that agree in exact arithmetic.
const MIN_ARC: f64 = 1e-10;

/// Walks the common refinement of two planar normal fans, calling
/// `visit(start, length, ia, ib)` for every arc wider than [`MIN_ARC`] with
/// the vertices of `a` and `b` exposed on it.
pub(super) fn fan_walk<F: FnMut(f64, f64, usize, usize)>(a: &ConvexBody, b: &ConvexBody, mut visit: F) {
    let (fa, fb) = (fan(a), fan(b));
    let mut cuts: Vec<f64> = fa.iter().chain(&fb).map(|c| c.0).collect();
    cuts.sort_by(f64::total_cmp);
    if cuts.is_empty() {
        cuts.push(0.0);
    }
    let mut ia = fa.last().map_or(0, |c| c.1);
    let mut ib = fb.last().map_or(0, |c| c.1);
    let (mut pa, mut pb) = (0, 0);
    let k = cuts.len();
    for i in 0..k {
        let from = cuts[i];
        while pa < fa.len() && fa[pa].0 <= from {
            ia = fa[pa].1;
            pa += 1;
        }
        while pb < fb.len() && fb[pb].0 <= from {
            ib = fb[pb].1;
            pb += 1;
        }
        let len = if k == 1 {
            2.0 * PI
        } else {
            (cuts[(i + 1) % k] - from).rem_euclid(2.0 * PI)
        };
        if len > MIN_ARC {
            visit(from, len, ia, ib);
        }
    }
}

/// Hausdorff distance of planar bodies as `sup_u |h_A(u) − h_B(u)|`; on
/// each arc of the common fan the difference is `⟨a_i − b_j, u⟩`.
pub(super) fn hausdorff_2d(a: &ConvexBody, b: &ConvexBody) -> f64 {
    let mut best: f64 = 0.0;
    fan_walk(a, b, |from, len, ia, ib| {
        let (p, q) = (&a.vertices()[ia], &b.vertices()[ib]);
        let d = [p[0] - q[0], p[1] - q[1]];
        let g = |th: f64| (d[0] * th.cos() + d[1] * th.sin()).abs();
        let mut m = g(from).max(g(from + len));
        let phi = d[1].atan2(d[0]);
        let inside = |ang: f64| (ang - from).rem_euclid(2.0 * PI) <= len;
        if inside(phi) || inside(phi + PI) {
            m = m.max(d[0].hypot(d[1]));
        }
        best = best.max(m);
    });
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_bodies::hausdorff_distance;

    fn rotating(t: f64) -> ConvexBody {
        ConvexBody::segment(vec![0.0, 0.0], vec![t.sin(), t.cos()]).unwrap()
    }

    #[test]
    fn singletons_agree_with_hausdorff() {
        let a = ConvexBody::point(vec![1.0, 2.0]).unwrap();
        let b = ConvexBody::point(vec![4.0, 6.0]).unwrap();
        assert_eq!(demyanov_distance(&a, &b, 10, 0).unwrap(), 5.0);
        assert_eq!(demyanov_distance_exact_2d(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn identical_bodies() {
        let a = ConvexBody::regular_polygon(5, 1.0, [0.2, 0.1], 0.0).unwrap();
        assert_eq!(demyanov_distance(&a, &a, 1000, 1).unwrap(), 0.0);
        assert_eq!(demyanov_distance_exact_2d(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn rotating_segment_is_far_apart() {
        let (a, b) = (rotating(0.3), rotating(0.31));
        let mc = demyanov_distance(&a, &b, 2000, 2).unwrap();
        let exact = demyanov_distance_exact_2d(&a, &b).unwrap();
        assert!(mc >= 0.99, "{mc}");
        assert!(exact >= 1.0 - 1e-12 && mc <= exact + 1e-12);
        assert!(hausdorff_distance(&a, &b).unwrap() < 0.011);
    }

    #[test]
    fn planar_hausdorff_matches_projection() {
        use crate::convex_bodies::excess;
        use rand::Rng;
        let mut r = crate::rng::stream(9, 0);
        for it in 0..500 {
            let mut body = |k: usize| {
                let pts = (0..k).map(|_| vec![r.random::<f64>() - 0.5, 2.0 * r.random::<f64>() - 1.0]).collect();
                ConvexBody::new(pts).unwrap()
            };
            let (a, b) = (body(1 + it % 6), body(1 + (it / 6) % 6));
            let want = excess(&a, &b).unwrap().max(excess(&b, &a).unwrap());
            assert!((hausdorff_2d(&a, &b) - want).abs() < 1e-9);
        }
    }

    #[test]
    fn dominates_hausdorff() {
        let a = ConvexBody::regular_polygon(4, 1.0, [0.0, 0.0], 0.1).unwrap();
        let b = ConvexBody::regular_polygon(7, 1.3, [0.3, -0.2], 0.5).unwrap();
        let dh = hausdorff_distance(&a, &b).unwrap();
        assert!(demyanov_distance_exact_2d(&a, &b).unwrap() >= dh - 1e-12);
    }
}
