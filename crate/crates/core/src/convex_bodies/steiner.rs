//! Steiner points, classical and generalized.
//!
//! The classical Steiner point averages the exposed point `y(x, C)` over
//! directions `x` uniform in the unit ball. The generalized point `St_μ`
//! replaces the uniform law by `μ` and the exposed point by the Steiner
//! point of the exposed face. In the plane both reduce to weighting each
//! vertex by the mass its normal cone receives.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use super::hull::{hull_1d, hull_2d, AffineFrame};
use super::measure::{uniform_sphere, AngularProfile, SmoothBallMeasure};
use super::{argmax_vertex, exposed_unchecked, ConvexBody, Exposed, Result, DEFAULT_TIE_TOL};
use crate::linalg::norm;
use crate::rng;

const CHUNK: usize = 4096;
const NESTED_SAMPLES: usize = 64;

/// Monte Carlo estimate with per-coordinate standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinerEstimate {
    pub point: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n_samples: usize,
}

impl SteinerEstimate {
    fn exact(point: Vec<f64>) -> Self {
        let d = point.len();
        SteinerEstimate {
            point,
            std_error: vec![0.0; d],
            n_samples: 0,
        }
    }

    /// Euclidean norm of the standard-error vector.
    pub fn error_norm(&self) -> f64 {
        norm(&self.std_error)
    }
}

/// Upper bracket `√(2(n+1)/π)` of the sharp Lipschitz constant of `St`.
pub fn steiner_lipschitz_upper(n: usize) -> f64 {
    (2.0 * (n as f64 + 1.0) / PI).sqrt()
}

/// Lower bracket `√(2n/π)`.
pub fn steiner_lipschitz_lower(n: usize) -> f64 {
    (2.0 * n as f64 / PI).sqrt()
}

/// Vertex weights of a CCW polygon: the `profile`-mass of each normal cone.
fn polygon_weights(poly: &[Vec<f64>], profile: &AngularProfile) -> Vec<f64> {
    let k = poly.len();
    if k == 1 {
        return vec![1.0];
    }
    // outward normal angle of edge i -> i+1
    let normal: Vec<f64> = (0..k)
        .map(|i| {
            let (a, b) = (&poly[i], &poly[(i + 1) % k]);
            (-(b[0] - a[0])).atan2(b[1] - a[1])
        })
        .collect();
    (0..k)
        .map(|i| {
            let from = normal[(i + k - 1) % k];
            let len = (normal[i] - from).rem_euclid(2.0 * PI);
            profile.arc_mass(from, len)
        })
        .collect()
}

fn weighted_sum(points: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; points[0].len()];
    for (p, w) in points.iter().zip(weights) {
        for (o, x) in out.iter_mut().zip(p) {
            *o += w * x;
        }
    }
    out
}

fn exact_in_frame(points: &[Vec<f64>], tol: f64) -> Option<Vec<f64>> {
    let frame = AffineFrame::of(points, tol);
    let local: Vec<Vec<f64>> = points.iter().map(|p| frame.to_local(p)).collect();
    let st = match frame.intrinsic_dim() {
        0 => Vec::new(),
        1 => {
            let h = hull_1d(&local, tol);
            vec![0.5 * (h[0][0] + h[h.len() - 1][0])]
        }
        2 => {
            let poly = hull_2d(&local, tol);
            weighted_sum(&poly, &polygon_weights(&poly, &AngularProfile::Uniform))
        }
        _ => return None,
    };
    Some(frame.to_ambient(&st))
}

/// Exact Steiner point when the affine hull of `C` has dimension at most 2.
pub fn steiner_point_exact(body: &ConvexBody) -> Option<Vec<f64>> {
    match body.dim() {
        1 => {
            let v = body.vertices();
            Some(vec![0.5 * (v[0][0] + v[v.len() - 1][0])])
        }
        2 => Some(weighted_sum(
            body.vertices(),
            &polygon_weights(body.vertices(), &AngularProfile::Uniform),
        )),
        _ => exact_in_frame(body.vertices(), body.tol_geom()),
    }
}

#[derive(Default, Clone)]
struct Moments {
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    n: usize,
}

impl Moments {
    fn new(d: usize) -> Self {
        Moments {
            sum: vec![0.0; d],
            sumsq: vec![0.0; d],
            n: 0,
        }
    }

    fn push(&mut self, y: &[f64]) {
        for ((s, q), x) in self.sum.iter_mut().zip(self.sumsq.iter_mut()).zip(y) {
            *s += x;
            *q += x * x;
        }
        self.n += 1;
    }

    fn merge(mut self, other: &Moments) -> Self {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sumsq.iter_mut().zip(&other.sumsq) {
            *a += b;
        }
        self.n += other.n;
        self
    }

    fn estimate(&self) -> SteinerEstimate {
        let n = self.n as f64;
        let point: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let std_error = self
            .sumsq
            .iter()
            .zip(&point)
            .map(|(q, m)| {
                if self.n < 2 {
                    0.0
                } else {
                    ((q / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt()
                }
            })
            .collect();
        SteinerEstimate {
            point,
            std_error,
            n_samples: self.n,
        }
    }
}

/// Runs `per_chunk` over deterministic chunks of `n` samples and merges the
/// moments in chunk order, so the result does not depend on thread count.
fn chunked<F>(d: usize, n: usize, seed: u64, per_chunk: F) -> SteinerEstimate
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, usize, &mut Moments) + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c as u64);
            let mut m = Moments::new(d);
            per_chunk(&mut r, CHUNK.min(n - c * CHUNK), &mut m);
            m
        })
        .collect();
    parts
        .iter()
        .fold(Moments::new(d), |acc, m| acc.merge(m))
        .estimate()
}

/// Monte Carlo Steiner point: exposed points averaged over uniform
/// directions, directions hitting a tie being redrawn.
pub fn steiner_point(body: &ConvexBody, n_samples: usize, seed: u64) -> SteinerEstimate {
    let d = body.dim();
    if body.vertices().len() == 1 {
        return SteinerEstimate::exact(body.vertices()[0].clone());
    }
    let n_samples = n_samples.max(1);
    chunked(d, n_samples, seed, |r, count, m| {
        let mut done = 0;
        while done < count {
            let x = uniform_sphere(r, d);
            let (i, unique) = argmax_vertex(body, &x, DEFAULT_TIE_TOL);
            if unique {
                m.push(&body.vertices()[i]);
                done += 1;
            }
        }
    })
}

/// Steiner point of an exposed face: exact up to intrinsic dimension 2,
/// nested Monte Carlo above.
fn face_steiner<R: Rng + ?Sized>(face: &[Vec<f64>], tol: f64, r: &mut R) -> Vec<f64> {
    if let Some(p) = exact_in_frame(face, tol) {
        return p;
    }
    let body = ConvexBody::with_tolerance(face.to_vec(), tol).expect("face of a valid body");
    steiner_point(&body, NESTED_SAMPLES, r.random()).point
}

/// Monte Carlo `St_μ(C)`: draw `x ~ μ`, take the Steiner point of the face
/// exposed by `x`, average.
pub fn generalized_steiner_point(
    body: &ConvexBody,
    mu: &SmoothBallMeasure,
    n_samples: usize,
    seed: u64,
) -> Result<SteinerEstimate> {
    let d = body.dim();
    mu.check_dim(d)?;
    if body.vertices().len() == 1 {
        return Ok(SteinerEstimate::exact(body.vertices()[0].clone()));
    }
    let n_samples = n_samples.max(1);
    Ok(chunked(d, n_samples, seed, |r, count, m| {
        for _ in 0..count {
            let x = mu.sample(r, d);
            let len = norm(&x);
            if len == 0.0 {
                m.push(&face_steiner(body.vertices(), body.tol_geom(), r));
                continue;
            }
            match exposed_unchecked(body, &x, len, DEFAULT_TIE_TOL) {
                Exposed::Unique(p) => m.push(&p),
                Exposed::Face(f) => m.push(&face_steiner(&f, body.tol_geom(), r)),
            }
        }
    }))
}

#[derive(Debug, Clone)]
enum Mode {
    Line { positive: f64 },
    Plane { profile: AngularProfile },
    Sampled { directions: Vec<Vec<f64>> },
}

/// A fixed `St_μ` evaluator applied to many bodies of one dimension.
///
/// Exact in dimensions 1 and 2. Above that a single set of directions is
/// drawn once and reused for every body (common random numbers), which
/// keeps the resulting selection a deterministic function of the body.
#[derive(Debug, Clone)]
pub struct SteinerSelector {
    dim: usize,
    mode: Mode,
    seed: u64,
}

impl SteinerSelector {
    /// `measure = None` gives the classical Steiner point.
    pub fn new(
        measure: Option<&SmoothBallMeasure>,
        dim: usize,
        mc_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        let mu = measure.cloned().unwrap_or(SmoothBallMeasure::Uniform);
        mu.check_dim(dim)?;
        let mode = match dim {
            1 => Mode::Line {
                positive: mu.positive_mass_1d(),
            },
            2 => Mode::Plane {
                profile: mu.angular_profile(),
            },
            _ => {
                let mut r = rng::stream(seed, u64::MAX);
                let mut directions = Vec::with_capacity(mc_samples.max(1));
                while directions.len() < mc_samples.max(1) {
                    let x = mu.sample(&mut r, dim);
                    if norm(&x) > 0.0 {
                        directions.push(x);
                    }
                }
                Mode::Sampled { directions }
            }
        };
        Ok(SteinerSelector { dim, mode, seed })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `St_μ(C)`.
    pub fn select(&self, body: &ConvexBody) -> Result<Vec<f64>> {
        body.check_dim(self.dim)?;
        let v = body.vertices();
        if v.len() == 1 {
            return Ok(v[0].clone());
        }
        Ok(match &self.mode {
            Mode::Line { positive } => {
                let (lo, hi) = (v[0][0], v[v.len() - 1][0]);
                vec![positive * hi + (1.0 - positive) * lo]
            }
            Mode::Plane { profile } => weighted_sum(v, &polygon_weights(v, profile)),
            Mode::Sampled { directions } => {
                let mut r = rng::stream(self.seed, u64::MAX - 1);
                let mut acc = Moments::new(self.dim);
                for x in directions {
                    match exposed_unchecked(body, x, norm(x), DEFAULT_TIE_TOL) {
                        Exposed::Unique(p) => acc.push(&p),
                        Exposed::Face(f) => acc.push(&face_steiner(&f, body.tol_geom(), &mut r)),
                    }
                }
                acc.estimate().point
            }
        })
    }
}
