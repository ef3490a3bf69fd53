//! Convex bodies as polytopes.
//!
//! A [`ConvexBody`] is the convex hull of a finite, nonempty vertex list in
//! `R^n`. Every operation the integral needs is exact or certified on this
//! representation: support functions are maxima over vertices, Minkowski
//! combinations are hulls of pairwise combinations, and the Hausdorff distance
//! is attained at vertices because the distance to a convex set is a convex
//! function.

mod demyanov;
mod hull;
pub(crate) mod measure;
mod projection;
mod steiner;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, all_finite, dot, norm};

pub use demyanov::{demyanov_distance, demyanov_distance_auto, demyanov_distance_exact_2d};
pub use hull::AffineFrame;
pub use measure::{AngularProfile, SmoothBallMeasure};
pub use projection::{nearest_point, Projection};
pub use steiner::{
    generalized_steiner_point, steiner_lipschitz_lower, steiner_lipschitz_upper, steiner_point,
    steiner_point_exact, SteinerEstimate, SteinerSelector,
};

/// Default geometric tolerance used for deduplication and hull pruning.
pub const DEFAULT_TOL_GEOM: f64 = 1e-10;
/// Default tolerance deciding whether a supporting face is a single point.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("direction must be finite and nonzero")]
    InvalidDirection,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("Minkowski coefficient must be a finite nonnegative number, got {0}")]
    InvalidCoefficient(f64),
    #[error("a convex body needs at least one vertex")]
    EmptyBody,
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("no direction exposed a unique point of both bodies")]
    NoCommonExposingDirection,
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// Nonempty compact convex subset of `R^n`, stored as a vertex list.
///
/// In dimensions one and two the vertex list is always canonical (extreme
/// points only; counter-clockwise in the plane). In higher dimensions only
/// duplicates are removed on construction; [`ConvexBody::canonicalize`]
/// prunes interior points on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BodyRepr", into = "BodyRepr")]
pub struct ConvexBody {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    tol_geom: f64,
}

#[derive(Serialize, Deserialize)]
struct BodyRepr {
    /// Optional on input; checked against the vertices when present.
    #[serde(default)]
    dim: Option<usize>,
    vertices: Vec<Vec<f64>>,
}

impl TryFrom<BodyRepr> for ConvexBody {
    type Error = GeometryError;

    fn try_from(repr: BodyRepr) -> Result<Self> {
        let body = ConvexBody::new(repr.vertices)?;
        match repr.dim {
            Some(d) if d != body.dim => Err(GeometryError::DimMismatch {
                expected: d,
                found: body.dim,
            }),
            _ => Ok(body),
        }
    }
}

impl From<ConvexBody> for BodyRepr {
    fn from(body: ConvexBody) -> Self {
        BodyRepr {
            dim: Some(body.dim),
            vertices: body.vertices,
        }
    }
}

/// Result of [`exposed_point`].
#[derive(Debug, Clone, PartialEq)]
pub enum Exposed {
    /// `y(l, C)`: the face exposed by `l` is a single point.
    Unique(Vec<f64>),
    /// `Y(l, C)`: the distinct vertices spanning the exposed face.
    Face(Vec<Vec<f64>>),
}

impl Exposed {
    pub fn unique(&self) -> Option<&[f64]> {
        match self {
            Exposed::Unique(p) => Some(p),
            Exposed::Face(_) => None,
        }
    }
}

impl ConvexBody {
    /// Hull of `vertices`. All points must share one dimension and be finite.
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(vertices, DEFAULT_TOL_GEOM)
    }

    pub fn with_tolerance(vertices: Vec<Vec<f64>>, tol_geom: f64) -> Result<Self> {
        let first = vertices.first().ok_or(GeometryError::EmptyBody)?;
        let dim = first.len();
        if dim == 0 {
            return Err(GeometryError::EmptyBody);
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(GeometryError::DimMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if !all_finite(v) {
                return Err(GeometryError::NonFinite);
            }
        }
        let tol_geom = tol_geom.max(0.0);
        let vertices = match dim {
            1 => hull::hull_1d(&vertices, tol_geom),
            2 => hull::hull_2d(&vertices, tol_geom),
            _ => hull::dedup(vertices, tol_geom),
        };
        Ok(ConvexBody {
            dim,
            vertices,
            tol_geom,
        })
    }

    pub fn point(p: Vec<f64>) -> Result<Self> {
        Self::new(vec![p])
    }

    /// Closed interval `[lo, hi]` in `R`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![vec![lo], vec![hi]])
    }

    pub fn segment(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::new(vec![a, b])
    }

    /// Axis-aligned cube `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Result<Self> {
        let verts = (0..(1usize << dim))
            .map(|mask| {
                (0..dim)
                    .map(|i| if mask >> i & 1 == 1 { half } else { -half })
                    .collect()
            })
            .collect();
        Self::new(verts)
    }

    /// Regular `k`-gon inscribed in the circle of given radius.
    pub fn regular_polygon(k: usize, radius: f64, center: [f64; 2], phase: f64) -> Result<Self> {
        let verts = (0..k.max(1))
            .map(|i| {
                let a = phase + 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                vec![center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            })
            .collect();
        Self::new(verts)
    }

    /// Symmetric polytope approximating the Euclidean ball of given radius in
    /// `R^dim`; every vertex lies on the sphere.
    pub fn ball_polytope(dim: usize, radius: f64) -> Result<Self> {
        match dim {
            1 => Self::interval(-radius, radius),
            2 => Self::regular_polygon(16, radius, [0.0, 0.0], 0.0),
            _ => {
                let mut verts = Vec::new();
                for i in 0..dim {
                    for s in [-1.0, 1.0] {
                        let mut v = vec![0.0; dim];
                        v[i] = s * radius;
                        verts.push(v);
                    }
                }
                let c = radius / (dim as f64).sqrt();
                for mask in 0..(1usize << dim) {
                    verts.push((0..dim).map(|i| if mask >> i & 1 == 1 { c } else { -c }).collect());
                }
                Self::new(verts)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn tol_geom(&self) -> f64 {
        self.tol_geom
    }

    /// `‖C‖ = sup_{c ∈ C} ‖c‖`, attained at a vertex.
    pub fn norm(&self) -> f64 {
        self.vertices.iter().map(|v| norm(v)).fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(linalg::dist(a, b));
            }
        }
        d
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for v in &self.vertices {
            linalg::axpy(&mut c, 1.0, v);
        }
        linalg::scale(&c, 1.0 / self.vertices.len() as f64)
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Removes vertices lying in the hull of the others (within `tol_geom`
    /// relative to the body's scale). A no-op in dimensions one and two where
    /// bodies are kept canonical.
    pub fn canonicalize(&self) -> ConvexBody {
        if self.dim <= 2 || self.vertices.len() <= self.dim + 1 {
            return self.clone();
        }
        let scale = self.norm().max(1.0);
        let mut verts = self.vertices.clone();
        let mut i = 0;
        while i < verts.len() && verts.len() > 1 {
            let others: Vec<Vec<f64>> = verts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.clone())
                .collect();
            let proj = nearest_point(&others, &verts[i]);
            if proj.distance <= self.tol_geom.max(1e-12) * scale {
                verts.remove(i);
            } else {
                i += 1;
            }
        }
        ConvexBody {
            dim: self.dim,
            vertices: verts,
            tol_geom: self.tol_geom,
        }
    }

    fn nearest(&self, p: &[f64]) -> Projection {
        if self.dim == 2 {
            projection::nearest_point_polygon(&self.vertices, p)
        } else {
            nearest_point(&self.vertices, p)
        }
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(GeometryError::DimMismatch {
                expected: self.dim,
                found: other,
            });
        }
        Ok(())
    }

    /// Image under `x ↦ a + s x`.
    pub fn affine_image(&self, shift: &[f64], s: f64) -> Result<ConvexBody> {
        self.check_dim(shift.len())?;
        let verts = self
            .vertices
            .iter()
            .map(|v| v.iter().zip(shift).map(|(x, a)| a + s * x).collect())
            .collect();
        ConvexBody::with_tolerance(verts, self.tol_geom)
    }

    /// `A ⊆ B` up to `tol`, checked vertex-wise.
    pub fn is_subset_of(&self, other: &ConvexBody, tol: f64) -> Result<bool> {
        self.check_dim(other.dim)?;
        for v in &self.vertices {
            if distance_to_set(v, other)? > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `δ*(l, C) = max_{x ∈ C} ⟨l, x⟩`.
pub fn support_function(body: &ConvexBody, direction: &[f64]) -> Result<f64> {
    body.check_dim(direction.len())?;
    if !all_finite(direction) {
        return Err(GeometryError::InvalidDirection);
    }
    Ok(body
        .vertices
        .iter()
        .map(|v| dot(direction, v))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// The face of `C` exposed by `l`. Vertices whose support value is within
/// `tie_tol` (measured along the normalised direction) of the maximum belong
/// to the face; distinct face vertices make the answer [`Exposed::Face`].
pub fn exposed_point(body: &ConvexBody, direction: &[f64], tie_tol: f64) -> Result<Exposed> {
    body.check_dim(direction.len())?;
    let len = norm(direction);
    if !all_finite(direction) || len == 0.0 {
        return Err(GeometryError::InvalidDirection);
    }
    Ok(exposed_unchecked(body, direction, len, tie_tol))
}

pub(crate) fn exposed_unchecked(
    body: &ConvexBody,
    direction: &[f64],
    len: f64,
    tie_tol: f64,
) -> Exposed {
    let verts = &body.vertices;
    if verts.len() == 1 {
        return Exposed::Unique(verts[0].clone());
    }
    let values: Vec<f64> = verts.iter().map(|v| dot(direction, v) / len).collect();
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut face: Vec<&Vec<f64>> = Vec::new();
    for (v, &val) in verts.iter().zip(&values) {
        if val >= best - tie_tol && !face.iter().any(|f| linalg::dist(f, v) <= body.tol_geom) {
            face.push(v);
        }
    }
    if face.len() == 1 {
        Exposed::Unique(face[0].clone())
    } else {
        Exposed::Face(face.into_iter().cloned().collect())
    }
}

/// Index of the vertex maximising `⟨l, v⟩` together with whether it is
/// strictly separated from the runner-up by more than `tie_tol`.
pub(crate) fn argmax_vertex(body: &ConvexBody, direction: &[f64], tie_tol: f64) -> (usize, bool) {
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0;
    let mut second = f64::NEG_INFINITY;
    for (i, v) in body.vertices.iter().enumerate() {
        let val = dot(direction, v);
        if val > best {
            second = best;
            best = val;
            best_i = i;
        } else if val > second {
            second = val;
        }
    }
    let len = norm(direction);
    (best_i, body.vertices.len() == 1 || (best - second) > tie_tol * len)
}

/// Euclidean distance from `p` to `C`; zero inside.
pub fn distance_to_set(p: &[f64], body: &ConvexBody) -> Result<f64> {
    Ok(project(p, body)?.distance)
}

/// Metric projection of `p` onto `C`.
pub fn project(p: &[f64], body: &ConvexBody) -> Result<Projection> {
    body.check_dim(p.len())?;
    if !all_finite(p) {
        return Err(GeometryError::NonFinite);
    }
    Ok(body.nearest(p))
}

/// One-sided excess `sup_{a ∈ A} d(a, B)`.
pub fn excess(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    a.check_dim(b.dim)?;
    let mut e: f64 = 0.0;
    for v in &a.vertices {
        e = e.max(b.nearest(v).distance);
    }
    Ok(e)
}

/// Hausdorff distance, exact for polytopes up to the projection tolerance.
pub fn hausdorff_distance(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    a.check_dim(b.dim)?;
    if a.dim == 1 {
        let (alo, ahi) = (a.vertices[0][0], a.vertices[a.vertices.len() - 1][0]);
        let (blo, bhi) = (b.vertices[0][0], b.vertices[b.vertices.len() - 1][0]);
        return Ok((alo - blo).abs().max((ahi - bhi).abs()));
    }
    if a.dim == 2 {
        return Ok(demyanov::hausdorff_2d(a, b));
    }
    Ok(excess(a, b)?.max(excess(b, a)?))
}

/// `λA + νB`, the hull of all pairwise combinations of vertices.
pub fn minkowski_combine(
    lambda: f64,
    a: &ConvexBody,
    nu: f64,
    b: &ConvexBody,
) -> Result<ConvexBody> {
    a.check_dim(b.dim)?;
    for c in [lambda, nu] {
        if !(c.is_finite() && c >= 0.0) {
            return Err(GeometryError::InvalidCoefficient(c));
        }
    }
    if nu == 0.0 {
        return a.affine_image(&vec![0.0; a.dim], lambda);
    }
    if lambda == 0.0 {
        return b.affine_image(&vec![0.0; b.dim], nu);
    }
    let mut verts = Vec::with_capacity(a.vertices.len() * b.vertices.len());
    for va in &a.vertices {
        for vb in &b.vertices {
            verts.push(va.iter().zip(vb).map(|(x, y)| lambda * x + nu * y).collect());
        }
    }
    let body = ConvexBody::with_tolerance(verts, a.tol_geom.max(b.tol_geom))?;
    Ok(if body.dim > 2 { body.canonicalize() } else { body })
}

/// Hull of a union of point clouds (all of one dimension).
pub fn hull_of_points(points: Vec<Vec<f64>>) -> Result<ConvexBody> {
    let body = ConvexBody::new(points)?;
    Ok(if body.dim > 2 { body.canonicalize() } else { body })
}
