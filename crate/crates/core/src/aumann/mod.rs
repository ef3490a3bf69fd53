//! Set-valued paths, certified selection families and the Aumann–Young
//! integral.
//!
//! The integral of `F` against `w` is the set of Young integrals of all
//! selections of `F` with `α`-Hölder seminorm at most `r`. We represent that
//! selection set by a finite family, certified node by node, and return the
//! convex hull of the family's integrals: an inner approximation that comes
//! with the outer Young–Loève radius.

mod example3;
mod family;
mod integral;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use example3::{example3_divergence, Example3Config, Example3Report, Example3Row};
pub use family::{
    build_selection_family, r_min_estimate, FamilyRecipe, Provenance, RMin, Rejection,
    RejectionReason, SelectionFamily, TOL_MEMBERSHIP, TOL_SEMINORM,
};
pub use integral::{
    aumann_young_integral, indefinite_aumann_integral, integral_lipschitz_in_w_check,
    interpolate_multifunction, rho_w, AumannIntegral, IndefiniteIntegral, LipschitzReport,
};

use crate::convex_bodies::{
    demyanov_distance_auto, hausdorff_distance, minkowski_combine, ConvexBody, GeometryError,
};
use crate::paths::{pairwise_full, pairwise_uniform, PathError};
use crate::young::YoungError;

#[derive(Debug, Error)]
pub enum AumannError {
    #[error("no candidate selection passed certification (r = {r}); {rejected} rejected")]
    EmptyFamily { r: f64, rejected: usize },
    #[error("grid error: {0}")]
    GridError(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("family certified for r = {family} cannot be used with r = {requested}")]
    FamilyMismatch { family: f64, requested: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Young(#[from] YoungError),
}

pub type Result<T> = std::result::Result<T, AumannError>;

/// A multifunction sampled on a grid, one polytope per node, interpolated in
/// between by Minkowski convex combinations. Matrix-valued multifunctions
/// (`e × d`) are stored flattened row-major in `R^{e·d}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetPathRepr", into = "SetPathRepr")]
pub struct SetValuedPath {
    grid: Vec<f64>,
    bodies: Vec<ConvexBody>,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct SetPathRepr {
    grid: Vec<f64>,
    bodies: Vec<ConvexBody>,
    #[serde(default)]
    shape: Option<[usize; 2]>,
}

impl TryFrom<SetPathRepr> for SetValuedPath {
    type Error = AumannError;

    fn try_from(r: SetPathRepr) -> Result<Self> {
        match r.shape {
            Some([rows, cols]) => SetValuedPath::with_shape(r.grid, r.bodies, rows, cols),
            None => SetValuedPath::new(r.grid, r.bodies),
        }
    }
}

impl From<SetValuedPath> for SetPathRepr {
    fn from(p: SetValuedPath) -> Self {
        SetPathRepr {
            grid: p.grid,
            bodies: p.bodies,
            shape: Some([p.rows, p.cols]),
        }
    }
}

impl SetValuedPath {
    /// Vector-valued multifunction (`n × 1`).
    pub fn new(grid: Vec<f64>, bodies: Vec<ConvexBody>) -> Result<Self> {
        let n = bodies.first().map_or(0, ConvexBody::dim);
        Self::with_shape(grid, bodies, n, 1)
    }

    pub fn with_shape(grid: Vec<f64>, bodies: Vec<ConvexBody>, rows: usize, cols: usize) -> Result<Self> {
        if grid.len() < 2 || grid.len() != bodies.len() {
            return Err(AumannError::GridError(format!(
                "{} nodes for {} bodies",
                grid.len(),
                bodies.len()
            )));
        }
        if grid[0] != 0.0 || !grid.windows(2).all(|w| w[1] > w[0]) || !grid.iter().all(|t| t.is_finite()) {
            return Err(AumannError::GridError("grid must start at 0 and increase".into()));
        }
        let n = rows * cols;
        if let Some(b) = bodies.iter().find(|b| b.dim() != n) {
            return Err(AumannError::DimMismatch(format!(
                "body of dimension {} in a {rows}×{cols} multifunction",
                b.dim()
            )));
        }
        Ok(SetValuedPath {
            grid,
            bodies,
            rows,
            cols,
        })
    }

    /// Samples `f` on the uniform grid with `m` steps.
    pub fn from_fn<F: Fn(f64) -> ConvexBody>(horizon: f64, m: usize, f: F) -> Result<Self> {
        let grid = crate::paths::uniform_grid(horizon, m);
        let bodies = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, bodies)
    }

    pub fn reshape(self, rows: usize, cols: usize) -> Result<Self> {
        Self::with_shape(self.grid, self.bodies, rows, cols)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.rows * self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn body(&self, i: usize) -> &ConvexBody {
        &self.bodies[i]
    }

    pub fn bodies(&self) -> &[ConvexBody] {
        &self.bodies
    }

    /// `‖F‖_∞ = max_t sup_{x ∈ F(t)} ‖x‖`.
    pub fn sup_norm(&self) -> f64 {
        self.bodies.iter().map(ConvexBody::norm).fold(0.0, f64::max)
    }

    fn is_uniform(&self) -> bool {
        let h = self.horizon() / (self.len() - 1) as f64;
        self.grid.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
    }

    fn metric_seminorm<D>(&self, alpha: f64, d: D) -> Result<f64>
    where
        D: Fn(&ConvexBody, &ConvexBody) -> f64 + Sync,
    {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(PathError::InvalidExponent(alpha).into());
        }
        let g = &self.grid;
        let ratio = |i: usize, j: usize| d(&self.bodies[i], &self.bodies[j]) / (g[j] - g[i]).powf(alpha);
        Ok(if self.is_uniform() {
            let h = self.horizon() / (self.len() - 1) as f64;
            pairwise_uniform(self.len(), h, alpha, |i| d(&self.bodies[0], &self.bodies[i]), ratio)
        } else {
            pairwise_full(self.len(), ratio)
        })
    }

    /// Grid `α`-Hölder seminorm for the Hausdorff distance.
    pub fn hausdorff_seminorm(&self, alpha: f64) -> Result<f64> {
        self.metric_seminorm(alpha, |a, b| hausdorff_distance(a, b).expect("same dimension"))
    }

    /// Grid `α`-Hölder seminorm for the Demyanov distance (exact in the
    /// plane, Monte Carlo with `n_dirs` directions above).
    pub fn demyanov_seminorm(&self, alpha: f64, n_dirs: usize, seed: u64) -> Result<f64> {
        self.metric_seminorm(alpha, |a, b| {
            demyanov_distance_auto(a, b, n_dirs, seed).unwrap_or(f64::INFINITY)
        })
    }

    /// `F(t)` by convex interpolation between the neighbouring nodes.
    pub fn eval(&self, t: f64) -> Result<ConvexBody> {
        let t = t.clamp(0.0, self.horizon());
        let i = self.grid.partition_point(|&g| g <= t);
        if i >= self.len() {
            return Ok(self.bodies[self.len() - 1].clone());
        }
        let i = i.max(1);
        let (t0, t1) = (self.grid[i - 1], self.grid[i]);
        if t == t0 {
            return Ok(self.bodies[i - 1].clone());
        }
        let lam = (t1 - t) / (t1 - t0);
        Ok(minkowski_combine(lam, &self.bodies[i - 1], 1.0 - lam, &self.bodies[i])?)
    }

    /// Node indices of `times`, each of which must be a grid node.
    pub(crate) fn node_indices(&self, times: &[f64]) -> Result<Vec<usize>> {
        let tol = 1e-12 * self.horizon().max(1.0);
        times
            .iter()
            .map(|&t| {
                let i = self.grid.partition_point(|&g| g < t - tol);
                if i < self.len() && (self.grid[i] - t).abs() <= tol {
                    Ok(i)
                } else {
                    Err(AumannError::GridError(format!("time {t} is not a grid node")))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotating(m: usize) -> SetValuedPath {
        SetValuedPath::from_fn(1.0, m, |t| {
            ConvexBody::segment(vec![0.0, 0.0], vec![t.sin(), t.cos()]).unwrap()
        })
        .unwrap()
    }

    #[test]
    fn validation() {
        let b = ConvexBody::point(vec![0.0]).unwrap();
        assert!(SetValuedPath::new(vec![0.0, 1.0], vec![b.clone()]).is_err());
        assert!(SetValuedPath::new(vec![0.0, 1.0], vec![b.clone(), b.clone()]).is_ok());
        let c = ConvexBody::point(vec![0.0, 1.0]).unwrap();
        assert!(SetValuedPath::new(vec![0.0, 1.0], vec![b, c]).is_err());
    }

    #[test]
    fn rotating_segment_seminorms() {
        let coarse = rotating(16);
        let fine = rotating(64);
        let hc = coarse.hausdorff_seminorm(0.5).unwrap();
        let hf = fine.hausdorff_seminorm(0.5).unwrap();
        assert!(hf <= 1.0 + 1e-9 && hc <= hf + 1e-12);
        let dc = coarse.demyanov_seminorm(0.5, 0, 0).unwrap();
        let df = fine.demyanov_seminorm(0.5, 0, 0).unwrap();
        assert!(df >= 1.9 * dc, "{dc} {df}");
    }

    #[test]
    fn eval_interpolates_between_nodes() {
        let f = SetValuedPath::from_fn(1.0, 2, |t| ConvexBody::interval(-t, t).unwrap()).unwrap();
        let mid = f.eval(0.25).unwrap();
        assert_eq!(mid.vertices(), &[vec![-0.25], vec![0.25]]);
        assert_eq!(f.node_indices(&[0.0, 1.0]).unwrap(), vec![0, 2]);
        assert!(f.node_indices(&[0.3]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = rotating(3);
        let s = serde_json::to_string(&f).unwrap();
        let g: SetValuedPath = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
