//! Aumann–Young integrals of certified families.

use rayon::prelude::*;
use serde::Serialize;

use super::family::{Rejection, SelectionFamily, TOL_SEMINORM};
use super::{AumannError, Result, SetValuedPath};
use crate::convex_bodies::{hausdorff_distance, hull_of_points, minkowski_combine, ConvexBody};
use crate::paths::{holder_seminorm, SampledPath};
use crate::young::{common_grid, young_integral, YoungConfig};

/// Inner approximation of `J_{T,α,r}(F, w)` with its outer radius.
#[derive(Debug, Clone, Serialize)]
pub struct AumannIntegral {
    pub hull: ConvexBody,
    /// `∫_0^T f dw` for every family member, in family order.
    pub values: Vec<Vec<f64>>,
    /// `c_{α,β}·T^β·(T^α ∨ 1)·‖w‖_β·(r + ‖F‖_∞)`.
    pub radius_bound: f64,
    pub max_vertex_norm: f64,
    pub family_size: usize,
    pub w_seminorm: f64,
    pub f_sup_norm: f64,
    pub rejection_log: Vec<Rejection>,
}

impl AumannIntegral {
    pub fn within_radius(&self) -> bool {
        self.max_vertex_norm <= self.radius_bound * (1.0 + 1e-12) + 1e-12
    }
}

fn check_family(f: &SetValuedPath, w: &SampledPath, r: f64, family: &SelectionFamily) -> Result<()> {
    if family.r > r + TOL_SEMINORM {
        return Err(AumannError::FamilyMismatch {
            family: family.r,
            requested: r,
        });
    }
    if family.is_empty() {
        return Err(AumannError::EmptyFamily { r, rejected: family.rejections.len() });
    }
    if family.members.iter().any(|m| m.grid() != f.grid()) {
        return Err(AumannError::GridError("family members do not live on the grid of F".into()));
    }
    if w.dim() != f.shape().1 {
        return Err(AumannError::DimMismatch(format!(
            "F has {} columns but w has dimension {}",
            f.shape().1,
            w.dim()
        )));
    }
    Ok(())
}

fn integrate_members(
    f: &SetValuedPath,
    w: &SampledPath,
    cfg: &YoungConfig,
    family: &SelectionFamily,
) -> Result<Vec<SampledPath>> {
    let (rows, cols) = f.shape();
    family
        .members
        .par_iter()
        .map(|m| {
            let fm = m.reshape(rows, cols)?;
            Ok(young_integral(&fm, w, cfg)?.path)
        })
        .collect()
}

fn radius_bound(f: &SetValuedPath, w_seminorm: f64, cfg: &YoungConfig, r: f64) -> f64 {
    let t = f.horizon();
    cfg.sewing_constant() * t.powf(cfg.beta) * t.powf(cfg.alpha).max(1.0) * w_seminorm * (r + f.sup_norm())
}

/// Hull of the Young integrals of the family members; the Young–Loève
/// radius is attached as an outer bound.
pub fn aumann_young_integral(
    f: &SetValuedPath,
    w: &SampledPath,
    cfg: &YoungConfig,
    r: f64,
    family: &SelectionFamily,
) -> Result<AumannIntegral> {
    cfg.validate()?;
    check_family(f, w, r, family)?;
    let paths = integrate_members(f, w, cfg, family)?;
    let values: Vec<Vec<f64>> = paths.iter().map(|p| p.last().to_vec()).collect();
    let hull = hull_of_points(values.clone())?;
    let w_seminorm = holder_seminorm(w, cfg.beta)?.seminorm;
    Ok(AumannIntegral {
        max_vertex_norm: hull.norm(),
        hull,
        values,
        radius_bound: radius_bound(f, w_seminorm, cfg, r),
        family_size: family.len(),
        w_seminorm,
        f_sup_norm: f.sup_norm(),
        rejection_log: family.rejections.clone(),
    })
}

/// `t ↦ J_{t,α,r}(F, w)` built from the same members truncated at `t`.
#[derive(Debug, Clone, Serialize)]
pub struct IndefiniteIntegral {
    pub path: SetValuedPath,
    #[serde(skip)]
    pub member_paths: Vec<SampledPath>,
    /// `C_{α,β,T}(‖F‖_∞ + r)‖w‖_β`, the `β`-Hölder constant of the map.
    pub holder_constant: f64,
    /// `ρ_w(T, r) = C_{α,β,T}(‖F‖_∞ + r)‖w‖_β T^{β−α}`.
    pub rho_w: f64,
    pub w_seminorm: f64,
}

/// `ρ_w(T, r)`.
pub fn rho_w(cfg: &YoungConfig, horizon: f64, f_sup: f64, r: f64, w_seminorm: f64) -> f64 {
    cfg.young_constant(horizon) * (f_sup + r) * w_seminorm * horizon.powf(cfg.beta - cfg.alpha)
}

pub fn indefinite_aumann_integral(
    f: &SetValuedPath,
    w: &SampledPath,
    cfg: &YoungConfig,
    r: f64,
    family: &SelectionFamily,
) -> Result<IndefiniteIntegral> {
    cfg.validate()?;
    check_family(f, w, r, family)?;
    let paths = integrate_members(f, w, cfg, family)?;
    let grid = paths[0].grid().to_vec();
    let bodies = (0..grid.len())
        .into_par_iter()
        .map(|i| hull_of_points(paths.iter().map(|p| p.value(i).to_vec()).collect()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let w_seminorm = holder_seminorm(w, cfg.beta)?.seminorm;
    let t = f.horizon();
    Ok(IndefiniteIntegral {
        path: SetValuedPath::new(grid, bodies)?,
        member_paths: paths,
        holder_constant: cfg.young_constant(t) * (f.sup_norm() + r) * w_seminorm,
        rho_w: rho_w(cfg, t, f.sup_norm(), r, w_seminorm),
        w_seminorm,
    })
}

/// Piecewise convex interpolation of `F` between the nodes `times`
/// (which must include `0` and `T`), represented on the full grid.
pub fn interpolate_multifunction(f: &SetValuedPath, times: &[f64]) -> Result<SetValuedPath> {
    let idx = f.node_indices(times)?;
    if idx.first() != Some(&0) || idx.last() != Some(&(f.len() - 1)) {
        return Err(AumannError::GridError("dissection must contain 0 and T".into()));
    }
    if !idx.windows(2).all(|w| w[1] > w[0]) {
        return Err(AumannError::GridError("dissection must be increasing".into()));
    }
    let g = f.grid();
    let mut bodies = Vec::with_capacity(f.len());
    for seg in idx.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let (ta, tb) = (g[a], g[b]);
        for j in a..b {
            if j == a {
                bodies.push(f.body(a).clone());
                continue;
            }
            let lam = (tb - g[j]) / (tb - ta);
            bodies.push(minkowski_combine(lam, f.body(a), 1.0 - lam, f.body(b))?);
        }
    }
    bodies.push(f.body(f.len() - 1).clone());
    let (rows, cols) = f.shape();
    SetValuedPath::with_shape(g.to_vec(), bodies, rows, cols)
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    /// `d_H(J(F, w¹), J(F, w²))` on the inner approximations.
    pub lhs: f64,
    /// `c_{α,β}T^β(T^α ∨ 1)(r + ‖F‖_∞)‖w¹ − w²‖_β`.
    pub rhs: f64,
    pub w_diff_seminorm: f64,
    pub satisfied: bool,
}

/// Compares both integrals of the same family against two signals.
pub fn integral_lipschitz_in_w_check(
    f: &SetValuedPath,
    w1: &SampledPath,
    w2: &SampledPath,
    cfg: &YoungConfig,
    r: f64,
    family: &SelectionFamily,
) -> Result<LipschitzReport> {
    let j1 = aumann_young_integral(f, w1, cfg, r, family)?;
    let j2 = aumann_young_integral(f, w2, cfg, r, family)?;
    let (a, b) = common_grid(w1, w2)?;
    let diff = a.combine(1.0, &b, -1.0)?;
    let s = holder_seminorm(&diff, cfg.beta)?.seminorm;
    let lhs = hausdorff_distance(&j1.hull, &j2.hull)?;
    let rhs = radius_bound(f, s, cfg, r);
    Ok(LipschitzReport {
        lhs,
        rhs,
        w_diff_seminorm: s,
        satisfied: lhs <= rhs + 1e-12 * (1.0 + j1.max_vertex_norm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aumann::{build_selection_family, FamilyRecipe};

    fn cfg() -> YoungConfig {
        YoungConfig::new(0.6, 0.7).unwrap()
    }

    #[test]
    fn singleton_integrand() {
        let f = SetValuedPath::from_fn(1.0, 64, |_| ConvexBody::point(vec![2.0]).unwrap()).unwrap();
        let w = SampledPath::from_fn(1.0, 64, |t| vec![t * t + t]).unwrap();
        let fam = build_selection_family(&f, 0.6, 1.0, &FamilyRecipe::spread(&f, 4, 4, 0)).unwrap();
        let j = aumann_young_integral(&f, &w, &cfg(), 1.0, &fam).unwrap();
        assert_eq!(j.hull.vertices().len(), 1);
        assert!((j.hull.vertices()[0][0] - 4.0).abs() < 1e-12);
        assert!(j.within_radius());
    }

    #[test]
    fn unit_interval_against_time() {
        let f = SetValuedPath::from_fn(1.0, 64, |_| ConvexBody::interval(-1.0, 1.0).unwrap()).unwrap();
        let w = SampledPath::from_fn(1.0, 64, |t| vec![t]).unwrap();
        let fam = build_selection_family(&f, 0.6, 0.5, &FamilyRecipe::default_for(&f, 0)).unwrap();
        let j = aumann_young_integral(&f, &w, &cfg(), 0.5, &fam).unwrap();
        let v = j.hull.vertices();
        assert!((v[0][0] + 1.0).abs() < 1e-12 && (v[1][0] - 1.0).abs() < 1e-12);
        let ind = indefinite_aumann_integral(&f, &w, &cfg(), 0.5, &fam).unwrap();
        assert!(ind.path.body(0).is_singleton());
        assert!((ind.path.body(32).vertices()[1][0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn interpolation_keeps_nodes() {
        let f = SetValuedPath::from_fn(1.0, 8, |t| ConvexBody::interval(-t * t, t).unwrap()).unwrap();
        let same = interpolate_multifunction(&f, f.grid()).unwrap();
        assert_eq!(same, f);
        let coarse = interpolate_multifunction(&f, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(coarse.body(4), f.body(4));
        // at t = 0.25 the left node F(0) = {0} weighs 1/2
        let v = coarse.body(2).vertices();
        assert!((v[0][0] + 0.125).abs() < 1e-15 && (v[1][0] - 0.25).abs() < 1e-15);
        assert!(interpolate_multifunction(&f, &[0.0, 0.3, 1.0]).is_err());
        assert!(interpolate_multifunction(&f, &[0.0, 0.5]).is_err());
    }

    #[test]
    fn family_budget_mismatch() {
        let f = SetValuedPath::from_fn(1.0, 8, |_| ConvexBody::interval(0.0, 1.0).unwrap()).unwrap();
        let w = SampledPath::from_fn(1.0, 8, |t| vec![t]).unwrap();
        let fam = build_selection_family(&f, 0.6, 2.0, &FamilyRecipe::spread(&f, 2, 2, 0)).unwrap();
        assert!(matches!(
            aumann_young_integral(&f, &w, &cfg(), 1.0, &fam),
            Err(AumannError::FamilyMismatch { .. })
        ));
    }
}
