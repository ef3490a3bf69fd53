//! Certified selection families.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{AumannError, Result, SetValuedPath};
use crate::convex_bodies::{
    distance_to_set, project, steiner_lipschitz_upper, SmoothBallMeasure, SteinerSelector,
};
use crate::linalg::norm;
use crate::paths::{holder_seminorm, SampledPath};
use crate::rng;

/// Membership tolerance `d(f(t_i), F(t_i))` for certification.
pub const TOL_MEMBERSHIP: f64 = 1e-8;
/// Additive slack on the seminorm certificate.
pub const TOL_SEMINORM: f64 = 1e-9;

/// How a family member was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Steiner,
    GeneralizedSteiner { measure: SmoothBallMeasure },
    ProjectionAnchor { anchor: usize },
    Interpolated { source: Box<Provenance> },
    Supplied { label: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectionReason {
    NotAMember { node: usize, distance: f64 },
    SeminormExceeded { seminorm: f64 },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub provenance: Provenance,
    pub reason: RejectionReason,
}

/// Finite inner stand-in for `S_{α,r}(F)`.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionFamily {
    #[serde(skip)]
    pub members: Vec<SampledPath>,
    pub provenance: Vec<Provenance>,
    /// Certified grid `α`-seminorm of each member.
    pub seminorms: Vec<f64>,
    pub r: f64,
    pub alpha: f64,
    pub rejections: Vec<Rejection>,
    pub warnings: Vec<String>,
}

impl SelectionFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members whose seminorm certificate also holds for a smaller budget.
    pub fn restrict_to_budget(&self, r: f64) -> Result<SelectionFamily> {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.seminorms[i] <= r + TOL_SEMINORM)
            .collect();
        if keep.is_empty() {
            return Err(AumannError::EmptyFamily {
                r,
                rejected: self.len(),
            });
        }
        Ok(SelectionFamily {
            members: keep.iter().map(|&i| self.members[i].clone()).collect(),
            provenance: keep.iter().map(|&i| self.provenance[i].clone()).collect(),
            seminorms: keep.iter().map(|&i| self.seminorms[i]).collect(),
            r,
            alpha: self.alpha,
            rejections: self.rejections.clone(),
            warnings: self.warnings.clone(),
        })
    }

    /// The first `k` members.
    pub fn prefix(&self, k: usize) -> SelectionFamily {
        let k = k.min(self.len()).max(1);
        SelectionFamily {
            members: self.members[..k].to_vec(),
            provenance: self.provenance[..k].to_vec(),
            seminorms: self.seminorms[..k].to_vec(),
            r: self.r,
            alpha: self.alpha,
            rejections: self.rejections.clone(),
            warnings: self.warnings.clone(),
        }
    }

    /// Members interpolated linearly between the nodes of `times` and
    /// recertified against `target` (normally the matching interpolated
    /// multifunction).
    pub fn interpolate(&self, times: &[f64], target: &SetValuedPath) -> Result<SelectionFamily> {
        let candidates = self
            .members
            .iter()
            .zip(&self.provenance)
            .map(|(m, p)| {
                let coarse_idx = target.node_indices(times)?;
                let coarse = m.select_nodes(&coarse_idx)?;
                let fine = coarse.resample(target.grid())?;
                Ok((
                    Provenance::Interpolated {
                        source: Box::new(p.clone()),
                    },
                    Ok(fine),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        certify(target, self.alpha, self.r, candidates, Vec::new())
    }
}

/// Both terms of `r_min = min{L·‖F‖_α, ‖F‖_{α,D}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RMin {
    /// Upper bracket of the Steiner Lipschitz constant in `R^{e·d}`.
    pub lipschitz_constant: f64,
    pub hausdorff_seminorm: f64,
    pub hausdorff_term: f64,
    pub demyanov_term: f64,
    pub value: f64,
}

/// Grid estimate of `r_min`.
pub fn r_min_estimate(f: &SetValuedPath, alpha: f64, n_dirs: usize, seed: u64) -> Result<RMin> {
    let l = steiner_lipschitz_upper(f.dim());
    let h = f.hausdorff_seminorm(alpha)?;
    let d = f.demyanov_seminorm(alpha, n_dirs, seed)?;
    Ok(RMin {
        lipschitz_constant: l,
        hausdorff_seminorm: h,
        hausdorff_term: l * h,
        demyanov_term: d,
        value: (l * h).min(d),
    })
}

/// Candidate recipes for [`build_selection_family`].
#[derive(Debug, Clone)]
pub struct FamilyRecipe {
    pub measures: Vec<SmoothBallMeasure>,
    /// Paths `a` giving projection selections `t ↦ proj_{F(t)} a(t)`.
    pub anchors: Vec<SampledPath>,
    pub include_steiner: bool,
    /// Ready-made candidates, certified like the others.
    pub supplied: Vec<(String, SampledPath)>,
    /// Directions per body for generalized Steiner points in dimension ≥ 3.
    pub mc_samples: usize,
    pub seed: u64,
}

/// Default budgets.
pub const DEFAULT_MEASURES: usize = 32;
pub const DEFAULT_ANCHORS: usize = 64;

fn random_unit<R: Rng>(r: &mut R, n: usize) -> Vec<f64> {
    crate::convex_bodies::measure::uniform_sphere(r, n)
}

impl FamilyRecipe {
    /// `n_measures` measures (the uniform law and bumps spread over the
    /// ball) and `n_anchors` constant anchors far outside `F`.
    pub fn spread(f: &SetValuedPath, n_measures: usize, n_anchors: usize, seed: u64) -> FamilyRecipe {
        let n = f.dim();
        let mut r = rng::stream(seed, 0xA11C);
        let mut measures = Vec::with_capacity(n_measures);
        if n_measures > 0 {
            measures.push(SmoothBallMeasure::Uniform);
        }
        for k in 1..n_measures {
            let radius = 0.2 + 0.6 * ((k - 1) % 4) as f64 / 3.0;
            let rho = 0.9 * (1.0 - radius);
            let center: Vec<f64> = random_unit(&mut r, n).iter().map(|x| radius * x).collect();
            measures.push(SmoothBallMeasure::bump(center, 1.0 / rho).expect("bump inside the ball"));
        }
        let far = 10.0 * (f.sup_norm() + 1.0);
        let anchors = (0..n_anchors)
            .map(|_| {
                let p: Vec<f64> = random_unit(&mut r, n).iter().map(|x| far * x).collect();
                SampledPath::constant(f.horizon(), f.len() - 1, p)
                    .expect("finite anchor")
                    .resample(f.grid())
                    .expect("same horizon")
            })
            .collect();
        FamilyRecipe {
            measures,
            anchors,
            include_steiner: true,
            supplied: Vec::new(),
            mc_samples: 2048,
            seed,
        }
    }

    /// Default budgets: 32 measures, 64 anchors.
    pub fn default_for(f: &SetValuedPath, seed: u64) -> FamilyRecipe {
        Self::spread(f, DEFAULT_MEASURES, DEFAULT_ANCHORS, seed)
    }
}

type Candidate = (Provenance, std::result::Result<SampledPath, String>);

fn steiner_candidate(f: &SetValuedPath, mu: Option<&SmoothBallMeasure>, samples: usize, seed: u64) -> std::result::Result<SampledPath, String> {
    let sel = SteinerSelector::new(mu, f.dim(), samples, seed).map_err(|e| e.to_string())?;
    let values = f
        .bodies()
        .iter()
        .map(|b| sel.select(b))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    SampledPath::new(f.grid().to_vec(), values).map_err(|e| e.to_string())
}

fn projection_candidate(f: &SetValuedPath, anchor: &SampledPath) -> std::result::Result<SampledPath, String> {
    let a = anchor.resample(f.grid()).map_err(|e| e.to_string())?;
    let values = f
        .bodies()
        .iter()
        .zip(a.values())
        .map(|(b, p)| project(p, b).map(|pr| pr.point))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    SampledPath::new(f.grid().to_vec(), values).map_err(|e| e.to_string())
}

/// Builds the candidate selections of `recipe` and keeps those that pass
/// membership (`≤ 1e-8` at every node) and the seminorm budget (`≤ r + 1e-9`).
/// Below the `r_min` estimate the family may come out empty; that is
/// recorded as a warning rather than refused.
pub fn build_selection_family(
    f: &SetValuedPath,
    alpha: f64,
    r: f64,
    recipe: &FamilyRecipe,
) -> Result<SelectionFamily> {
    let mut warnings = Vec::new();
    let rmin = r_min_estimate(f, alpha, 4096, recipe.seed)?;
    if r < rmin.value {
        warnings.push(format!(
            "r = {r} is below the r_min estimate {} (Steiner term {}, Demyanov term {}); the family may be sparse",
            rmin.value, rmin.hausdorff_term, rmin.demyanov_term
        ));
    }
    let mut jobs: Vec<(Provenance, Job)> = Vec::new();
    if recipe.include_steiner {
        jobs.push((Provenance::Steiner, Job::Steiner(None)));
    }
    for mu in &recipe.measures {
        jobs.push((
            Provenance::GeneralizedSteiner { measure: mu.clone() },
            Job::Steiner(Some(mu)),
        ));
    }
    for (k, a) in recipe.anchors.iter().enumerate() {
        jobs.push((Provenance::ProjectionAnchor { anchor: k }, Job::Anchor(a)));
    }
    for (label, p) in &recipe.supplied {
        jobs.push((Provenance::Supplied { label: label.clone() }, Job::Supplied(p)));
    }
    let candidates: Vec<Candidate> = jobs
        .into_par_iter()
        .enumerate()
        .map(|(k, (prov, job))| {
            let path = match job {
                Job::Steiner(mu) => steiner_candidate(
                    f,
                    mu,
                    recipe.mc_samples,
                    rng::derive_seed(recipe.seed, k as u64),
                ),
                Job::Anchor(a) => projection_candidate(f, a),
                Job::Supplied(p) => p.resample(f.grid()).map_err(|e| e.to_string()),
            };
            (prov, path)
        })
        .collect();
    certify(f, alpha, r, candidates, warnings)
}

enum Job<'a> {
    Steiner(Option<&'a SmoothBallMeasure>),
    Anchor(&'a SampledPath),
    Supplied(&'a SampledPath),
}

fn certify(
    f: &SetValuedPath,
    alpha: f64,
    r: f64,
    candidates: Vec<Candidate>,
    warnings: Vec<String>,
) -> Result<SelectionFamily> {
    let checked: Vec<(Provenance, std::result::Result<(SampledPath, f64), RejectionReason>)> = candidates
        .into_par_iter()
        .map(|(prov, path)| {
            let res = path
                .map_err(|message| RejectionReason::Failed { message })
                .and_then(|p| check_candidate(f, alpha, r, p));
            (prov, res)
        })
        .collect();
    let mut family = SelectionFamily {
        members: Vec::new(),
        provenance: Vec::new(),
        seminorms: Vec::new(),
        r,
        alpha,
        rejections: Vec::new(),
        warnings,
    };
    for (prov, res) in checked {
        match res {
            Ok((p, s)) => {
                family.members.push(p);
                family.provenance.push(prov);
                family.seminorms.push(s);
            }
            Err(reason) => family.rejections.push(Rejection {
                provenance: prov,
                reason,
            }),
        }
    }
    if family.members.is_empty() {
        return Err(AumannError::EmptyFamily {
            r,
            rejected: family.rejections.len(),
        });
    }
    Ok(family)
}

fn check_candidate(
    f: &SetValuedPath,
    alpha: f64,
    r: f64,
    p: SampledPath,
) -> std::result::Result<(SampledPath, f64), RejectionReason> {
    if p.dim() != f.dim() || p.len() != f.len() {
        return Err(RejectionReason::Failed {
            message: format!("candidate of dimension {} on {} nodes", p.dim(), p.len()),
        });
    }
    for (i, (v, b)) in p.values().zip(f.bodies()).enumerate() {
        let d = distance_to_set(v, b).map_err(|e| RejectionReason::Failed {
            message: e.to_string(),
        })?;
        let scale = norm(v).max(1.0);
        if d > TOL_MEMBERSHIP * scale {
            return Err(RejectionReason::NotAMember { node: i, distance: d });
        }
    }
    let s = holder_seminorm(&p, alpha)
        .map_err(|e| RejectionReason::Failed {
            message: e.to_string(),
        })?
        .seminorm;
    if s > r + TOL_SEMINORM {
        return Err(RejectionReason::SeminormExceeded { seminorm: s });
    }
    Ok((p, s))
}
