//! One function per command.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Command, ExperimentError, Outcome, Provenance, Relation, Result, Series};
use crate::aumann::{
    aumann_young_integral, build_selection_family, example3_divergence, indefinite_aumann_integral,
    interpolate_multifunction,
    Example3Config, FamilyRecipe, SetValuedPath,
};
use crate::convex_bodies::{
    demyanov_distance, demyanov_distance_exact_2d, distance_to_set, generalized_steiner_point,
    hausdorff_distance, steiner_lipschitz_upper, steiner_point, ConvexBody, SmoothBallMeasure,
    SteinerSelector,
};
use crate::inclusions::{
    natural_constants, solution_funnel, solve_first_order, solve_second_order,
    stochastic_inclusion_run, Coefficient, InclusionError, InclusionProblem, Order,
    ProblemTemplate, Strategy,
};
use crate::linalg::dist;
use crate::paths::{sample_fbm, time_augmented, FbmGenerator, SampledPath};
use crate::rng;
use crate::young::{verify_young_love, young_integral, Rule, YoungConfig};

use Provenance::{OurConstantChoice, PaperBound};
use Relation::{AtLeast, AtMost};

pub(super) fn dispatch(cmd: Command, params: &Value, seed: u64) -> Result<(Value, Outcome)> {
    match cmd {
        Command::Steiner => go(params, |p| steiner(p, seed)),
        Command::Metrics => go(params, |p| metrics(p, seed)),
        Command::Young => go(params, |p| young(p, seed)),
        Command::Aumann => go(params, |p| aumann(p, seed)),
        Command::Discretize => go(params, |p| discretize(p, seed)),
        Command::Example3 => go(params, |p| example3(p, seed)),
        Command::Inclusion => go(params, |p| inclusion(p, seed)),
        Command::Funnel => go(params, |p| funnel(p, seed)),
        Command::FbmCheck => go(params, |p| fbm_check(p, seed)),
    }
}

/// Parses the parameters, runs, and echoes the parameters with defaults
/// filled in.
fn go<P, F>(params: &Value, f: F) -> Result<(Value, Outcome)>
where
    P: DeserializeOwned + Serialize,
    F: FnOnce(&P) -> Result<Outcome>,
{
    let p: P = serde_json::from_value(params.clone()).map_err(|e| ExperimentError::Usage(format!("params: {e}")))?;
    let echo = serde_json::to_value(&p).map_err(|e| ExperimentError::Numerical(e.to_string()))?;
    Ok((echo, f(&p)?))
}

fn num<E: std::fmt::Display>(context: &'static str) -> impl Fn(E) -> ExperimentError {
    move |e| ExperimentError::Numerical(format!("{context}: {e}"))
}

fn usage(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Usage(msg.into())
}

fn young_cfg(alpha: f64, beta: f64) -> Result<YoungConfig> {
    YoungConfig::new(alpha, beta).map_err(|e| usage(format!("params.alpha/beta: {e}")))
}

fn random_polygon<R: Rng>(r: &mut R, k: usize, dim: usize) -> ConvexBody {
    let pts = (0..k)
        .map(|_| (0..dim).map(|_| 2.0 * r.random::<f64>() - 1.0).collect())
        .collect();
    ConvexBody::new(pts).expect("finite points")
}

fn jitter<R: Rng>(r: &mut R, body: &ConvexBody, eps: f64) -> ConvexBody {
    let pts = body
        .vertices()
        .iter()
        .map(|v| v.iter().map(|x| x + eps * (2.0 * r.random::<f64>() - 1.0)).collect())
        .collect();
    ConvexBody::new(pts).expect("finite points")
}

// ---------------------------------------------------------------- steiner

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SteinerParams {
    vertices: Vec<Vec<f64>>,
    samples: usize,
    measure: Option<SmoothBallMeasure>,
    lipschitz_pairs: usize,
}

impl Default for SteinerParams {
    fn default() -> Self {
        let tri = (0..3)
            .map(|k| {
                let a = PI / 2.0 + 2.0 * PI * k as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        SteinerParams {
            vertices: tri,
            samples: 100_000,
            measure: None,
            lipschitz_pairs: 1000,
        }
    }
}

fn steiner(p: &SteinerParams, seed: u64) -> Result<Outcome> {
    let body = ConvexBody::new(p.vertices.clone()).map_err(|e| usage(format!("params.vertices: {e}")))?;
    if p.samples == 0 {
        return Err(usage("params.samples must be positive"));
    }
    let n = body.dim();
    let mut out = Outcome::default();
    let estimate = |samples: usize| match &p.measure {
        None => Ok(steiner_point(&body, samples, seed)),
        Some(mu) => generalized_steiner_point(&body, mu, samples, seed),
    };
    let est = estimate(p.samples).map_err(|e| usage(format!("params.measure: {e}")))?;
    out.measured("estimate", &est.point);
    out.measured("std_error", &est.std_error);
    let exact = if n <= 2 {
        let sel = SteinerSelector::new(p.measure.as_ref(), n, 0, seed).map_err(num("selector"))?;
        Some(sel.select(&body).map_err(num("exact Steiner point"))?)
    } else {
        out.warnings.push("no closed form above dimension 2; Monte Carlo only".into());
        None
    };
    let membership = distance_to_set(exact.as_ref().unwrap_or(&est.point), &body).map_err(num("membership"))?;
    out.check("membership_distance", membership, AtMost, 1e-9, OurConstantChoice);
    if let Some(x) = &exact {
        out.measured("exact", x);
        out.check("estimate_error", dist(x, &est.point), AtMost, 3.0 * est.error_norm(), OurConstantChoice);
    }
    let mut series = Series {
        header: ["samples", "error_norm", "std_error_norm"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    let mut m = 1000;
    while m <= p.samples {
        let e = estimate(m).map_err(num("estimate"))?;
        let err = exact.as_ref().map_or(f64::NAN, |x| dist(x, &e.point));
        series.rows.push(vec![m as f64, err, e.error_norm()]);
        m *= 4;
    }
    out.series = series;
    if n <= 2 && p.lipschitz_pairs > 0 {
        let sel = SteinerSelector::new(p.measure.as_ref(), n, 0, seed).map_err(num("selector"))?;
        let mut r = rng::stream(seed, 0x5717);
        let pairs: Vec<(ConvexBody, ConvexBody)> = (0..p.lipschitz_pairs)
            .map(|i| {
                let a = random_polygon(&mut r, 3 + i % 6, n);
                let b = if i % 2 == 0 {
                    jitter(&mut r, &a, 0.05)
                } else {
                    random_polygon(&mut r, 3 + i % 5, n)
                };
                (a, b)
            })
            .collect();
        let mut worst: f64 = 0.0;
        for (a, b) in &pairs {
            let dh = hausdorff_distance(a, b).map_err(num("hausdorff"))?;
            if dh > 1e-12 {
                let sa = sel.select(a).map_err(num("steiner"))?;
                let sb = sel.select(b).map_err(num("steiner"))?;
                worst = worst.max(dist(&sa, &sb) / dh);
            }
        }
        if p.measure.is_none() {
            out.check("lipschitz_ratio", worst, AtMost, steiner_lipschitz_upper(n) + 0.05, PaperBound);
        } else {
            out.measured("lipschitz_ratio", worst);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- metrics

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MetricsParams {
    triples: usize,
    dim: usize,
    vertices: usize,
    n_dirs: usize,
    mc_epsilon: f64,
    segment_steps: usize,
}

impl Default for MetricsParams {
    fn default() -> Self {
        MetricsParams {
            triples: 1000,
            dim: 2,
            vertices: 6,
            n_dirs: 4096,
            mc_epsilon: 0.05,
            segment_steps: 64,
        }
    }
}

fn rotating_segment(t: f64) -> ConvexBody {
    ConvexBody::segment(vec![0.0, 0.0], vec![t.sin(), t.cos()]).expect("finite")
}

fn metrics(p: &MetricsParams, seed: u64) -> Result<Outcome> {
    if p.dim == 0 || p.vertices == 0 || p.n_dirs == 0 {
        return Err(usage("params.dim, params.vertices and params.n_dirs must be positive"));
    }
    let mut out = Outcome::default();
    let rows: Vec<[f64; 5]> = (0..p.triples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(rng::derive_seed(seed, i as u64), 0x3E7);
            let a = random_polygon(&mut r, p.vertices, p.dim);
            let b = random_polygon(&mut r, p.vertices, p.dim);
            let c = jitter(&mut r, &a, 0.1);
            let h = |x: &ConvexBody, y: &ConvexBody| hausdorff_distance(x, y).expect("same dim");
            let (ab, ba, bc, ac, aa) = (h(&a, &b), h(&b, &a), h(&b, &c), h(&a, &c), h(&a, &a));
            let mc = demyanov_distance(&a, &b, p.n_dirs, rng::derive_seed(seed, i as u64)).unwrap_or(f64::INFINITY);
            let exact = if p.dim <= 2 {
                demyanov_distance_exact_2d(&a, &b).expect("planar")
            } else {
                f64::NAN
            };
            [(ab - ba).abs(), (ac - ab - bc).max(0.0), aa, mc - ab, exact - ab]
        })
        .collect();
    let max = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    let min = |k: usize| rows.iter().map(|r| r[k]).fold(f64::INFINITY, f64::min);
    out.check("hausdorff_symmetry_defect", max(0), AtMost, 1e-9, OurConstantChoice);
    out.check("hausdorff_triangle_defect", max(1), AtMost, 1e-9, OurConstantChoice);
    out.check("hausdorff_identity_defect", max(2), AtMost, 1e-9, OurConstantChoice);
    out.check("demyanov_mc_minus_hausdorff_min", min(3), AtLeast, -p.mc_epsilon, OurConstantChoice);
    if p.dim <= 2 {
        out.check("demyanov_exact_minus_hausdorff_min", min(4), AtLeast, -1e-9, PaperBound);
    }
    let mut series = Series {
        header: ["t", "hausdorff", "demyanov_exact", "demyanov_mc"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    let f0 = rotating_segment(0.0);
    let mut min_dd = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    for k in 1..=p.segment_steps {
        let t = k as f64 * 0.5 / p.segment_steps as f64;
        let ft = rotating_segment(t);
        let dh = hausdorff_distance(&ft, &f0).map_err(num("hausdorff"))?;
        let de = demyanov_distance_exact_2d(&ft, &f0).map_err(num("demyanov"))?;
        let dm = demyanov_distance(&ft, &f0, p.n_dirs, rng::derive_seed(seed, 1 << 32 | k as u64))
            .map_err(num("demyanov"))?;
        min_dd = min_dd.min(dm);
        max_ratio = max_ratio.max(dh / t);
        series.rows.push(vec![t, dh, de, dm]);
    }
    out.check("rotating_segment_demyanov_min", min_dd, AtLeast, 0.9, PaperBound);
    out.check("rotating_segment_hausdorff_over_dt", max_ratio, AtMost, 1.0 + 1e-12, PaperBound);
    out.series = series;
    Ok(out)
}

// ------------------------------------------------------------------ young

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct YoungParams {
    alpha: f64,
    beta: f64,
    hurst: f64,
    steps: usize,
    seeds: usize,
    rule: Rule,
    levels: usize,
    tolerance: f64,
}

impl Default for YoungParams {
    fn default() -> Self {
        YoungParams {
            alpha: 0.6,
            beta: 0.7,
            hurst: 0.75,
            steps: 1 << 14,
            seeds: 10,
            rule: Rule::Trapezoid,
            levels: 3,
            tolerance: 1e-3,
        }
    }
}

fn young(p: &YoungParams, seed: u64) -> Result<Outcome> {
    let cfg = young_cfg(p.alpha, p.beta)?.with_rule(p.rule).with_levels(p.levels);
    if p.steps < 2 || p.seeds == 0 {
        return Err(usage("params.steps must be ≥ 2 and params.seeds positive"));
    }
    let mut out = Outcome::default();
    out.claim("sewing_constant", cfg.sewing_constant(), OurConstantChoice);
    let f = SampledPath::from_fn(1.0, p.steps, |t| vec![t]).map_err(num("grid"))?;
    let w = SampledPath::from_fn(1.0, p.steps, |t| vec![t * t]).map_err(num("grid"))?;
    let poly = young_integral(&f, &w, &cfg).map_err(num("young"))?;
    out.claim("polynomial_exact", 2.0 / 3.0, PaperBound);
    out.check("polynomial_error", (poly.value()[0] - 2.0 / 3.0).abs(), AtMost, 1e-4, OurConstantChoice);
    let rows: Vec<Result<Vec<f64>>> = (0..p.seeds)
        .into_par_iter()
        .map(|i| {
            let s = rng::derive_seed(seed, i as u64);
            let w = sample_fbm(p.hurst, 1.0, p.steps, 1, s).map_err(|e| usage(format!("params.hurst: {e}")))?;
            let yi = young_integral(&w, &w, &cfg).map_err(num("young"))?;
            let (w0, w1) = (w.value(0)[0], w.last()[0]);
            let exact = (w1 * w1 - w0 * w0) / 2.0;
            let rel = (yi.value()[0] - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
            let one = SampledPath::constant(1.0, p.steps, vec![1.0]).map_err(num("grid"))?;
            let id = young_integral(&one, &w, &cfg).map_err(num("young"))?;
            let id_err = (id.value()[0] - (w1 - w0)).abs();
            let yl = verify_young_love(&w, &w, &cfg).map_err(num("young-loeve"))?;
            let order = yi.orders.iter().rev().flatten().next().copied().unwrap_or(f64::NAN);
            Ok(vec![
                i as f64,
                yi.value()[0],
                exact,
                rel,
                id_err,
                yl.worst_local_ratio,
                yl.global_lhs,
                yl.global_rhs,
                order,
            ])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let max = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    out.check("chain_rule_relative_error", max(3), AtMost, p.tolerance, OurConstantChoice);
    out.check("identity_error", max(4), AtMost, 1e-12, OurConstantChoice);
    out.check("young_loeve_worst_local_ratio", max(5), AtMost, 1.0, PaperBound);
    let global = rows.iter().map(|r| r[6] / r[7]).fold(0.0, f64::max);
    out.check("young_loeve_global_ratio", global, AtMost, 1.0, PaperBound);
    out.claim("expected_order", p.alpha + p.beta - 1.0, PaperBound);
    out.series = Series {
        header: [
            "seed_index",
            "integral",
            "exact",
            "relative_error",
            "identity_error",
            "worst_local_ratio",
            "global_lhs",
            "global_rhs",
            "empirical_order",
        ]
        .map(String::from)
        .to_vec(),
        rows,
    };
    Ok(out)
}

// ----------------------------------------------------------------- aumann

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AumannParams {
    alpha: f64,
    beta: f64,
    hurst: f64,
    steps: usize,
    r: f64,
    measures: usize,
    anchors: usize,
    mc_samples: usize,
}

impl Default for AumannParams {
    fn default() -> Self {
        AumannParams {
            alpha: 0.6,
            beta: 0.7,
            hurst: 0.8,
            steps: 256,
            r: 4.0,
            measures: 32,
            anchors: 64,
            mc_samples: 2048,
        }
    }
}

/// Rotating, breathing triangle drifting on a circle, as a `1 × 2` matrix.
fn test_multifunction(steps: usize) -> Result<SetValuedPath> {
    SetValuedPath::from_fn(1.0, steps, |t| {
        let c = [0.3 * (2.0 * PI * t).sin(), 0.3 * (2.0 * PI * t).cos()];
        let rho = 0.4 * (1.0 + 0.25 * (4.0 * PI * t).sin());
        ConvexBody::regular_polygon(3, rho, c, PI * t / 2.0).expect("finite")
    })
    .and_then(|f| f.reshape(1, 2))
    .map_err(num("multifunction"))
}

fn aumann(p: &AumannParams, seed: u64) -> Result<Outcome> {
    let cfg = young_cfg(p.alpha, p.beta)?;
    let f = test_multifunction(p.steps)?;
    let w = time_augmented(&sample_fbm(p.hurst, 1.0, p.steps, 1, seed).map_err(|e| usage(format!("params: {e}")))?);
    let mut recipe = FamilyRecipe::spread(&f, p.measures, p.anchors, seed);
    recipe.mc_samples = p.mc_samples;
    let fam = build_selection_family(&f, p.alpha, p.r, &recipe).map_err(num("family"))?;
    let mut out = Outcome::default();
    out.warnings.extend(fam.warnings.iter().cloned());
    let j = aumann_young_integral(&f, &w, &cfg, p.r, &fam).map_err(num("integral"))?;
    out.measured("family_size", j.family_size);
    out.measured("rejected", fam.rejections.len());
    out.measured("hull_vertices", j.hull.vertices());
    out.measured("w_seminorm", j.w_seminorm);
    out.measured("f_sup_norm", j.f_sup_norm);
    out.check("family_size", j.family_size as f64, AtLeast, 1.0, PaperBound);
    out.check("max_vertex_norm", j.max_vertex_norm, AtMost, j.radius_bound, PaperBound);
    let mut series = Series {
        header: ["members", "max_vertex_norm", "hausdorff_to_full", "contained"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    let mut violations = 0usize;
    let mut k = 1;
    loop {
        let k_eff = k.min(fam.len());
        let sub = fam.prefix(k_eff);
        let jk = aumann_young_integral(&f, &w, &cfg, p.r, &sub).map_err(num("integral"))?;
        let inside = jk.hull.is_subset_of(&j.hull, 1e-9).map_err(num("containment"))?;
        violations += usize::from(!inside);
        let dh = hausdorff_distance(&jk.hull, &j.hull).map_err(num("hausdorff"))?;
        series.rows.push(vec![k_eff as f64, jk.max_vertex_norm, dh, f64::from(u8::from(inside))]);
        if k_eff == fam.len() {
            break;
        }
        k *= 2;
    }
    let half = fam.restrict_to_budget(p.r / 2.0).ok();
    if let Some(h) = half {
        let jh = aumann_young_integral(&f, &w, &cfg, p.r, &h).map_err(num("integral"))?;
        let inside = jh.hull.is_subset_of(&j.hull, 1e-9).map_err(num("containment"))?;
        violations += usize::from(!inside);
        out.measured("half_budget_family_size", h.len());
    }
    out.check("containment_violations", violations as f64, AtMost, 0.0, PaperBound);
    let ind = indefinite_aumann_integral(&f, &w, &cfg, p.r, &fam).map_err(num("indefinite integral"))?;
    let beta_const = ind.path.hausdorff_seminorm(p.beta).map_err(num("seminorm"))?;
    let alpha_const = ind.path.hausdorff_seminorm(p.alpha).map_err(num("seminorm"))?;
    out.check("indefinite_beta_constant", beta_const, AtMost, 1.05 * ind.holder_constant, PaperBound);
    out.check("indefinite_alpha_seminorm", alpha_const, AtMost, 1.05 * ind.rho_w, PaperBound);
    out.series = series;
    Ok(out)
}

// ------------------------------------------------------------- discretize

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DiscretizeParams {
    alpha: f64,
    beta: f64,
    hurst: f64,
    fine_steps: usize,
    base_steps: usize,
    levels: usize,
    r: f64,
    measures: usize,
    anchors: usize,
    relative_tolerance: f64,
}

impl Default for DiscretizeParams {
    fn default() -> Self {
        DiscretizeParams {
            alpha: 0.6,
            beta: 0.7,
            hurst: 0.8,
            fine_steps: 512,
            base_steps: 16,
            levels: 4,
            r: 10.0,
            measures: 16,
            anchors: 16,
            relative_tolerance: 1e-2,
        }
    }
}

fn discretize(p: &DiscretizeParams, seed: u64) -> Result<Outcome> {
    let cfg = young_cfg(p.alpha, p.beta)?;
    if p.levels < 2 || p.base_steps < 1 || !p.fine_steps.is_multiple_of(p.base_steps << (p.levels - 1)) {
        return Err(usage("params.levels must be ≥ 2 and base_steps·2^(levels−1) must divide fine_steps"));
    }
    let w = time_augmented(
        &sample_fbm(p.hurst, 1.0, p.fine_steps, 1, seed).map_err(|e| usage(format!("params: {e}")))?,
    );
    let f = test_multifunction(p.fine_steps)?;
    let recipe = FamilyRecipe::spread(&f, p.measures, p.anchors, seed);
    let fam = build_selection_family(&f, p.alpha, p.r, &recipe).map_err(num("family"))?;
    let mut hulls = Vec::new();
    let mut out = Outcome::default();
    out.warnings.extend(fam.warnings.iter().cloned());
    let mut series = Series {
        header: ["steps", "family_size", "hull_diameter", "hausdorff_to_previous"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    for l in 0..p.levels {
        let m = p.base_steps << l;
        let stride = p.fine_steps / m;
        let times: Vec<f64> = f.grid().iter().step_by(stride).copied().collect();
        let fm = interpolate_multifunction(&f, &times).map_err(num("interpolation"))?;
        let fam_m = fam.interpolate(&times, &fm).map_err(num("family"))?;
        let j = aumann_young_integral(&fm, &w, &cfg, p.r, &fam_m).map_err(num("integral"))?;
        let gap = match hulls.last() {
            Some(prev) => hausdorff_distance(prev, &j.hull).map_err(num("hausdorff"))?,
            None => f64::NAN,
        };
        series.rows.push(vec![m as f64, j.family_size as f64, j.hull.diameter(), gap]);
        hulls.push(j.hull);
    }
    let gaps: Vec<f64> = series.rows.iter().skip(1).map(|r| r[3]).collect();
    let increases = gaps.windows(2).filter(|g| g[1] >= g[0]).count();
    out.measured("gaps", &gaps);
    out.check("gap_non_decreases", increases as f64, AtMost, 0.0, PaperBound);
    let last = *gaps.last().expect("two levels");
    let diam = hulls.last().expect("levels").diameter();
    out.check("final_gap", last, AtMost, p.relative_tolerance * diam, OurConstantChoice);
    out.series = series;
    Ok(out)
}

// --------------------------------------------------------------- example3

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Example3Params {
    n_max: usize,
    #[serde(default = "half")]
    beta: f64,
    #[serde(default = "point_six")]
    alpha: f64,
    #[serde(default = "ten")]
    r: f64,
    #[serde(default = "hull_grid")]
    hull_grid: usize,
    #[serde(default)]
    m: Option<usize>,
}

fn half() -> f64 {
    0.5
}
fn point_six() -> f64 {
    0.6
}
fn ten() -> f64 {
    10.0
}
fn hull_grid() -> usize {
    4096
}

fn example3(p: &Example3Params, seed: u64) -> Result<Outcome> {
    if p.n_max < 2 {
        return Err(usage("params.n_max must be ≥ 2"));
    }
    let mut cfg = Example3Config::new(p.n_max);
    cfg.beta = p.beta;
    cfg.alpha = p.alpha;
    cfg.r = p.r;
    cfg.hull_grid = p.hull_grid;
    cfg.seed = seed;
    if let Some(m) = p.m {
        cfg.m = m;
    }
    let rep = example3_divergence(&cfg).map_err(num("example3"))?;
    let mut out = Outcome::default();
    out.warnings.extend(rep.warnings.iter().cloned());
    out.measured("eventually_decreasing", rep.eventually_decreasing);
    out.measured("first_below_minus_one", rep.first_below_minus_one);
    out.measured("hull", rep.hull);
    out.measured("family_size", rep.family_size);
    out.check(
        "eventually_decreasing",
        f64::from(u8::from(rep.eventually_decreasing)),
        AtLeast,
        1.0,
        PaperBound,
    );
    out.check(
        "first_below_minus_one",
        rep.first_below_minus_one.map_or(f64::INFINITY, |n| n as f64),
        AtMost,
        p.n_max as f64,
        PaperBound,
    );
    out.check("hull_radius", rep.hull_radius, AtMost, rep.radius_bound, PaperBound);
    out.check("w_seminorm", rep.w_seminorm, AtMost, rep.w_seminorm_analytic_bound, PaperBound);
    out.series = Series {
        header: ["n", "integral", "mirrored", "seminorm", "seminorm_steps"].map(String::from).to_vec(),
        rows: rep
            .rows
            .iter()
            .map(|r| vec![r.n as f64, r.integral, r.mirrored, r.seminorm, r.seminorm_steps as f64])
            .collect(),
    };
    Ok(out)
}

// -------------------------------------------------------------- inclusion

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct InclusionParams {
    phi: Coefficient,
    k1: Option<f64>,
    k2: Option<f64>,
    big_r: Option<f64>,
    xi: Vec<f64>,
    alpha: f64,
    beta: f64,
    /// Defaults to `R + k1 + k2`.
    r: Option<f64>,
    horizon: f64,
    steps: usize,
    hurst: f64,
    order: Order,
    strategy: Strategy,
    residual_tol: f64,
    n_paths: usize,
}

impl Default for InclusionParams {
    fn default() -> Self {
        InclusionParams {
            phi: Coefficient::RadiusField {
                center: vec![0.02, 0.01],
                shape: [1, 2],
                radius: 0.02,
                time_amplitude: 0.02,
                state_gain: 0.05,
            },
            k1: None,
            k2: None,
            big_r: None,
            xi: vec![0.0],
            alpha: 0.45,
            beta: 0.85,
            r: None,
            horizon: 1.0,
            steps: 256,
            hurst: 0.9,
            order: Order::First,
            strategy: Strategy::GeneralizedSteiner {
                measure: SmoothBallMeasure::bump(vec![0.4, -0.3], 3.0).expect("inside the ball"),
            },
            residual_tol: 1e-3,
            n_paths: 1,
        }
    }
}

impl InclusionParams {
    fn template(&self) -> Result<(ProblemTemplate, (f64, f64, f64))> {
        let young = young_cfg(self.alpha, self.beta)?;
        self.phi.validate().map_err(|e| usage(format!("params.phi: {e}")))?;
        let nat = natural_constants(&self.phi, self.alpha, self.horizon);
        let k1 = self.k1.unwrap_or(nat.0);
        let k2 = self.k2.unwrap_or(nat.1);
        let big_r = self.big_r.unwrap_or(nat.2);
        let r = self.r.unwrap_or(match self.order {
            Order::First => big_r + k1 + k2,
            // the second-order threshold depends on the driver; leave room
            Order::Second => k1 + 4.0 * k2 + big_r,
        });
        Ok((
            ProblemTemplate {
                phi: self.phi.clone(),
                k1,
                k2,
                big_r,
                xi: self.xi.clone(),
                young,
                r,
                horizon: self.horizon,
                steps: self.steps,
                order: self.order,
                strategy: self.strategy.clone(),
                residual_tol: self.residual_tol,
            },
            nat,
        ))
    }

    fn driver(&self, seed: u64) -> Result<SampledPath> {
        let dims = match self.order {
            Order::First => self.phi.shape().1.saturating_sub(1).max(1),
            Order::Second => 1,
        };
        let b = FbmGenerator::new(self.hurst, self.horizon, self.steps)
            .map_err(|e| usage(format!("params.hurst/steps: {e}")))?
            .sample(dims, seed);
        Ok(match self.order {
            Order::First => time_augmented(&b),
            Order::Second => b,
        })
    }

    fn problem(&self, t: &ProblemTemplate, seed: u64) -> Result<InclusionProblem> {
        let w = self.driver(seed)?;
        Ok(InclusionProblem::new(
            t.phi.clone(),
            (t.k1, t.k2, t.big_r),
            t.xi.clone(),
            w,
            t.young.clone(),
            t.r,
        ))
    }
}

fn inclusion_error(e: InclusionError) -> ExperimentError {
    match e {
        InclusionError::InvalidProblem(m) => usage(format!("params: {m}")),
        e => ExperimentError::Numerical(e.to_string()),
    }
}

fn inclusion(p: &InclusionParams, seed: u64) -> Result<Outcome> {
    let (t, nat) = p.template()?;
    let mut out = Outcome::default();
    out.claim("k1", t.k1, OurConstantChoice);
    out.claim("k2", t.k2, OurConstantChoice);
    out.claim("big_r", t.big_r, OurConstantChoice);
    out.claim("r", t.r, OurConstantChoice);
    out.claim("natural_constants", nat, OurConstantChoice);
    if p.n_paths == 0 {
        return Err(usage("params.n_paths must be positive"));
    }
    if p.n_paths > 1 {
        let rep = stochastic_inclusion_run(p.hurst, &t, p.n_paths, seed).map_err(inclusion_error)?;
        out.measured("success_rate", rep.success_rate);
        out.measured("max_residual", rep.max_residual);
        out.check("success_rate", rep.success_rate, AtLeast, 1.0, PaperBound);
        if let (Some(m), Some(se)) = (rep.mean_path.last(), rep.mean_path_se.last()) {
            out.measured("mean_terminal_displacement", *m);
            out.measured("mean_terminal_displacement_se", *se);
            let unit = matches!(&t.phi, Coefficient::Constant { body, .. } if body.vertices() == [vec![1.0]]);
            if unit && t.order == Order::Second {
                let want = p.horizon.powf(2.0 * p.hurst) / 2.0;
                out.claim("second_moment_half", want, PaperBound);
                out.check("second_order_mean_deviation", (m - want).abs(), AtMost, 3.0 * se, OurConstantChoice);
            }
        }
        out.series = Series {
            header: ["path", "solved", "residual", "iterations", "windows"].map(String::from).to_vec(),
            rows: rep
                .outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.index as f64,
                        f64::from(u8::from(o.solved)),
                        o.residual.unwrap_or(f64::NAN),
                        o.iterations.map_or(f64::NAN, |k| k as f64),
                        o.windows.map_or(f64::NAN, |k| k as f64),
                    ]
                })
                .collect(),
        };
        return Ok(out);
    }
    let prob = p.problem(&t, seed)?;
    let res = match t.order {
        Order::First => solve_first_order(&prob, &t.strategy, seed),
        Order::Second => solve_second_order(&prob, &t.strategy, seed),
    };
    let rep = match res {
        Ok(r) => r,
        Err(InclusionError::NonConvergence { report }) => {
            out.warnings.push("Picard iteration did not converge".into());
            *report
        }
        Err(e) => return Err(inclusion_error(e)),
    };
    out.warnings.extend(rep.warnings.iter().cloned());
    out.measured("t0", rep.t0);
    out.measured("windows", rep.window_schedule.len());
    out.measured("own_selection_certified", rep.own_selection_certified);
    out.measured("family_size", rep.family_size);
    out.check("residual", rep.residual, AtMost, t.residual_tol, OurConstantChoice);
    out.check("iterations", rep.iterations as f64, AtMost, prob.max_iter as f64, OurConstantChoice);
    out.check("converged", f64::from(u8::from(rep.converged)), AtLeast, 1.0, PaperBound);
    let worst = rep.window_schedule.iter().map(|w| w.condition).fold(0.0, f64::max);
    out.check("window_condition", worst, AtMost, 1.0, PaperBound);
    if let Some(ibp) = rep.ibp_residual {
        out.check("integration_by_parts", ibp, AtMost, t.residual_tol, OurConstantChoice);
    }
    let e = rep.path.dim();
    let mut header = vec!["t".to_string()];
    header.extend((0..e).map(|k| format!("x{k}")));
    header.extend(["node_residual", "integral_radius"].map(String::from));
    out.series = Series {
        header,
        rows: (0..rep.path.len())
            .map(|i| {
                let mut row = vec![rep.path.grid()[i]];
                row.extend_from_slice(rep.path.value(i));
                row.push(rep.node_residuals[i]);
                row.push(rep.integral_radius[i]);
                row
            })
            .collect(),
    };
    Ok(out)
}

// ----------------------------------------------------------------- funnel

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FunnelParams {
    phi: Coefficient,
    k1: Option<f64>,
    k2: Option<f64>,
    big_r: Option<f64>,
    xi: Vec<f64>,
    alpha: f64,
    beta: f64,
    r: Option<f64>,
    horizon: f64,
    steps: usize,
    hurst: f64,
    strategies: Vec<Strategy>,
}

impl Default for FunnelParams {
    fn default() -> Self {
        let d = InclusionParams::default();
        let bump = |c: Vec<f64>| Strategy::GeneralizedSteiner {
            measure: SmoothBallMeasure::bump(c, 3.0).expect("inside the ball"),
        };
        FunnelParams {
            phi: d.phi,
            k1: d.k1,
            k2: d.k2,
            big_r: d.big_r,
            xi: d.xi,
            alpha: d.alpha,
            beta: d.beta,
            r: d.r,
            horizon: d.horizon,
            steps: d.steps,
            hurst: d.hurst,
            strategies: vec![
                Strategy::Steiner,
                bump(vec![0.4, -0.3]),
                bump(vec![-0.4, 0.3]),
                Strategy::Anchor { point: vec![1.0, 1.0] },
                Strategy::Anchor { point: vec![-1.0, -1.0] },
            ],
        }
    }
}

fn funnel(p: &FunnelParams, seed: u64) -> Result<Outcome> {
    let b = p;
    if p.strategies.is_empty() {
        return Err(usage("params.strategies must not be empty"));
    }
    let ip = InclusionParams {
        phi: b.phi.clone(),
        k1: b.k1,
        k2: b.k2,
        big_r: b.big_r,
        xi: b.xi.clone(),
        alpha: b.alpha,
        beta: b.beta,
        r: b.r,
        horizon: b.horizon,
        steps: b.steps,
        hurst: b.hurst,
        ..InclusionParams::default()
    };
    let (t, _) = ip.template()?;
    let prob = ip.problem(&t, seed)?;
    let rep = solution_funnel(&prob, &p.strategies, seed).map_err(inclusion_error)?;
    let mut out = Outcome::default();
    out.warnings.extend(rep.failures.iter().cloned());
    let solved: Vec<_> = rep.reports.iter().flatten().collect();
    out.measured("converged_strategies", solved.len());
    out.measured("max_residual", solved.iter().map(|r| r.residual).fold(0.0, f64::max));
    let n = rep.widths.len();
    let radius: Vec<f64> = (0..n)
        .map(|i| solved.iter().map(|r| r.integral_radius[i]).fold(0.0, f64::max))
        .collect();
    let worst = (0..n)
        .map(|i| rep.widths[i] - 2.0 * radius[i])
        .fold(f64::NEG_INFINITY, f64::max);
    out.check("width_minus_twice_radius", worst, AtMost, 1e-12, PaperBound);
    let e = prob.xi.len();
    let mut header = vec!["t".to_string(), "width".into(), "integral_radius".into()];
    if e == 1 {
        header.extend(["lo", "hi"].map(String::from));
    }
    out.series = Series {
        header,
        rows: (0..n)
            .map(|i| {
                let mut row = vec![prob.w.grid()[i], rep.widths[i], radius[i]];
                if e == 1 {
                    let v = rep.hulls[i].vertices();
                    row.push(v.iter().map(|x| x[0]).fold(f64::INFINITY, f64::min));
                    row.push(v.iter().map(|x| x[0]).fold(f64::NEG_INFINITY, f64::max));
                }
                row
            })
            .collect(),
    };
    Ok(out)
}

// -------------------------------------------------------------- fbm-check

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FbmCheckParams {
    hurst: f64,
    #[serde(default = "fbm_steps")]
    steps: usize,
    #[serde(default = "fbm_seeds")]
    seeds: usize,
    #[serde(default = "fbm_times")]
    times: usize,
    #[serde(default = "one")]
    horizon: f64,
    #[serde(default = "three")]
    z_max: f64,
}

fn fbm_steps() -> usize {
    64
}
fn fbm_seeds() -> usize {
    10_000
}
fn fbm_times() -> usize {
    8
}
fn one() -> f64 {
    1.0
}
fn three() -> f64 {
    3.0
}

fn fbm_check(p: &FbmCheckParams, seed: u64) -> Result<Outcome> {
    if p.times == 0 || !p.steps.is_multiple_of(p.times) {
        return Err(usage("params.times must divide params.steps"));
    }
    if p.seeds < 2 {
        return Err(usage("params.seeds must be ≥ 2"));
    }
    let gen = FbmGenerator::new(p.hurst, p.horizon, p.steps).map_err(|e| usage(format!("params: {e}")))?;
    let stride = p.steps / p.times;
    let idx: Vec<usize> = (1..=p.times).map(|k| k * stride).collect();
    let samples: Vec<Vec<f64>> = (0..p.seeds)
        .into_par_iter()
        .map(|i| {
            let path = gen.sample_coordinate(rng::derive_seed(seed, i as u64), 0);
            idx.iter().map(|&j| path[j]).collect()
        })
        .collect();
    let h = p.hurst;
    let cov = |s: f64, t: f64| 0.5 * (t.powf(2.0 * h) + s.powf(2.0 * h) - (t - s).abs().powf(2.0 * h));
    let n = p.seeds as f64;
    let mut out = Outcome::default();
    let mut series = Series {
        header: ["i", "j", "t_i", "t_j", "empirical", "theory", "std_error", "z"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    let mut worst: f64 = 0.0;
    let grid_t = |j: usize| p.horizon * j as f64 / p.steps as f64;
    for a in 0..p.times {
        for b in a..p.times {
            let prods: Vec<f64> = samples.iter().map(|s| s[a] * s[b]).collect();
            let mean = prods.iter().sum::<f64>() / n;
            let var = prods.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let se = (var / n).sqrt();
            let (ta, tb) = (grid_t(idx[a]), grid_t(idx[b]));
            let want = cov(ta, tb);
            let z = (mean - want) / se;
            worst = worst.max(z.abs());
            series.rows.push(vec![a as f64, b as f64, ta, tb, mean, want, se, z]);
        }
    }
    let last = series.rows.last().expect("nonempty").clone();
    out.claim("terminal_variance_theory", last[5], PaperBound);
    out.measured("terminal_variance", last[4]);
    out.measured("terminal_variance_se", last[6]);
    out.check("terminal_variance_z", last[7].abs(), AtMost, p.z_max, OurConstantChoice);
    out.check("covariance_max_abs_z", worst, AtMost, p.z_max, OurConstantChoice);
    out.measured("method", format!("{:?}", gen.method()));
    out.measured("entries", series.rows.len());
    out.series = series;
    Ok(out)
}
