//! Pathwise solves driven by fractional Brownian motion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coefficient::Coefficient;
use super::solver::{solve_first_order, solve_second_order, InclusionProblem, Order, Strategy};
use super::{InclusionError, Result};
use crate::paths::{time_augmented, uniform_grid, FbmGenerator};
use crate::rng;
use crate::young::YoungConfig;

/// Everything but the driver.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemTemplate {
    pub phi: Coefficient,
    pub k1: f64,
    pub k2: f64,
    pub big_r: f64,
    pub xi: Vec<f64>,
    pub young: YoungConfig,
    pub r: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    pub steps: usize,
    pub order: Order,
    #[serde(default = "steiner")]
    pub strategy: Strategy,
    /// A path counts as solved when its membership residual is at most this.
    #[serde(default = "residual_tol")]
    pub residual_tol: f64,
}

fn one() -> f64 {
    1.0
}

fn steiner() -> Strategy {
    Strategy::Steiner
}

fn residual_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize)]
pub struct PathOutcome {
    pub index: usize,
    pub seed: u64,
    pub solved: bool,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub windows: Option<usize>,
    pub terminal: Option<Vec<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleReport {
    pub hurst: f64,
    pub n_paths: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub grid: Vec<f64>,
    /// Mean of the first coordinate of `x(t) − ξ` over solved paths.
    pub mean_path: Vec<f64>,
    /// Standard error of that mean.
    pub mean_path_se: Vec<f64>,
    pub outcomes: Vec<PathOutcome>,
}

/// Solves the template on `n_paths` independent fBm drivers; first-order
/// problems see `W = (t, B_1, …, B_{d−1})`, second-order ones `w0 = B`.
pub fn stochastic_inclusion_run(
    hurst: f64,
    template: &ProblemTemplate,
    n_paths: usize,
    seed: u64,
) -> Result<EnsembleReport> {
    if n_paths == 0 {
        return Err(InclusionError::InvalidProblem("need at least one path".into()));
    }
    let cfg = &template.young;
    if !(cfg.alpha < cfg.beta && cfg.beta < hurst && hurst < 1.0 && hurst > 0.5) {
        return Err(InclusionError::InvalidProblem(format!(
            "need 1/2 < H < 1 and α < β < H, got H = {hurst}, α = {}, β = {}",
            cfg.alpha, cfg.beta
        )));
    }
    let (_, d) = template.phi.shape();
    let fbm_dims = match template.order {
        Order::First if d < 2 => {
            return Err(InclusionError::InvalidProblem(
                "first-order fBm problems need d ≥ 2 (time plus noise)".into(),
            ))
        }
        Order::First => d - 1,
        Order::Second => 1,
    };
    let gen = FbmGenerator::new(hurst, template.horizon, template.steps)?;
    let outcomes: Vec<(PathOutcome, Option<Vec<f64>>)> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let s = rng::derive_seed(seed, i as u64);
            solve_one(&gen, template, fbm_dims, i, s)
        })
        .collect::<Result<_>>()?;
    let grid = uniform_grid(template.horizon, template.steps);
    let solved: Vec<&Vec<f64>> = outcomes.iter().filter_map(|(_, m)| m.as_ref()).collect();
    let k = solved.len();
    let (mean_path, mean_path_se) = if k == 0 {
        (vec![f64::NAN; grid.len()], vec![f64::NAN; grid.len()])
    } else {
        let mean: Vec<f64> = (0..grid.len())
            .map(|j| solved.iter().map(|p| p[j]).sum::<f64>() / k as f64)
            .collect();
        let se = (0..grid.len())
            .map(|j| {
                if k < 2 {
                    return f64::NAN;
                }
                let v = solved.iter().map(|p| (p[j] - mean[j]).powi(2)).sum::<f64>() / (k - 1) as f64;
                (v / k as f64).sqrt()
            })
            .collect();
        (mean, se)
    };
    let residuals: Vec<f64> = outcomes.iter().filter_map(|(o, _)| o.residual).collect();
    let successes = outcomes.iter().filter(|(o, _)| o.solved).count();
    Ok(EnsembleReport {
        hurst,
        n_paths,
        successes,
        success_rate: successes as f64 / n_paths as f64,
        max_residual: residuals.iter().copied().fold(0.0, f64::max),
        mean_residual: if residuals.is_empty() {
            f64::NAN
        } else {
            residuals.iter().sum::<f64>() / residuals.len() as f64
        },
        grid,
        mean_path,
        mean_path_se,
        outcomes: outcomes.into_iter().map(|(o, _)| o).collect(),
    })
}

fn solve_one(
    gen: &FbmGenerator,
    t: &ProblemTemplate,
    dims: usize,
    index: usize,
    seed: u64,
) -> Result<(PathOutcome, Option<Vec<f64>>)> {
    let b = gen.sample(dims, seed);
    let w = match t.order {
        Order::First => time_augmented(&b),
        Order::Second => b,
    };
    let mut p = InclusionProblem::new(t.phi.clone(), (t.k1, t.k2, t.big_r), t.xi.clone(), w, t.young.clone(), t.r);
    p.probes = 64;
    let res = match t.order {
        Order::First => solve_first_order(&p, &t.strategy, seed),
        Order::Second => solve_second_order(&p, &t.strategy, seed),
    };
    let mut out = PathOutcome {
        index,
        seed,
        solved: false,
        residual: None,
        iterations: None,
        windows: None,
        terminal: None,
        error: None,
    };
    match res {
        Ok(rep) => {
            out.solved = rep.residual <= t.residual_tol;
            out.residual = Some(rep.residual);
            out.iterations = Some(rep.iterations);
            out.windows = Some(rep.window_schedule.len());
            out.terminal = Some(rep.path.last().to_vec());
            let first: Vec<f64> = rep.path.values().map(|v| v[0] - t.xi[0]).collect();
            let keep = out.solved.then_some(first);
            Ok((out, keep))
        }
        Err(InclusionError::NonConvergence { report }) => {
            out.residual = Some(report.residual);
            out.iterations = Some(report.iterations);
            out.windows = Some(report.window_schedule.len());
            out.error = Some("no convergence".into());
            Ok((out, None))
        }
        Err(InclusionError::InvalidProblem(m)) => {
            out.error = Some(m);
            Ok((out, None))
        }
        Err(e) => Err(e),
    }
}
