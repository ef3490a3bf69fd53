//! Divergence of unrestricted selections against `w(t) = t^{2β} cos(π/t)`.
//!
//! With `F ≡ [−1, 1]` the selections `f_n = sin(π/·)·1_{[1/n, 1]}` have
//! integrals growing without bound while their `α`-seminorms blow up, so
//! the integral over all Hölder selections is the whole line. Capping the
//! seminorm at `r` keeps the integral inside a compact interval.
//!
//! Since `d/dt cos(π/t) = π sin(π/t)/t²`, the integrals of `f_n` go to
//! `+∞`; the mirrored selections `−f_n` go to `−∞`. Both are reported.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::{build_selection_family, FamilyRecipe};
use super::integral::aumann_young_integral;
use super::{Result, SetValuedPath};
use crate::convex_bodies::ConvexBody;
use crate::paths::{holder_seminorm, uniform_grid, SampledPath};
use crate::young::YoungConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example3Config {
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Selection exponent; must satisfy `α + β > 1`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub n_max: usize,
    /// Steps of the quadrature grid on `[0, 1]`.
    pub m: usize,
    /// Budget of the bounded comparison integral.
    #[serde(default = "default_r")]
    pub r: f64,
    /// Steps of the grid carrying the bounded integral.
    #[serde(default = "default_hull_grid")]
    pub hull_grid: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_beta() -> f64 {
    0.5
}
fn default_alpha() -> f64 {
    0.6
}
fn default_r() -> f64 {
    10.0
}
fn default_hull_grid() -> usize {
    4096
}

impl Example3Config {
    pub fn new(n_max: usize) -> Self {
        Example3Config {
            beta: default_beta(),
            alpha: default_alpha(),
            n_max,
            m: 100 * n_max * n_max,
            r: default_r(),
            hull_grid: default_hull_grid(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example3Row {
    pub n: usize,
    /// `∫_0^1 f_n dw`.
    pub integral: f64,
    /// `∫_0^1 (−f_n) dw`.
    pub mirrored: f64,
    /// Grid `α`-seminorm of `f_n`.
    pub seminorm: f64,
    pub seminorm_steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Example3Report {
    pub rows: Vec<Example3Row>,
    pub warnings: Vec<String>,
    /// Mirrored sequence decreasing from `n = 2` on.
    pub eventually_decreasing: bool,
    pub first_below_minus_one: Option<usize>,
    /// Endpoints of the bounded integral `J_{1,α,r}` (inner estimate).
    pub hull: [f64; 2],
    pub hull_radius: f64,
    pub radius_bound: f64,
    pub family_size: usize,
    pub w_seminorm: f64,
    /// `2 + 2^{1−β}π^β`.
    pub w_seminorm_analytic_bound: f64,
}

fn w(beta: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.powf(2.0 * beta) * (PI / t).cos()
    }
}

fn w_prime(beta: f64, t: f64) -> f64 {
    2.0 * beta * t.powf(2.0 * beta - 1.0) * (PI / t).cos() + PI * t.powf(2.0 * beta - 2.0) * (PI / t).sin()
}

fn f_n(n: usize, t: f64) -> f64 {
    if t * n as f64 >= 1.0 {
        (PI / t).sin()
    } else {
        0.0
    }
}

/// Composite Simpson rule for `∫_a^b sin(π/t) w'(t) dt` with `k` (even) panels.
fn simpson(beta: f64, a: f64, b: f64, k: usize) -> f64 {
    let k = k.max(2) + k % 2;
    let h = (b - a) / k as f64;
    let g = |t: f64| (PI / t).sin() * w_prime(beta, t);
    let mut s = g(a) + g(b);
    for i in 1..k {
        let t = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(t);
    }
    s * h / 3.0
}

fn seminorm_of_f_n(n: usize, m: usize, alpha: f64) -> Result<(f64, usize)> {
    let steps = (64 * n * n).clamp(64, m.max(64));
    let p = SampledPath::from_fn(1.0, steps, |t| vec![f_n(n, t)])?;
    Ok((holder_seminorm(&p, alpha)?.seminorm, steps))
}

/// Integrals of `f_n` for `n = 1..n_max` by quadrature of the explicit
/// derivative of `w` on `[1/n, 1]`, their seminorms, and the bounded
/// integral of `[−1, 1]` for budget `r`.
pub fn example3_divergence(cfg: &Example3Config) -> Result<Example3Report> {
    let ycfg = YoungConfig::new(cfg.alpha, cfg.beta)?;
    let mut warnings = Vec::new();
    let needed = 100 * cfg.n_max * cfg.n_max;
    if cfg.m < needed {
        warnings.push(format!(
            "ResolutionWarning: m = {} is below 100·n_max² = {needed}; oscillations near 1/n_max are under-resolved",
            cfg.m
        ));
    }
    // pieces [1/n, 1/(n-1)], each with a share of the m panels
    let pieces: Vec<f64> = (2..=cfg.n_max.max(1))
        .into_par_iter()
        .map(|n| {
            let (a, b) = (1.0 / n as f64, 1.0 / (n - 1) as f64);
            let k = ((b - a) * cfg.m as f64).ceil() as usize;
            simpson(cfg.beta, a, b, k)
        })
        .collect();
    let seminorms: Vec<(f64, usize)> = (1..=cfg.n_max)
        .into_par_iter()
        .map(|n| seminorm_of_f_n(n, cfg.m, cfg.alpha))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(cfg.n_max);
    let mut acc = 0.0;
    for n in 1..=cfg.n_max {
        if n >= 2 {
            acc += pieces[n - 2];
        }
        rows.push(Example3Row {
            n,
            integral: acc,
            mirrored: -acc,
            seminorm: seminorms[n - 1].0,
            seminorm_steps: seminorms[n - 1].1,
        });
    }
    let eventually_decreasing = rows.windows(2).skip(1).all(|p| p[1].mirrored < p[0].mirrored);
    let first_below_minus_one = rows.iter().find(|r| r.mirrored < -1.0).map(|r| r.n);

    // bounded comparison: F ≡ [−1, 1] with budget r
    let hg = cfg.hull_grid;
    let fpath = SetValuedPath::from_fn(1.0, hg, |_| ConvexBody::interval(-1.0, 1.0).expect("interval"))?;
    let wpath = SampledPath::from_fn(1.0, hg, |t| vec![w(cfg.beta, t)])?;
    let mut recipe = FamilyRecipe::default_for(&fpath, cfg.seed);
    let grid = uniform_grid(1.0, hg);
    for n in 1..=cfg.n_max {
        let raw = SampledPath::new(grid.clone(), grid.iter().map(|&t| vec![-f_n(n, t)]).collect())?;
        let s = holder_seminorm(&raw, cfg.alpha)?.seminorm;
        let scale = if s > cfg.r { cfg.r / s } else { 1.0 };
        let capped = raw.map(|_, v| vec![v[0] * scale])?;
        recipe.supplied.push((format!("capped_mirrored_f_{n}"), capped));
    }
    let family = build_selection_family(&fpath, cfg.alpha, cfg.r, &recipe)?;
    let j = aumann_young_integral(&fpath, &wpath, &ycfg, cfg.r, &family)?;
    let v = j.hull.vertices();
    Ok(Example3Report {
        rows,
        warnings,
        eventually_decreasing,
        first_below_minus_one,
        hull: [v[0][0], v[v.len() - 1][0]],
        hull_radius: j.max_vertex_norm,
        radius_bound: j.radius_bound,
        family_size: j.family_size,
        w_seminorm: j.w_seminorm,
        w_seminorm_analytic_bound: 2.0 + 2f64.powf(1.0 - cfg.beta) * PI.powf(cfg.beta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_term_is_zero_and_warning_fires() {
        let mut cfg = Example3Config::new(5);
        cfg.m = 100;
        cfg.hull_grid = 256;
        let rep = example3_divergence(&cfg).unwrap();
        assert_eq!(rep.rows[0].integral, 0.0);
        assert!(rep.rows[0].seminorm < 1e-12);
        assert!(rep.warnings[0].starts_with("ResolutionWarning"));
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for t in [0.13, 0.5, 0.9] {
            let h = 1e-6;
            let fd = (w(0.5, t + h) - w(0.5, t - h)) / (2.0 * h);
            assert!((fd - w_prime(0.5, t)).abs() < 1e-5 * fd.abs().max(1.0));
        }
    }
}
