//! Windowed Picard iteration for single-valued branches of the inclusion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coefficient::{probe, Coefficient, ProbeReport};
use super::{InclusionError, Result};
use crate::aumann::{
    build_selection_family, indefinite_aumann_integral, rho_w, FamilyRecipe, SetValuedPath,
};
use crate::convex_bodies::{
    distance_to_set, hull_of_points, project, ConvexBody, SmoothBallMeasure, SteinerSelector,
};
use crate::linalg::dist;
use crate::paths::{holder_seminorm, SampledPath};
use crate::young::{riemann_path, Rule, YoungConfig};

/// Selection rule used to realize one branch of the solution map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Strategy {
    Steiner,
    GeneralizedSteiner { measure: SmoothBallMeasure },
    /// Nearest point of `Φ(t, x)` to a fixed point.
    Anchor { point: Vec<f64> },
}

impl Strategy {
    fn selector(&self, dim: usize, mc_samples: usize, seed: u64) -> Result<Selector> {
        Ok(match self {
            Strategy::Steiner => Selector::Steiner(SteinerSelector::new(None, dim, mc_samples, seed)?),
            Strategy::GeneralizedSteiner { measure } => {
                Selector::Steiner(SteinerSelector::new(Some(measure), dim, mc_samples, seed)?)
            }
            Strategy::Anchor { point } => {
                if point.len() != dim {
                    return Err(InclusionError::InvalidProblem(format!(
                        "anchor of dimension {} for bodies of dimension {dim}",
                        point.len()
                    )));
                }
                Selector::Anchor(point.clone())
            }
        })
    }
}

enum Selector {
    Steiner(SteinerSelector),
    Anchor(Vec<f64>),
}

impl Selector {
    fn select(&self, body: &ConvexBody) -> Result<Vec<f64>> {
        Ok(match self {
            Selector::Steiner(s) => s.select(body)?,
            Selector::Anchor(p) => project(p, body)?.point,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InclusionProblem {
    pub phi: Coefficient,
    pub k1: f64,
    pub k2: f64,
    pub big_r: f64,
    pub xi: Vec<f64>,
    /// Driver; scalar for second-order problems.
    pub w: SampledPath,
    pub young: YoungConfig,
    pub r: f64,
    /// Space exponent of the continuity modulus in `x`.
    pub gamma: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub probes: usize,
    /// Candidates per residual family: measures and anchors.
    pub residual_measures: usize,
    pub residual_anchors: usize,
    pub mc_samples: usize,
}

impl InclusionProblem {
    pub fn new(
        phi: Coefficient,
        (k1, k2, big_r): (f64, f64, f64),
        xi: Vec<f64>,
        w: SampledPath,
        young: YoungConfig,
        r: f64,
    ) -> Self {
        InclusionProblem {
            phi,
            k1,
            k2,
            big_r,
            xi,
            w,
            young,
            r,
            gamma: 1.0,
            tol: 1e-6,
            max_iter: 50,
            probes: 256,
            residual_measures: 8,
            residual_anchors: 8,
            mc_samples: 2048,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.w.horizon()
    }

    /// `R + k1 + k2`.
    pub fn r0(&self) -> f64 {
        self.big_r + self.k1 + self.k2
    }

    fn check(&self, order: Order, seed: u64) -> Result<ProbeReport> {
        let bad = |m: String| Err(InclusionError::InvalidProblem(m));
        self.phi.validate()?;
        self.young.validate()?;
        let (e, d) = self.phi.shape();
        match order {
            Order::First => {
                if self.xi.len() != e || self.w.dim() != d {
                    return bad(format!(
                        "Φ has shape {e}×{d} but ξ has dimension {} and w dimension {}",
                        self.xi.len(),
                        self.w.dim()
                    ));
                }
            }
            Order::Second => {
                if (e, d) != (1, 1) || self.xi.len() != 1 || self.w.dim() != 1 {
                    return bad("second-order problems need scalar Φ, ξ and w0".into());
                }
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("γ = {} must lie in (0, 1]", self.gamma));
        }
        if self.young.alpha * self.gamma + self.young.beta <= 1.0 {
            return bad("need αγ + β > 1".into());
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("tolerance and iteration budget must be positive".into());
        }
        if [self.k1, self.k2, self.big_r, self.r].iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return bad("constants must be finite and nonnegative".into());
        }
        let rmin = match order {
            Order::First => self.r0(),
            Order::Second => {
                let n = holder_seminorm(&self.w, self.young.alpha)?.total;
                self.k1 + self.k2 * (n + 1.0)
            }
        };
        if self.r < rmin {
            return bad(format!("r = {} is below the required {rmin}", self.r));
        }
        let w0 = self.w.value(0);
        let range: f64 = (0..self.w.dim())
            .map(|j| self.w.values().map(|v| (v[j] - w0[j]).abs()).fold(0.0, f64::max))
            .sum();
        let spread = 1.0 + self.big_r * range;
        let rep = probe(
            &self.phi,
            self.k1,
            self.k2,
            self.big_r,
            self.young.alpha,
            self.gamma,
            self.horizon(),
            &self.xi,
            spread,
            self.probes,
            seed,
        );
        if !rep.satisfied {
            return bad(format!(
                "declared constants fail on probes: k1 {} vs {}, k2 {} vs {}, R {} vs {}",
                rep.k1_measured, self.k1, rep.k2_measured, self.k2, rep.r_measured, self.big_r
            ));
        }
        Ok(rep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    First,
    Second,
}

/// One gluing window `[t_start, t_end]` on nodes `start..=end`.
#[derive(Debug, Clone, Serialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// `(1 + T0^α) ρ_w(T0, r)` at `T0 = t_end − t_start`.
    pub condition: f64,
    pub iterations: usize,
    /// Sup-node change between successive iterates.
    pub changes: Vec<f64>,
    pub halved: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub path: SampledPath,
    /// `max_i dist(x(t_i) − ξ, J_i)`, with zero slack.
    pub residual: f64,
    pub node_residuals: Vec<f64>,
    /// Largest iteration count over windows.
    pub iterations: usize,
    /// Largest admissible window length.
    pub t0: f64,
    pub window_schedule: Vec<Window>,
    pub converged: bool,
    /// Whether every window satisfies `(1 + T0^α) ρ_w(T0, r) ≤ 1`; false
    /// when the admissible `T0` is shorter than a grid step.
    pub window_condition_met: bool,
    /// Whether the branch's own selection passed the family certificate.
    pub own_selection_certified: bool,
    pub family_size: usize,
    /// Largest vertex norm of the inner hull `J_i` at each node.
    pub integral_radius: Vec<f64>,
    /// `max_t |∫_0^t I1 dw0 − (w0 I1 − I2)|` for second-order solves.
    pub ibp_residual: Option<f64>,
    pub probe: ProbeReport,
    pub warnings: Vec<String>,
}

/// Largest `T0 ≤ T` with `(1 + T0^α) ρ_w(T0, r) ≤ 1` (with `‖Φ‖ ≤ f_sup`
/// and the seminorm of `w` on the whole horizon).
pub fn window_schedule(cfg: &YoungConfig, horizon: f64, f_sup: f64, r: f64, w_seminorm: f64) -> f64 {
    let g = |t: f64| (1.0 + t.powf(cfg.alpha)) * rho_w(cfg, t, f_sup, r, w_seminorm);
    if g(horizon) <= 1.0 {
        return horizon;
    }
    let (mut lo, mut hi) = (0.0, horizon);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn window_condition(cfg: &YoungConfig, t0: f64, f_sup: f64, r: f64, w_seminorm: f64) -> f64 {
    (1.0 + t0.powf(cfg.alpha)) * rho_w(cfg, t0, f_sup, r, w_seminorm)
}

/// Shared state of the iteration: integrand embedding and readout.
struct Scheme<'a> {
    p: &'a InclusionProblem,
    order: Order,
    /// Driver the state integrates against.
    drive: SampledPath,
    selector: Selector,
}

impl Scheme<'_> {
    /// Rows of the integrand matrix (length of the state vector).
    fn rows(&self) -> usize {
        match self.order {
            Order::First => self.p.xi.len(),
            Order::Second => 2,
        }
    }

    /// Integrand matrix `G(φ)` (row-major, `rows × drive.dim()`).
    fn embed(&self, phi: &[f64]) -> Vec<f64> {
        match self.order {
            Order::First => phi.to_vec(),
            Order::Second => vec![phi[0], 0.0, 0.0, phi[0]],
        }
    }

    fn readout(&self, j: usize, state: &[f64]) -> Vec<f64> {
        match self.order {
            Order::First => self.p.xi.iter().zip(state).map(|(x, s)| x + s).collect(),
            Order::Second => {
                let w0 = self.p.w.value(j)[0];
                vec![self.p.xi[0] + w0 * state[0] - state[1]]
            }
        }
    }

    fn select(&self, j: usize, x: &[f64]) -> Result<Vec<f64>> {
        let t = self.drive.grid()[j];
        self.selector.select(&self.p.phi.eval(t, x))
    }

    fn increment(&self, acc: &mut [f64], k: usize, g0: &[f64], g1: &[f64]) {
        let d = self.drive.dim();
        let (a, b) = (self.drive.value(k), self.drive.value(k + 1));
        let (c0, c1) = match self.p.young.rule {
            Rule::LeftPoint => (1.0, 0.0),
            Rule::Trapezoid => (0.5, 0.5),
        };
        for (i, o) in acc.iter_mut().enumerate() {
            for j in 0..d {
                let dw = b[j] - a[j];
                *o += (c0 * g0[i * d + j] + c1 * g1[i * d + j]) * dw;
            }
        }
    }

    /// Picard iteration on nodes `a..=b` given the state and selection at `a`.
    /// Returns the iterates' changes, whether they settled, and the
    /// window's states, positions and selections (excluding node `a`).
    #[allow(clippy::type_complexity)]
    fn iterate(
        &self,
        a: usize,
        b: usize,
        state_a: &[f64],
        x_a: &[f64],
        phi_a: &[f64],
    ) -> Result<(Vec<f64>, bool, Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let n = b - a;
        let mut xs = vec![x_a.to_vec(); n];
        let mut states = vec![state_a.to_vec(); n];
        let mut phis = vec![phi_a.to_vec(); n];
        let mut changes = Vec::new();
        let g_a = self.embed(phi_a);
        for _ in 0..self.p.max_iter {
            for (k, phi) in phis.iter_mut().enumerate() {
                *phi = self.select(a + 1 + k, &xs[k])?;
            }
            let mut acc = state_a.to_vec();
            let mut change: f64 = 0.0;
            let mut g_prev = g_a.clone();
            for k in 0..n {
                let g = self.embed(&phis[k]);
                self.increment(&mut acc, a + k, &g_prev, &g);
                let x = self.readout(a + 1 + k, &acc);
                change = change.max(dist(&x, &xs[k]));
                xs[k] = x;
                states[k].clone_from(&acc);
                g_prev = g;
            }
            if !change.is_finite() {
                return Err(InclusionError::InvalidProblem("iteration produced non-finite values".into()));
            }
            changes.push(change);
            if change <= self.p.tol {
                return Ok((changes, true, states, xs, phis));
            }
        }
        Ok((changes, false, states, xs, phis))
    }
}

struct Solved {
    xs: Vec<Vec<f64>>,
    windows: Vec<Window>,
    converged: bool,
    t0: f64,
}

fn run_windows(s: &Scheme, f_sup: f64) -> Result<Solved> {
    let p = s.p;
    let grid = s.drive.grid().to_vec();
    let w_semi = holder_seminorm(&s.drive, p.young.beta)?.seminorm;
    let t0 = window_schedule(&p.young, p.horizon(), f_sup, p.r, w_semi);
    let last = grid.len() - 1;
    let x0 = p.xi.clone();
    let mut xs = vec![x0.clone()];
    let mut state = vec![0.0; s.rows()];
    let mut phi = s.select(0, &x0)?;
    let mut windows = Vec::new();
    let mut a = 0;
    let mut converged = true;
    while a < last {
        let mut b = a;
        while b < last && grid[b + 1] - grid[a] <= t0 * (1.0 + 1e-12) {
            b += 1;
        }
        if b == a {
            // the grid cannot resolve T0; fall back to single steps and flag it
            b = a + 1;
        }
        let mut halved = false;
        let mut out = s.iterate(a, b, &state, &xs[a], &phi)?;
        if !out.1 && b - a >= 2 {
            b = a + (b - a) / 2;
            halved = true;
            out = s.iterate(a, b, &state, &xs[a], &phi)?;
        }
        let (changes, ok, states, wx, wphi) = out;
        let len = grid[b] - grid[a];
        windows.push(Window {
            start: a,
            end: b,
            t_start: grid[a],
            t_end: grid[b],
            condition: window_condition(&p.young, len, f_sup, p.r, w_semi),
            iterations: changes.len(),
            changes,
            halved,
        });
        xs.extend(wx);
        state = states.last().expect("nonempty window").clone();
        phi = wphi.last().expect("nonempty window").clone();
        a = b;
        if !ok {
            converged = false;
            break;
        }
    }
    Ok(Solved { xs, windows, converged, t0 })
}

struct Membership {
    node_residuals: Vec<f64>,
    integral_radius: Vec<f64>,
    own_certified: bool,
    family_size: usize,
    warnings: Vec<String>,
}

/// Distance of `x − ξ` from the inner hull of the integral of `Φ(·, x(·))`
/// over a certified family that includes the branch's own selection.
fn membership(s: &Scheme, xs: &[Vec<f64>], seed: u64) -> Result<Membership> {
    let p = s.p;
    let n = xs.len();
    let grid = s.drive.grid()[..n].to_vec();
    let (e, d) = p.phi.shape();
    let bodies: Vec<ConvexBody> = grid.iter().zip(xs).map(|(&t, x)| p.phi.eval(t, x)).collect();
    let own: Vec<Vec<f64>> = (0..n).map(|j| s.select(j, &xs[j])).collect::<Result<_>>()?;
    let f = SetValuedPath::with_shape(grid.clone(), bodies, e, d)?;
    let own_path = SampledPath::new(grid.clone(), own)?;
    let mut recipe = FamilyRecipe::spread(&f, p.residual_measures, p.residual_anchors, seed);
    recipe.mc_samples = p.mc_samples;
    recipe.supplied.push(("branch".into(), own_path));
    let family = build_selection_family(&f, p.young.alpha, p.r, &recipe)?;
    let own_certified = family
        .provenance
        .iter()
        .any(|pr| matches!(pr, crate::aumann::Provenance::Supplied { .. }));
    let xi = &p.xi;
    let (node_residuals, integral_radius) = match s.order {
        Order::First => {
            let w = if n == s.drive.len() { s.drive.clone() } else { s.drive.truncate(n)? };
            let j = indefinite_aumann_integral(&f, &w, &p.young, p.r, &family)?;
            let res = (0..n)
                .into_par_iter()
                .map(|i| {
                    let y: Vec<f64> = xs[i].iter().zip(xi).map(|(a, b)| a - b).collect();
                    Ok(distance_to_set(&y, j.path.body(i))?)
                })
                .collect::<Result<Vec<f64>>>()?;
            let rad = j.path.bodies().iter().map(|b| b.norm()).collect();
            (res, rad)
        }
        Order::Second => {
            let w0 = if n == p.w.len() { p.w.clone() } else { p.w.truncate(n)? };
            let reads = family
                .members
                .par_iter()
                .map(|m| second_order_readout(m, &w0, p.young.rule))
                .collect::<Result<Vec<_>>>()?;
            let mut res = Vec::with_capacity(n);
            let mut rad = Vec::with_capacity(n);
            for i in 0..n {
                let hull = hull_of_points(reads.iter().map(|r| vec![r[i]]).collect())?;
                res.push(distance_to_set(&[xs[i][0] - xi[0]], &hull)?);
                rad.push(hull.norm());
            }
            (res, rad)
        }
    };
    let mut warnings = family.warnings.clone();
    if !own_certified {
        warnings.push("the branch's own selection failed the family certificate".into());
    }
    Ok(Membership {
        node_residuals,
        integral_radius,
        own_certified,
        family_size: family.len(),
        warnings,
    })
}

/// `t ↦ w0(t) I1(t) − I2(t)` for a scalar selection `φ`.
fn second_order_readout(phi: &SampledPath, w0: &SampledPath, rule: Rule) -> Result<Vec<f64>> {
    let (i1, i2) = component_integrals(phi, w0, rule)?;
    Ok((0..w0.len()).map(|j| w0.value(j)[0] * i1[j] - i2[j]).collect())
}

/// `I1 = ∫ φ dw0` and `I2 = ∫ φ w0 dw0`.
fn component_integrals(phi: &SampledPath, w0: &SampledPath, rule: Rule) -> Result<(Vec<f64>, Vec<f64>)> {
    let i1 = riemann_path(phi, w0, rule)?.component(0);
    let pw = SampledPath::new(
        phi.grid().to_vec(),
        phi.values().zip(w0.values()).map(|(f, w)| vec![f[0] * w[0]]).collect(),
    )?;
    let i2 = riemann_path(&pw, w0, rule)?.component(0);
    Ok((i1, i2))
}

fn finish(s: &Scheme, solved: Solved, probe: ProbeReport, seed: u64) -> Result<SolutionReport> {
    let m = membership(s, &solved.xs, seed)?;
    let residual = m.node_residuals.iter().copied().fold(0.0, f64::max);
    let n = solved.xs.len();
    let path = SampledPath::new(s.drive.grid()[..n].to_vec(), solved.xs)?;
    let ibp_residual = match s.order {
        Order::First => None,
        Order::Second => Some(ibp_check(s, &path)?),
    };
    let window_condition_met = solved.windows.iter().all(|w| w.condition <= 1.0);
    let mut warnings = m.warnings;
    if !window_condition_met {
        warnings.push(format!(
            "admissible window T0 = {:.3e} is below the grid resolution; single-step windows used",
            solved.t0
        ));
    }
    let report = SolutionReport {
        iterations: solved.windows.iter().map(|w| w.iterations).max().unwrap_or(0),
        path,
        residual,
        node_residuals: m.node_residuals,
        t0: solved.t0,
        window_schedule: solved.windows,
        converged: solved.converged,
        window_condition_met,
        own_selection_certified: m.own_certified,
        family_size: m.family_size,
        integral_radius: m.integral_radius,
        ibp_residual,
        probe,
        warnings,
    };
    if report.converged {
        Ok(report)
    } else {
        Err(InclusionError::NonConvergence { report: Box::new(report) })
    }
}

/// `max_t |∫_0^t I1 dw0 − (w0(t) I1(t) − I2(t))|` for the branch's own
/// selection along a second-order solution; both sides come from separate
/// Riemann sums.
fn ibp_check(s: &Scheme, path: &SampledPath) -> Result<f64> {
    let p = s.p;
    let n = path.len();
    let w0 = if n == p.w.len() { p.w.clone() } else { p.w.truncate(n)? };
    let phi: Vec<Vec<f64>> = (0..n).map(|j| s.select(j, path.value(j))).collect::<Result<_>>()?;
    let phi = SampledPath::new(w0.grid().to_vec(), phi)?;
    let (i1, i2) = component_integrals(&phi, &w0, p.young.rule)?;
    let i1p = SampledPath::new(w0.grid().to_vec(), i1.iter().map(|v| vec![*v]).collect())?;
    let lhs = riemann_path(&i1p, &w0, p.young.rule)?.component(0);
    Ok((0..n)
        .map(|j| (lhs[j] - (w0.value(j)[0] * i1[j] - i2[j])).abs())
        .fold(0.0, f64::max))
}

/// Solves `x(t) ∈ ξ + ∫_0^t Φ(s, x(s)) dw(s)` along the branch `strategy`.
pub fn solve_first_order(p: &InclusionProblem, strategy: &Strategy, seed: u64) -> Result<SolutionReport> {
    let probe = p.check(Order::First, seed)?;
    let (e, d) = p.phi.shape();
    let s = Scheme {
        p,
        order: Order::First,
        drive: p.w.clone(),
        selector: strategy.selector(e * d, p.mc_samples, seed)?,
    };
    let solved = run_windows(&s, p.big_r)?;
    finish(&s, solved, probe, seed)
}

/// Solves `x(t) ∈ ξ + ∫_0^t ∫_0^s Φ(u, x(u)) dw0(u) dw0(s)` through
/// `w = (w0, ∫ w0 dw0)` and `x = ξ + w0·I1 − I2`.
pub fn solve_second_order(p: &InclusionProblem, strategy: &Strategy, seed: u64) -> Result<SolutionReport> {
    let probe = p.check(Order::Second, seed)?;
    let drive = crate::young::iterated_integral(&p.w, &p.young)?;
    let s = Scheme {
        p,
        order: Order::Second,
        drive,
        selector: strategy.selector(1, p.mc_samples, seed)?,
    };
    // Frobenius norm of φ·Id₂
    let solved = run_windows(&s, std::f64::consts::SQRT_2 * p.big_r)?;
    finish(&s, solved, probe, seed)
}

#[derive(Debug, Clone, Serialize)]
pub struct FunnelReport {
    /// Per-strategy reports; `None` where the branch did not converge.
    pub reports: Vec<Option<SolutionReport>>,
    pub failures: Vec<String>,
    /// Hull of the converged solutions' values at each node.
    pub hulls: Vec<ConvexBody>,
    pub widths: Vec<f64>,
}

/// Solves once per strategy and collects per-node hulls of the solutions.
pub fn solution_funnel(p: &InclusionProblem, strategies: &[Strategy], seed: u64) -> Result<FunnelReport> {
    let outcomes: Vec<Result<SolutionReport>> = strategies
        .par_iter()
        .enumerate()
        .map(|(k, st)| solve_first_order(p, st, crate::rng::derive_seed(seed, k as u64)))
        .collect();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (k, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(r) => reports.push(Some(r)),
            Err(InclusionError::NonConvergence { report }) => {
                failures.push(format!("strategy {k}: no convergence (residual {:.3e})", report.residual));
                reports.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let solved: Vec<&SolutionReport> = reports.iter().flatten().collect();
    if solved.is_empty() {
        return Err(InclusionError::InvalidProblem("no strategy converged".into()));
    }
    let n = p.w.len();
    let hulls = (0..n)
        .map(|i| hull_of_points(solved.iter().map(|r| r.path.value(i).to_vec()).collect()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let widths = hulls.iter().map(ConvexBody::diameter).collect();
    Ok(FunnelReport {
        reports,
        failures,
        hulls,
        widths,
    })
}
