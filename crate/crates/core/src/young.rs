//! Young integration against Hölder signals.
//!
//! `∫ f dw` for an `α`-Hölder matrix path `f` and a `β`-Hölder signal `w`
//! with `α + β > 1` is the limit of Riemann sums over any dissection. The
//! constant of the Young–Loève estimate is not fixed by the theory; we use
//! the sewing-lemma value `c = (1 − 2^{1−(α+β)})^{-1}` and every report
//! says so.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::norm;
use crate::paths::{holder_seminorm, PathError, SampledPath};

#[derive(Debug, Error)]
pub enum YoungError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("grid error: {0}")]
    GridError(String),
    #[error(transparent)]
    Path(#[from] PathError),
}

pub type Result<T> = std::result::Result<T, YoungError>;

/// Riemann-sum tag. Left-point sums are the textbook construction; the
/// trapezoid rule has the same limit and removes the quadratic-variation
/// bias `½Σ(Δw)²` that left-point sums carry at finite mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    LeftPoint,
    #[default]
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YoungConfig {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "default_levels")]
    pub richardson_levels: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub rule: Rule,
}

fn default_levels() -> usize {
    3
}

fn default_tol() -> f64 {
    1e-6
}

impl YoungConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let cfg = YoungConfig {
            alpha,
            beta,
            richardson_levels: default_levels(),
            tol: default_tol(),
            rule: Rule::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.richardson_levels = levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(YoungError::InvalidConfig(format!("{name} = {v} not in (0, 1]")));
            }
        }
        if self.alpha + self.beta <= 1.0 {
            return Err(YoungError::InvalidConfig(format!(
                "alpha + beta = {} must exceed 1",
                self.alpha + self.beta
            )));
        }
        if self.richardson_levels < 2 {
            return Err(YoungError::InvalidConfig("richardson_levels must be at least 2".into()));
        }
        if !(self.tol > 0.0) {
            return Err(YoungError::InvalidConfig("tol must be positive".into()));
        }
        Ok(())
    }

    /// `c_{α,β} = (1 − 2^{1−(α+β)})^{-1}`.
    pub fn sewing_constant(&self) -> f64 {
        1.0 / (1.0 - 2f64.powf(1.0 - (self.alpha + self.beta)))
    }

    /// `C_{α,β,T} = c_{α,β}·(T^α ∨ 1)`.
    pub fn young_constant(&self, horizon: f64) -> f64 {
        self.sewing_constant() * horizon.powf(self.alpha).max(1.0)
    }
}

/// Final value of one dyadic coarsening.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelValue {
    pub steps: usize,
    pub mesh: f64,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct YoungIntegral {
    /// `t ↦ ∫_0^t f dw` on the common grid.
    #[serde(skip)]
    pub path: SampledPath,
    /// Finest level first, then successive halvings of the node count.
    pub levels: Vec<LevelValue>,
    /// `log2(e_k / e_{k+1})` from successive level differences, `None`
    /// where the differences vanish.
    pub orders: Vec<Option<f64>>,
    /// Rate promised by the sewing bound, `α + β − 1`.
    pub expected_order: f64,
}

impl YoungIntegral {
    pub fn value(&self) -> &[f64] {
        self.path.last()
    }
}

/// Brings `f` and `w` onto one grid, merging node sets when they differ.
pub fn common_grid(f: &SampledPath, w: &SampledPath) -> Result<(SampledPath, SampledPath)> {
    if f.grid() == w.grid() {
        return Ok((f.clone(), w.clone()));
    }
    let (tf, tw) = (f.horizon(), w.horizon());
    if (tf - tw).abs() > 1e-12 * tf.max(1.0) {
        return Err(YoungError::GridError(format!(
            "integrand lives on [0, {tf}] but the signal on [0, {tw}]"
        )));
    }
    let mut merged: Vec<f64> = f.grid().iter().chain(w.grid()).cloned().collect();
    merged.sort_by(f64::total_cmp);
    let tol = 1e-12 * tf.max(1.0);
    merged.dedup_by(|a, b| (*a - *b).abs() <= tol);
    *merged.last_mut().expect("nonempty") = tf;
    Ok((f.resample(&merged)?, w.resample(&merged)?))
}

fn check_dims(f: &SampledPath, w: &SampledPath) -> Result<()> {
    let (_, cols) = f.shape();
    if cols != w.dim() {
        return Err(YoungError::DimMismatch(format!(
            "integrand has {cols} columns but the signal has dimension {}",
            w.dim()
        )));
    }
    Ok(())
}

/// `out += a · M · v` for a row-major `rows × v.len()` matrix `m`.
fn mat_vec_axpy(out: &mut [f64], a: f64, m: &[f64], v: &[f64]) {
    let cols = v.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &m[i * cols..(i + 1) * cols];
        *o += a * row.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
    }
}

/// Riemann sums of `f dw` on a shared grid, node by node.
fn indefinite(f: &SampledPath, w: &SampledPath, rule: Rule) -> Vec<Vec<f64>> {
    let rows = f.shape().0;
    let d = w.dim();
    let mut acc = vec![0.0; rows];
    let mut out = Vec::with_capacity(f.len());
    out.push(acc.clone());
    let mut dw = vec![0.0; d];
    for k in 0..f.len() - 1 {
        for (j, x) in dw.iter_mut().enumerate() {
            *x = w.value(k + 1)[j] - w.value(k)[j];
        }
        match rule {
            Rule::LeftPoint => mat_vec_axpy(&mut acc, 1.0, f.value(k), &dw),
            Rule::Trapezoid => {
                mat_vec_axpy(&mut acc, 0.5, f.value(k), &dw);
                mat_vec_axpy(&mut acc, 0.5, f.value(k + 1), &dw);
            }
        }
        out.push(acc.clone());
    }
    out
}

fn final_value(f: &SampledPath, w: &SampledPath, rule: Rule) -> Vec<f64> {
    indefinite(f, w, rule).pop().expect("nonempty")
}

/// `t ↦ ∫_0^t f dw` by Riemann sums on the common grid, without the
/// convergence diagnostics of [`young_integral`].
pub fn riemann_path(f: &SampledPath, w: &SampledPath, rule: Rule) -> Result<SampledPath> {
    check_dims(f, w)?;
    let (f, w) = common_grid(f, w)?;
    Ok(SampledPath::new(f.grid().to_vec(), indefinite(&f, &w, rule))?)
}

/// Indefinite Young integral `t ↦ ∫_0^t f dw` together with its values on
/// dyadic coarsenings and the empirical convergence orders.
pub fn young_integral(f: &SampledPath, w: &SampledPath, cfg: &YoungConfig) -> Result<YoungIntegral> {
    cfg.validate()?;
    check_dims(f, w)?;
    let (f, w) = common_grid(f, w)?;
    let path = SampledPath::new(f.grid().to_vec(), indefinite(&f, &w, cfg.rule))?;
    let mut levels = vec![LevelValue {
        steps: f.steps(),
        mesh: f.mesh(),
        value: path.last().to_vec(),
    }];
    let mut step = 1;
    for _ in 0..cfg.richardson_levels {
        step *= 2;
        if f.steps() % step != 0 {
            break;
        }
        let (fc, wc) = (f.subsample(step)?, w.subsample(step)?);
        levels.push(LevelValue {
            steps: fc.steps(),
            mesh: fc.mesh(),
            value: final_value(&fc, &wc, cfg.rule),
        });
    }
    let scale = levels[0].value.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    // errors of coarse levels measured against the next finer one
    let diffs: Vec<f64> = levels
        .windows(2)
        .map(|p| {
            let d: Vec<f64> = p[0].value.iter().zip(&p[1].value).map(|(a, b)| a - b).collect();
            norm(&d)
        })
        .collect();
    let orders = diffs
        .windows(2)
        .map(|e| {
            if e[0] <= 1e-14 * scale || e[1] <= 1e-14 * scale {
                None
            } else {
                Some((e[1] / e[0]).log2())
            }
        })
        .collect();
    Ok(YoungIntegral {
        path,
        levels,
        orders,
        expected_order: cfg.alpha + cfg.beta - 1.0,
    })
}

/// One `[s, t]` check of the local Young–Loève bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalCheck {
    pub s: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct YoungLoveReport {
    pub sewing_constant: f64,
    pub young_constant: f64,
    pub f_seminorm: f64,
    pub f_total: f64,
    pub w_seminorm: f64,
    /// Largest `lhs / rhs` over the sampled intervals (0 when all rhs vanish
    /// together with their lhs).
    pub worst_local_ratio: f64,
    pub local_satisfied: bool,
    /// Grid `β`-seminorm of the indefinite integral.
    pub global_lhs: f64,
    /// `C_{α,β,T}·‖w‖_β·N_α(f)`.
    pub global_rhs: f64,
    pub global_satisfied: bool,
    pub satisfied: bool,
    pub per_interval: Vec<IntervalCheck>,
    pub constant_note: &'static str,
}

const SUBGRID_NODES: usize = 65;
const SLACK: f64 = 1e-12;

/// Checks the local estimate
/// `‖∫_s^t f dw − f(s)(w(t) − w(s))‖ ≤ c‖w‖_β‖f‖_α(t − s)^{α+β}`
/// on all pairs of a sub-grid of at most 65 nodes, and the global estimate
/// `‖∫_0^· f dw‖_β ≤ C_{α,β,T}‖w‖_β N_α(f)` on the full grid.
pub fn verify_young_love(f: &SampledPath, w: &SampledPath, cfg: &YoungConfig) -> Result<YoungLoveReport> {
    cfg.validate()?;
    check_dims(f, w)?;
    let (f, w) = common_grid(f, w)?;
    let integral = SampledPath::new(f.grid().to_vec(), indefinite(&f, &w, cfg.rule))?;
    let fa = holder_seminorm(&f, cfg.alpha)?;
    let wb = holder_seminorm(&w, cfg.beta)?;
    let c = cfg.sewing_constant();
    let big_c = cfg.young_constant(f.horizon());
    let n = f.len();
    let k = SUBGRID_NODES.min(n);
    let mut idx: Vec<usize> = (0..k).map(|i| i * (n - 1) / (k - 1)).collect();
    idx.dedup();
    let rows = f.shape().0;
    let per_interval: Vec<IntervalCheck> = (0..idx.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let (integral, f, w, idx) = (&integral, &f, &w, &idx);
            (a + 1..idx.len()).map(move |b| {
                let (i, j) = (idx[a], idx[b]);
                let (s, t) = (f.grid()[i], f.grid()[j]);
                let dw: Vec<f64> = w.value(j).iter().zip(w.value(i)).map(|(x, y)| x - y).collect();
                let mut defect: Vec<f64> = integral
                    .value(j)
                    .iter()
                    .zip(integral.value(i))
                    .map(|(x, y)| x - y)
                    .collect();
                let mut one_step = vec![0.0; rows];
                mat_vec_axpy(&mut one_step, 1.0, f.value(i), &dw);
                for (d, o) in defect.iter_mut().zip(&one_step) {
                    *d -= o;
                }
                IntervalCheck {
                    s,
                    t,
                    lhs: norm(&defect),
                    rhs: c * wb.seminorm * fa.seminorm * (t - s).powf(cfg.alpha + cfg.beta),
                }
            })
        })
        .collect();
    let scale = integral.sup_norm().max(1.0);
    let mut worst: f64 = 0.0;
    let mut local_ok = true;
    for chk in &per_interval {
        if chk.lhs > chk.rhs + SLACK * scale {
            local_ok = false;
        }
        if chk.rhs > 0.0 {
            worst = worst.max(chk.lhs / chk.rhs);
        } else if chk.lhs > SLACK * scale {
            worst = f64::INFINITY;
        }
    }
    let global_lhs = holder_seminorm(&integral, cfg.beta)?.seminorm;
    let global_rhs = big_c * wb.seminorm * fa.total;
    let global_ok = global_lhs <= global_rhs + SLACK * scale;
    Ok(YoungLoveReport {
        sewing_constant: c,
        young_constant: big_c,
        f_seminorm: fa.seminorm,
        f_total: fa.total,
        w_seminorm: wb.seminorm,
        worst_local_ratio: worst,
        local_satisfied: local_ok,
        global_lhs,
        global_rhs,
        global_satisfied: global_ok,
        satisfied: local_ok && global_ok,
        per_interval,
        constant_note: "sewing constant (1 - 2^(1-(alpha+beta)))^-1 is our choice; the estimate only asserts some constant >= 1",
    })
}

/// `t ↦ (w0(t), ∫_0^t w0 dw0)` for a scalar path.
pub fn iterated_integral(w0: &SampledPath, cfg: &YoungConfig) -> Result<SampledPath> {
    if w0.dim() != 1 {
        return Err(YoungError::DimMismatch(format!(
            "iterated integral needs a scalar path, got dimension {}",
            w0.dim()
        )));
    }
    let i = indefinite(w0, w0, cfg.rule);
    let values = w0.values().zip(i).map(|(a, b)| vec![a[0], b[0]]).collect();
    Ok(SampledPath::new(w0.grid().to_vec(), values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::sample_fbm;

    fn cfg() -> YoungConfig {
        YoungConfig::new(0.6, 0.6).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(YoungConfig::new(0.5, 0.5).is_err());
        assert!(YoungConfig::new(0.0, 1.0).is_err());
        assert!(YoungConfig::new(0.6, 1.2).is_err());
        let c = YoungConfig::new(0.75, 0.75).unwrap();
        assert!((c.sewing_constant() - 1.0 / (1.0 - 2f64.powf(-0.5))).abs() < 1e-15);
        assert!(c.sewing_constant() >= 1.0);
        assert_eq!(c.young_constant(0.5), c.sewing_constant());
    }

    #[test]
    fn polynomial_case() {
        let m = 1 << 14;
        let f = SampledPath::from_fn(1.0, m, |t| vec![t]).unwrap();
        let w = SampledPath::from_fn(1.0, m, |t| vec![t * t]).unwrap();
        for rule in [Rule::LeftPoint, Rule::Trapezoid] {
            let y = young_integral(&f, &w, &cfg().with_rule(rule)).unwrap();
            assert!((y.value()[0] - 2.0 / 3.0).abs() < 1e-4, "{rule:?}");
            assert_eq!(y.levels.len(), 4);
        }
    }

    #[test]
    fn identity_telescopes() {
        let w = sample_fbm(0.7, 1.0, 256, 3, 4).unwrap();
        let f = SampledPath::from_fn_matrix(1.0, 256, 3, 3, |_| {
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]
        })
        .unwrap();
        let y = young_integral(&f, &w, &cfg()).unwrap();
        for j in 0..3 {
            assert!((y.value()[j] - w.last()[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn dimension_and_grid_errors() {
        let w = SampledPath::from_fn(1.0, 8, |t| vec![t, t]).unwrap();
        let f = SampledPath::from_fn(1.0, 8, |t| vec![t]).unwrap();
        assert!(matches!(young_integral(&f, &w, &cfg()), Err(YoungError::DimMismatch(_))));
        let w2 = SampledPath::from_fn(2.0, 8, |t| vec![t]).unwrap();
        assert!(matches!(young_integral(&f, &w2, &cfg()), Err(YoungError::GridError(_))));
    }

    #[test]
    fn merges_grids() {
        let f = SampledPath::from_fn(1.0, 6, |t| vec![t]).unwrap();
        let w = SampledPath::from_fn(1.0, 4, |t| vec![t]).unwrap();
        let y = young_integral(&f, &w, &cfg()).unwrap();
        assert_eq!(y.path.len(), 9);
        assert!((y.value()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn iterated_of_identity() {
        let w = SampledPath::from_fn(1.0, 1 << 14, |t| vec![t]).unwrap();
        let it = iterated_integral(&w, &cfg()).unwrap();
        for (t, v) in it.grid().iter().zip(it.values()) {
            assert!((v[1] - t * t / 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_integrand_has_no_local_defect() {
        let w = sample_fbm(0.8, 1.0, 512, 1, 1).unwrap();
        let f = SampledPath::constant(1.0, 512, vec![2.5]).unwrap();
        let rep = verify_young_love(&f, &w, &cfg()).unwrap();
        assert!(rep.satisfied);
        assert!(rep.per_interval.iter().all(|c| c.lhs < 1e-12));
    }
}
