//! Registry of coefficient multifunctions `Φ(t, x)`.

use serde::{Deserialize, Serialize};

use super::{InclusionError, Result};
use crate::convex_bodies::{hausdorff_distance, ConvexBody};
use crate::linalg::{dist, norm};
use crate::rng;

/// Built-in coefficients. Values are `e × d` matrices stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficient {
    /// `Φ(t, x) = C`.
    Constant { body: ConvexBody, shape: [usize; 2] },
    /// `Φ(t, x) = C + (a sin t + b tanh x_0)·u`.
    Translate {
        body: ConvexBody,
        shape: [usize; 2],
        direction: Vec<f64>,
        time_amplitude: f64,
        state_gain: f64,
    },
    /// `Φ(t, x) = c + ρ(t, x)·B` with `B` a polytope inscribed in the unit
    /// ball and `ρ = ρ_0 + a(1 − cos t)/2 + b(1 + tanh x_0)/2`.
    RadiusField {
        center: Vec<f64>,
        shape: [usize; 2],
        radius: f64,
        time_amplitude: f64,
        state_gain: f64,
    },
    /// `Φ(t, x) = [0, L(sin ωt, cos ωt)]` in `M_{1,2}`.
    RotatingSegment { length: f64, rate: f64 },
}

impl Coefficient {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Coefficient::Constant { shape, .. }
            | Coefficient::Translate { shape, .. }
            | Coefficient::RadiusField { shape, .. } => (shape[0], shape[1]),
            Coefficient::RotatingSegment { .. } => (1, 2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (e, d) = self.shape();
        let n = e * d;
        let bad = |m: String| Err(InclusionError::InvalidProblem(m));
        if n == 0 {
            return bad("coefficient shape must be positive".into());
        }
        match self {
            Coefficient::Constant { body, .. } if body.dim() != n => {
                bad(format!("body of dimension {} for shape {e}×{d}", body.dim()))
            }
            Coefficient::Translate { body, direction, .. } if body.dim() != n || direction.len() != n => {
                bad(format!("translate needs body and direction of dimension {n}"))
            }
            Coefficient::RadiusField { center, radius, .. } if center.len() != n || *radius < 0.0 => {
                bad(format!("radius field needs a center of dimension {n} and a radius ≥ 0"))
            }
            _ => Ok(()),
        }
    }

    /// `Φ(t, x)`.
    pub fn eval(&self, t: f64, x: &[f64]) -> ConvexBody {
        let x0 = x.first().copied().unwrap_or(0.0);
        match self {
            Coefficient::Constant { body, .. } => body.clone(),
            Coefficient::Translate {
                body,
                direction,
                time_amplitude,
                state_gain,
                ..
            } => {
                let s = time_amplitude * t.sin() + state_gain * x0.tanh();
                let shift: Vec<f64> = direction.iter().map(|u| s * u).collect();
                body.affine_image(&shift, 1.0).expect("matching dimensions")
            }
            Coefficient::RadiusField {
                center,
                radius,
                time_amplitude,
                state_gain,
                ..
            } => {
                let rho = radius + time_amplitude * (1.0 - t.cos()) / 2.0 + state_gain * (1.0 + x0.tanh()) / 2.0;
                ConvexBody::ball_polytope(center.len(), 1.0)
                    .and_then(|b| b.affine_image(center, rho))
                    .expect("finite radius")
            }
            Coefficient::RotatingSegment { length, rate } => ConvexBody::segment(
                vec![0.0, 0.0],
                vec![length * (rate * t).sin(), length * (rate * t).cos()],
            )
            .expect("finite segment"),
        }
    }
}

/// Outcome of checking the declared constants on sampled `(t, x)` pairs.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub probes: usize,
    /// Largest `d_H(Φ(s,x), Φ(t,x)) / |t − s|^α`.
    pub k1_measured: f64,
    /// Largest `d_H(Φ(t,x), Φ(t,y)) / ‖x − y‖^γ`.
    pub k2_measured: f64,
    pub r_measured: f64,
    pub satisfied: bool,
}

const PROBE_SLACK: f64 = 1e-9;

/// Samples `probes` triples `(s, t, x, y)` with `s, t ∈ [0, T]` and `x, y`
/// in the ball of radius `spread` around `center`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn probe(
    phi: &Coefficient,
    k1: f64,
    k2: f64,
    big_r: f64,
    alpha: f64,
    gamma: f64,
    horizon: f64,
    center: &[f64],
    spread: f64,
    probes: usize,
    seed: u64,
) -> ProbeReport {
    use rand::Rng;
    let mut r = rng::stream(seed, 0x9B0B);
    let e = center.len();
    let mut k1m: f64 = 0.0;
    let mut k2m: f64 = 0.0;
    let mut rm: f64 = 0.0;
    for _ in 0..probes {
        let s = horizon * r.random::<f64>();
        let t = horizon * r.random::<f64>();
        let x: Vec<f64> = center.iter().map(|c| c + spread * (2.0 * r.random::<f64>() - 1.0)).collect();
        let y: Vec<f64> = center.iter().map(|c| c + spread * (2.0 * r.random::<f64>() - 1.0)).collect();
        let a = phi.eval(s, &x);
        let b = phi.eval(t, &x);
        let c = phi.eval(t, &y);
        if s != t {
            k1m = k1m.max(hausdorff_distance(&a, &b).expect("same dim") / (t - s).abs().powf(alpha));
        }
        let dxy = dist(&x, &y);
        if dxy > 0.0 && e > 0 {
            k2m = k2m.max(hausdorff_distance(&b, &c).expect("same dim") / dxy.powf(gamma));
        }
        rm = rm.max(a.norm()).max(b.norm()).max(c.norm());
    }
    let ok = |m: f64, d: f64| m <= d * (1.0 + PROBE_SLACK) + PROBE_SLACK;
    ProbeReport {
        probes,
        k1_measured: k1m,
        k2_measured: k2m,
        r_measured: rm,
        satisfied: ok(k1m, k1) && ok(k2m, k2) && ok(rm, big_r),
    }
}

/// Smallest declared constants that the built-in formulas guarantee on
/// `[0, T]` (useful defaults for configs).
pub fn natural_constants(phi: &Coefficient, alpha: f64, horizon: f64) -> (f64, f64, f64) {
    let tpow = horizon.powf(1.0 - alpha);
    match phi {
        Coefficient::Constant { body, .. } => (0.0, 0.0, body.norm()),
        Coefficient::Translate {
            body,
            direction,
            time_amplitude,
            state_gain,
            ..
        } => {
            let u = norm(direction);
            (
                time_amplitude.abs() * u * tpow,
                state_gain.abs() * u,
                body.norm() + (time_amplitude.abs() + state_gain.abs()) * u,
            )
        }
        Coefficient::RadiusField {
            center,
            radius,
            time_amplitude,
            state_gain,
            ..
        } => (
            time_amplitude.abs() / 2.0 * tpow,
            state_gain.abs() / 2.0,
            norm(center) + radius + time_amplitude.abs() + state_gain.abs(),
        ),
        Coefficient::RotatingSegment { length, rate } => (length * rate.abs() * tpow, 0.0, *length),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_constants_pass_probes() {
        let phis = [
            Coefficient::RadiusField {
                center: vec![0.1, 0.0],
                shape: [1, 2],
                radius: 0.2,
                time_amplitude: 0.3,
                state_gain: 0.4,
            },
            Coefficient::Translate {
                body: ConvexBody::interval(-0.1, 0.1).unwrap(),
                shape: [1, 1],
                direction: vec![1.0],
                time_amplitude: 0.2,
                state_gain: 0.3,
            },
            Coefficient::RotatingSegment { length: 0.5, rate: 2.0 },
        ];
        for phi in &phis {
            let (k1, k2, r) = natural_constants(phi, 0.6, 1.0);
            let rep = probe(phi, k1, k2, r, 0.6, 1.0, 1.0, &[0.0], 2.0, 500, 1);
            assert!(rep.satisfied, "{phi:?}: {rep:?}");
            let rep = probe(phi, 0.5 * k1, 0.5 * k2, r, 0.6, 1.0, 1.0, &[0.0], 2.0, 500, 1);
            assert!(!rep.satisfied || (k1 == 0.0 && k2 == 0.0));
        }
    }

    #[test]
    fn serde_registry() {
        let s = r#"{"kind":"rotating_segment","length":1.0,"rate":1.0}"#;
        let c: Coefficient = serde_json::from_str(s).unwrap();
        assert_eq!(c.shape(), (1, 2));
        let s = r#"{"kind":"constant","body":{"dim":1,"vertices":[[0.5]]},"shape":[1,1]}"#;
        let c: Coefficient = serde_json::from_str(s).unwrap();
        c.validate().unwrap();
    }
}
