//! Probability measures on the unit ball with a C¹ density.
//!
//! Two families: the uniform measure and truncated polynomial bumps
//! `θ(x) ∝ (1 − ‖x − c‖²/ρ²)₊²` with `ρ = 1/concentration`. A bump must sit
//! inside the closed unit ball (`‖c‖ + ρ ≤ 1`), which keeps the density C¹ on
//! the ball and its normalising constant in closed form.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{GeometryError, Result};
use crate::linalg::{dot, norm};
use crate::quadrature::{gauss_legendre, integrate};

/// Element of the class of smooth probability measures on the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub enum SmoothBallMeasure {
    Uniform,
    PolynomialBump { center: Vec<f64>, concentration: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum MeasureRepr {
    Uniform,
    Bump { center: Vec<f64>, concentration: f64 },
}

impl TryFrom<MeasureRepr> for SmoothBallMeasure {
    type Error = GeometryError;

    fn try_from(r: MeasureRepr) -> Result<Self> {
        match r {
            MeasureRepr::Uniform => Ok(SmoothBallMeasure::Uniform),
            MeasureRepr::Bump {
                center,
                concentration,
            } => SmoothBallMeasure::bump(center, concentration),
        }
    }
}

impl From<SmoothBallMeasure> for MeasureRepr {
    fn from(m: SmoothBallMeasure) -> Self {
        match m {
            SmoothBallMeasure::Uniform => MeasureRepr::Uniform,
            SmoothBallMeasure::PolynomialBump {
                center,
                concentration,
            } => MeasureRepr::Bump {
                center,
                concentration,
            },
        }
    }
}

/// Volume of the unit ball in `R^d`.
pub(crate) fn unit_ball_volume(d: usize) -> f64 {
    let mut v = [1.0, 2.0];
    if d < 2 {
        return v[d];
    }
    let mut vd = 0.0;
    for k in 2..=d {
        vd = v[k % 2] * 2.0 * std::f64::consts::PI / k as f64;
        v[k % 2] = vd;
    }
    vd
}

/// `∫_{R^d} (1 − ‖y‖²/ρ²)₊² dy` in closed form.
fn bump_mass(d: usize, rho: f64) -> f64 {
    let d_f = d as f64;
    rho.powi(d as i32) * unit_ball_volume(d) * 8.0 / ((d_f + 2.0) * (d_f + 4.0))
}

impl SmoothBallMeasure {
    pub fn bump(center: Vec<f64>, concentration: f64) -> Result<Self> {
        if center.is_empty() || !center.iter().all(|x| x.is_finite()) {
            return Err(GeometryError::InvalidMeasure("bump center must be finite".into()));
        }
        if !(concentration.is_finite() && concentration > 0.0) {
            return Err(GeometryError::InvalidMeasure(format!(
                "concentration must be positive, got {concentration}"
            )));
        }
        let rho = 1.0 / concentration;
        if norm(&center) + rho > 1.0 + 1e-12 {
            return Err(GeometryError::InvalidMeasure(format!(
                "bump of radius {rho} around a point of norm {} leaves the unit ball",
                norm(&center)
            )));
        }
        let d = center.len();
        // radial quadrature of the profile against the closed form
        let (x, w) = gauss_legendre(24);
        let radial = integrate(
            |r| (1.0 - r * r).powi(2) * r.powi(d as i32 - 1),
            0.0,
            1.0,
            &x,
            &w,
        );
        let numeric = d as f64 * unit_ball_volume(d) * rho.powi(d as i32) * radial;
        let exact = bump_mass(d, rho);
        if ((numeric - exact) / exact).abs() > 1e-6 {
            return Err(GeometryError::NumericalFailure(format!(
                "bump normalisation mismatch: quadrature {numeric}, closed form {exact}"
            )));
        }
        Ok(SmoothBallMeasure::PolynomialBump {
            center,
            concentration,
        })
    }

    /// Ambient dimension the measure is tied to (`None` for the uniform law).
    pub fn dim(&self) -> Option<usize> {
        match self {
            SmoothBallMeasure::Uniform => None,
            SmoothBallMeasure::PolynomialBump { center, .. } => Some(center.len()),
        }
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        match self.dim() {
            Some(k) if k != d => Err(GeometryError::DimMismatch {
                expected: d,
                found: k,
            }),
            _ => Ok(()),
        }
    }

    /// Density at `x` with respect to Lebesgue measure in `R^d`.
    pub fn density(&self, x: &[f64]) -> f64 {
        let d = x.len();
        if norm(x) > 1.0 {
            return 0.0;
        }
        match self {
            SmoothBallMeasure::Uniform => 1.0 / unit_ball_volume(d),
            SmoothBallMeasure::PolynomialBump {
                center,
                concentration,
            } => {
                let rho = 1.0 / concentration;
                let u: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / (rho * rho);
                if u >= 1.0 {
                    0.0
                } else {
                    (1.0 - u).powi(2) / bump_mass(d, rho)
                }
            }
        }
    }

    /// Draws from the measure in `R^d`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, d: usize) -> Vec<f64> {
        match self {
            SmoothBallMeasure::Uniform => uniform_ball(rng, d),
            SmoothBallMeasure::PolynomialBump {
                center,
                concentration,
            } => {
                let rho = 1.0 / concentration;
                loop {
                    let y = uniform_ball(rng, d);
                    let accept = (1.0 - dot(&y, &y)).powi(2);
                    if rng.random::<f64>() < accept {
                        return y.iter().zip(center).map(|(a, c)| c + rho * a).collect();
                    }
                }
            }
        }
    }

    /// `μ{x > 0}` for a measure on `[-1, 1]`.
    pub fn positive_mass_1d(&self) -> f64 {
        match self {
            SmoothBallMeasure::Uniform => 0.5,
            SmoothBallMeasure::PolynomialBump {
                center,
                concentration,
            } => {
                let rho = 1.0 / concentration;
                let prim = |u: f64| u - 2.0 * u.powi(3) / 3.0 + u.powi(5) / 5.0;
                let a = (-center[0] / rho).clamp(-1.0, 1.0);
                (prim(1.0) - prim(a)) / (16.0 / 15.0)
            }
        }
    }

    /// Angular law of `x/‖x‖` for a measure on the planar unit disc.
    pub fn angular_profile(&self) -> AngularProfile {
        match self {
            SmoothBallMeasure::Uniform => AngularProfile::Uniform,
            SmoothBallMeasure::PolynomialBump {
                center,
                concentration,
            } => AngularProfile::tabulate(center, 1.0 / concentration),
        }
    }
}

pub(crate) fn uniform_ball<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    let dir = uniform_sphere(rng, d);
    let r = rng.random::<f64>().powf(1.0 / d as f64);
    dir.into_iter().map(|x| x * r).collect()
}

pub(crate) fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&g);
        if n > 1e-12 {
            return g.into_iter().map(|x| x / n).collect();
        }
    }
}

const ANGULAR_BINS: usize = 4096;
const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Cumulative distribution of the direction angle of a planar measure.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularProfile {
    Uniform,
    /// `cdf[k]` is the mass of angles in `[0, 2πk/K)`; `cdf[K] = 1`.
    Tabulated { cdf: Vec<f64> },
}

impl AngularProfile {
    fn tabulate(center: &[f64], rho: f64) -> AngularProfile {
        let (c0, c1) = (center[0], center[1]);
        let cc = c0 * c0 + c1 * c1;
        let z = bump_mass(2, rho);
        let (gx, gw) = gauss_legendre(3);
        // radial integral of the density along the ray at angle phi
        let ray = |phi: f64| -> f64 {
            let b = phi.cos() * c0 + phi.sin() * c1;
            let disc = b * b - cc + rho * rho;
            if disc <= 0.0 {
                return 0.0;
            }
            let s = disc.sqrt();
            let (r1, r2) = ((b - s).max(0.0), (b + s).min(1.0));
            if r2 <= r1 {
                return 0.0;
            }
            // degree-5 polynomial in r: three Gauss points are exact
            integrate(
                |r| {
                    let u = (r * r - 2.0 * r * b + cc) / (rho * rho);
                    (1.0 - u).max(0.0).powi(2) * r
                },
                r1,
                r2,
                &gx,
                &gw,
            ) / z
        };
        let (ax, aw) = gauss_legendre(4);
        let h = TAU / ANGULAR_BINS as f64;
        let mut cdf = Vec::with_capacity(ANGULAR_BINS + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for k in 0..ANGULAR_BINS {
            acc += integrate(ray, k as f64 * h, (k + 1) as f64 * h, &ax, &aw);
            cdf.push(acc);
        }
        AngularProfile::Tabulated { cdf }
    }

    /// Total mass seen by the tabulation (1 up to quadrature error).
    pub fn total_mass(&self) -> f64 {
        match self {
            AngularProfile::Uniform => 1.0,
            AngularProfile::Tabulated { cdf } => cdf[ANGULAR_BINS],
        }
    }

    fn cdf_at(&self, phi: f64) -> f64 {
        let phi = phi.rem_euclid(TAU);
        match self {
            AngularProfile::Uniform => phi / TAU,
            AngularProfile::Tabulated { cdf } => {
                let pos = phi / TAU * ANGULAR_BINS as f64;
                let k = (pos.floor() as usize).min(ANGULAR_BINS - 1);
                let frac = pos - k as f64;
                (cdf[k] + frac * (cdf[k + 1] - cdf[k])) / cdf[ANGULAR_BINS]
            }
        }
    }

    /// Mass of the counter-clockwise arc of length `len` starting at `start`.
    pub fn arc_mass(&self, start: f64, len: f64) -> f64 {
        let unwrapped = |x: f64| (x / TAU).floor() + self.cdf_at(x);
        let s = start.rem_euclid(TAU);
        unwrapped(s + len) - unwrapped(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn ball_volumes() {
        let pi = std::f64::consts::PI;
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - pi).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * pi / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - pi * pi / 2.0).abs() < 1e-14);
    }

    #[test]
    fn bump_validation() {
        assert!(SmoothBallMeasure::bump(vec![0.5, 0.0], 2.0).is_ok());
        assert!(SmoothBallMeasure::bump(vec![0.9, 0.0], 2.0).is_err());
        assert!(SmoothBallMeasure::bump(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn angular_profile_has_unit_mass() {
        for (c, k) in [([0.6, 0.2], 4.0), ([0.0, 0.0], 1.0), ([0.1, -0.05], 2.0)] {
            let m = SmoothBallMeasure::bump(c.to_vec(), k).unwrap();
            let p = m.angular_profile();
            assert!((p.total_mass() - 1.0).abs() < 1e-6, "{c:?}");
            assert!((p.arc_mass(0.0, TAU) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn density_integrates_to_one_in_the_plane() {
        let m = SmoothBallMeasure::bump(vec![0.3, -0.4], 3.0).unwrap();
        let n = 800;
        let h = 2.0 / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = [-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h];
                total += m.density(&x) * h * h;
            }
        }
        assert!((total - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bump_samples_stay_in_support() {
        let m = SmoothBallMeasure::bump(vec![0.5, 0.5, 0.0], 4.0).unwrap();
        let mut r = rng::stream(3, 0);
        for _ in 0..1000 {
            let x = m.sample(&mut r, 3);
            let d: f64 = x.iter().zip([0.5, 0.5, 0.0]).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(d.sqrt() <= 0.25 + 1e-12);
        }
    }

    #[test]
    fn positive_mass_1d() {
        assert_eq!(SmoothBallMeasure::Uniform.positive_mass_1d(), 0.5);
        let right = SmoothBallMeasure::bump(vec![0.6], 2.5).unwrap();
        assert!((right.positive_mass_1d() - 1.0).abs() < 1e-12);
        let mid = SmoothBallMeasure::bump(vec![0.0], 1.0).unwrap();
        assert!((mid.positive_mass_1d() - 0.5).abs() < 1e-12);
    }
}
