//! Fractional Brownian motion on uniform grids.
//!
//! Increments (fractional Gaussian noise) have Toeplitz covariance, which is
//! factorised exactly by Cholesky on small grids and diagonalised by a
//! circulant embedding on large ones.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};

use super::{uniform_grid, PathError, Result, SampledPath};
use crate::rng;

/// Grids with more steps than this use circulant embedding.
pub const CHOLESKY_MAX_STEPS: usize = 1024;
const JITTER: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum FbmMethod {
    /// Lower Cholesky factor of the increment covariance.
    Cholesky(DMatrix<f64>),
    /// Square roots of the circulant eigenvalues divided by the embedding size.
    Circulant(Vec<f64>),
}

/// Reusable sampler for one `(H, T, m)`.
#[derive(Debug, Clone)]
pub struct FbmGenerator {
    hurst: f64,
    horizon: f64,
    steps: usize,
    method: FbmMethod,
}

/// Autocovariance of fractional Gaussian noise with step `h` at lag `k`.
fn fgn_cov(hurst: f64, h: f64, k: usize) -> f64 {
    let e = 2.0 * hurst;
    let k = k as f64;
    0.5 * h.powf(e) * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

impl FbmGenerator {
    pub fn new(hurst: f64, horizon: f64, steps: usize) -> Result<Self> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(PathError::InvalidHurst(hurst));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(PathError::InvalidGrid(format!("horizon must be positive, got {horizon}")));
        }
        if steps < 2 {
            return Err(PathError::InvalidGrid("fBm needs m ≥ 2".into()));
        }
        let method = if steps <= CHOLESKY_MAX_STEPS {
            Self::cholesky(hurst, horizon, steps)?
        } else {
            match Self::circulant(hurst, horizon, steps) {
                Some(m) => m,
                None => Self::cholesky(hurst, horizon, steps)?,
            }
        };
        Ok(FbmGenerator {
            hurst,
            horizon,
            steps,
            method,
        })
    }

    fn cholesky(hurst: f64, horizon: f64, m: usize) -> Result<FbmMethod> {
        let h = horizon / m as f64;
        let gamma: Vec<f64> = (0..m).map(|k| fgn_cov(hurst, h, k)).collect();
        let cov = DMatrix::from_fn(m, m, |i, j| gamma[i.abs_diff(j)]);
        if let Some(c) = cov.clone().cholesky() {
            return Ok(FbmMethod::Cholesky(c.l()));
        }
        let jittered = cov + DMatrix::identity(m, m) * JITTER;
        jittered
            .cholesky()
            .map(|c| FbmMethod::Cholesky(c.l()))
            .ok_or_else(|| {
                PathError::NumericalFailure("fBm covariance not positive definite after jitter".into())
            })
    }

    fn circulant(hurst: f64, horizon: f64, m: usize) -> Option<FbmMethod> {
        let h = horizon / m as f64;
        let n = 2 * m;
        let mut row: Vec<Complex<f64>> = (0..n)
            .map(|j| {
                let lag = if j <= m { j } else { n - j };
                Complex::new(fgn_cov(hurst, h, lag), 0.0)
            })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut row);
        let max = row.iter().map(|c| c.re).fold(0.0, f64::max);
        if row.iter().any(|c| c.re < -JITTER * max.max(1.0)) {
            return None;
        }
        Some(FbmMethod::Circulant(
            row.iter().map(|c| (c.re.max(0.0) / n as f64).sqrt()).collect(),
        ))
    }

    pub fn method(&self) -> &FbmMethod {
        &self.method
    }

    /// One coordinate: `B(t_0), …, B(t_m)` with `B(0) = 0`.
    pub fn sample_coordinate(&self, seed: u64, coordinate: u64) -> Vec<f64> {
        let mut r = rng::stream(seed, coordinate);
        let m = self.steps;
        let increments: Vec<f64> = match &self.method {
            FbmMethod::Cholesky(l) => {
                let z = DVector::from_fn(m, |_, _| StandardNormal.sample(&mut r));
                (l * z).iter().cloned().collect()
            }
            FbmMethod::Circulant(sqrt_eig) => {
                let n = sqrt_eig.len();
                let mut buf: Vec<Complex<f64>> = sqrt_eig
                    .iter()
                    .map(|s| {
                        let re: f64 = StandardNormal.sample(&mut r);
                        let im: f64 = StandardNormal.sample(&mut r);
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                FftPlanner::new().plan_fft_forward(n).process(&mut buf);
                buf[..m].iter().map(|c| c.re).collect()
            }
        };
        let mut out = Vec::with_capacity(m + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for d in increments {
            acc += d;
            out.push(acc);
        }
        out
    }

    /// A `dims`-dimensional path with independent coordinates.
    pub fn sample(&self, dims: usize, seed: u64) -> SampledPath {
        let coords: Vec<Vec<f64>> = (0..dims as u64).map(|c| self.sample_coordinate(seed, c)).collect();
        let grid = uniform_grid(self.horizon, self.steps);
        let values = (0..=self.steps)
            .map(|i| coords.iter().map(|c| c[i]).collect())
            .collect();
        SampledPath::new(grid, values).expect("fBm sample is finite")
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }
}

/// Exact Gaussian sample of a `dims`-dimensional fBm on `m` uniform steps.
pub fn sample_fbm(hurst: f64, horizon: f64, m: usize, dims: usize, seed: u64) -> Result<SampledPath> {
    Ok(FbmGenerator::new(hurst, horizon, m)?.sample(dims, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_hurst() {
        assert!(matches!(FbmGenerator::new(0.5, 1.0, 8), Err(PathError::InvalidHurst(_))));
        assert!(matches!(FbmGenerator::new(1.0, 1.0, 8), Err(PathError::InvalidHurst(_))));
    }

    #[test]
    fn starts_at_zero_and_is_deterministic() {
        let a = sample_fbm(0.7, 1.0, 64, 2, 9).unwrap();
        let b = sample_fbm(0.7, 1.0, 64, 2, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.value(0), &[0.0, 0.0]);
        assert_ne!(a, sample_fbm(0.7, 1.0, 64, 2, 10).unwrap());
    }

    #[test]
    fn circulant_used_on_large_grids() {
        let g = FbmGenerator::new(0.75, 1.0, 4096).unwrap();
        assert!(matches!(g.method(), FbmMethod::Circulant(_)));
        let g = FbmGenerator::new(0.75, 1.0, 16).unwrap();
        assert!(matches!(g.method(), FbmMethod::Cholesky(_)));
    }

    #[test]
    fn terminal_variance_circulant() {
        let g = FbmGenerator::new(0.8, 2.0, 2048).unwrap();
        let n = 2000;
        let var = (0..n)
            .map(|s| g.sample_coordinate(s, 0)[2048].powi(2))
            .sum::<f64>()
            / n as f64;
        let expected = 2.0f64.powf(1.6);
        // Var of the sample variance of a Gaussian is 2σ⁴/n
        let se = expected * (2.0 / n as f64).sqrt();
        assert!((var - expected).abs() < 4.0 * se, "{var} vs {expected}");
    }
}
