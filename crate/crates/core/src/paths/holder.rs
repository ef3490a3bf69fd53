//! Grid Hölder seminorms.

use rayon::prelude::*;
use serde::Serialize;

use super::{PathError, Result, SampledPath};
use crate::linalg::dist;

/// `‖p‖_α` on the grid, `‖p‖_∞` and their sum `N_α(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderNorms {
    pub seminorm: f64,
    pub sup_norm: f64,
    pub total: f64,
}

const GAP_BLOCK: usize = 32;
const PAR_THRESHOLD: usize = 2048;

/// Maximum over node pairs `s < t` of `‖p(t) − p(s)‖ / (t − s)^α`.
///
/// This is a lower bound for the seminorm of the piecewise-linear
/// interpolant and is exact in the refinement limit. On uniform grids pairs
/// are scanned by increasing gap and the scan stops once the path diameter
/// over the remaining gaps cannot beat the current maximum.
pub fn holder_seminorm(p: &SampledPath, alpha: f64) -> Result<HolderNorms> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(PathError::InvalidExponent(alpha));
    }
    let seminorm = if p.is_uniform() {
        uniform_scan(p, alpha)
    } else {
        full_scan(p, alpha)
    };
    let sup_norm = p.sup_norm();
    Ok(HolderNorms {
        seminorm,
        sup_norm,
        total: seminorm + sup_norm,
    })
}

fn ratio(p: &SampledPath, i: usize, j: usize, alpha: f64) -> f64 {
    let g = p.grid();
    dist(p.value(i), p.value(j)) / (g[j] - g[i]).powf(alpha)
}

fn full_scan(p: &SampledPath, alpha: f64) -> f64 {
    pairwise_full(p.len(), |i, j| ratio(p, i, j, alpha))
}

fn uniform_scan(p: &SampledPath, alpha: f64) -> f64 {
    let h = p.horizon() / p.steps() as f64;
    pairwise_uniform(
        p.len(),
        h,
        alpha,
        |i| dist(p.value(0), p.value(i)),
        |i, j| ratio(p, i, j, alpha),
    )
}

/// Maximum of `ratio(i, j)` over all node pairs `i < j`.
pub(crate) fn pairwise_full<R>(n: usize, ratio: R) -> f64
where
    R: Fn(usize, usize) -> f64 + Sync,
{
    let row = |i: usize| (i + 1..n).map(|j| ratio(i, j)).fold(0.0, f64::max);
    if n > PAR_THRESHOLD {
        (0..n).into_par_iter().map(row).reduce(|| 0.0, f64::max)
    } else {
        (0..n).map(row).fold(0.0, f64::max)
    }
}

/// Same maximum on a uniform grid of step `h`, for `ratio(i, j) =
/// d(i, j)/((j − i)h)^α` with `d` a metric. Gaps are scanned in increasing
/// order; `from_first(i) = d(0, i)` bounds the diameter by the triangle
/// inequality, which ends the scan once no remaining gap can win.
pub(crate) fn pairwise_uniform<D, R>(n: usize, h: f64, alpha: f64, from_first: D, ratio: R) -> f64
where
    D: Fn(usize) -> f64 + Sync,
    R: Fn(usize, usize) -> f64 + Sync,
{
    let diameter = 2.0
        * if n > PAR_THRESHOLD {
            (0..n).into_par_iter().map(&from_first).reduce(|| 0.0, f64::max)
        } else {
            (0..n).map(&from_first).fold(0.0, f64::max)
        };
    let mut best: f64 = 0.0;
    let mut gap = 1;
    while gap < n {
        let hi = (gap + GAP_BLOCK).min(n);
        let block = |g: usize| {
            let per = |i: usize| ratio(i, i + g);
            if (n - g) * (hi - gap) > PAR_THRESHOLD {
                (0..n - g).into_par_iter().map(per).reduce(|| 0.0, f64::max)
            } else {
                (0..n - g).map(per).fold(0.0, f64::max)
            }
        };
        for g in gap..hi {
            best = best.max(block(g));
        }
        gap = hi;
        if gap < n && diameter / (gap as f64 * h).powf(alpha) <= best {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        let lin = SampledPath::from_fn(1.0, 100, |t| vec![t]).unwrap();
        assert!((holder_seminorm(&lin, 0.5).unwrap().seminorm - 1.0).abs() < 1e-12);
        let c = SampledPath::constant(1.0, 10, vec![3.0, 4.0]).unwrap();
        let n = holder_seminorm(&c, 0.7).unwrap();
        assert_eq!(n.seminorm, 0.0);
        assert_eq!(n.sup_norm, 5.0);
        let sq = SampledPath::from_fn(1.0, 10_000, |t| vec![t.sqrt()]).unwrap();
        assert!((holder_seminorm(&sq, 0.5).unwrap().seminorm - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_exponent() {
        let lin = SampledPath::from_fn(1.0, 4, |t| vec![t]).unwrap();
        assert!(holder_seminorm(&lin, 0.0).is_err());
        assert!(holder_seminorm(&lin, 1.5).is_err());
    }

    #[test]
    fn early_exit_agrees_with_full_scan() {
        let p = SampledPath::from_fn(2.0, 600, |t| vec![(7.0 * t).sin() * t, (3.0 * t).cos()]).unwrap();
        for a in [0.3, 0.6, 1.0] {
            let fast = uniform_scan(&p, a);
            let full = full_scan(&p, a);
            assert!((fast - full).abs() <= 1e-15 * full.max(1.0), "{a}: {fast} vs {full}");
        }
    }
}
