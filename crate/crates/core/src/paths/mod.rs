//! Sampled Hölder paths on uniform grids.
//!
//! A [`SampledPath`] stores node values on a grid `0 = t_0 < … < t_m = T`
//! and is evaluated in between by linear interpolation. Values are vectors
//! in `R^k` or `e × d` matrices stored row-major; the Hölder machinery only
//! sees the flattened `R^{e·d}` view with the Euclidean (Frobenius) norm.

mod fbm;
mod holder;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fbm::{sample_fbm, FbmGenerator, FbmMethod};
pub use holder::{holder_seminorm, HolderNorms};
pub(crate) use holder::{pairwise_full, pairwise_uniform};

use crate::linalg::{all_finite, norm};

#[derive(Debug, Error)]
pub enum PathError {
    #[error("Hölder exponent must lie in (0, 1], got {0}")]
    InvalidExponent(f64),
    #[error("Hurst index must lie in (1/2, 1), got {0}")]
    InvalidHurst(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("value dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("non-finite path value")]
    NonFinite,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, PathError>;

/// `m + 1` equispaced nodes on `[0, T]`.
pub fn uniform_grid(horizon: f64, m: usize) -> Vec<f64> {
    (0..=m)
        .map(|i| {
            if i == m {
                horizon
            } else {
                horizon * i as f64 / m as f64
            }
        })
        .collect()
}

/// Path sampled on a grid, evaluated by linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    grid: Vec<f64>,
    values: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl SampledPath {
    /// Vector-valued path from one value per grid node.
    pub fn new(grid: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let k = values.first().map_or(0, Vec::len);
        if let Some(v) = values.iter().find(|v| v.len() != k) {
            return Err(PathError::DimMismatch {
                expected: k,
                found: v.len(),
            });
        }
        Self::with_shape(grid, values.concat(), k, 1)
    }

    /// Path whose node values are `rows × cols` matrices, row-major.
    pub fn with_shape(grid: Vec<f64>, values: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if grid.len() < 2 {
            return Err(PathError::InvalidGrid("need at least two nodes".into()));
        }
        if grid[0] != 0.0 {
            return Err(PathError::InvalidGrid("first node must be 0".into()));
        }
        if !grid.windows(2).all(|w| w[1] > w[0]) || !all_finite(&grid) {
            return Err(PathError::InvalidGrid("grid must be strictly increasing".into()));
        }
        let stride = rows * cols;
        if stride == 0 || values.len() != stride * grid.len() {
            return Err(PathError::DimMismatch {
                expected: stride * grid.len(),
                found: values.len(),
            });
        }
        if !all_finite(&values) {
            return Err(PathError::NonFinite);
        }
        Ok(SampledPath {
            grid,
            values,
            rows,
            cols,
        })
    }

    /// Samples `f` on the uniform grid with `m` steps.
    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(horizon: f64, m: usize, f: F) -> Result<Self> {
        let grid = uniform_grid(horizon, m);
        let values = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    /// Matrix-valued analogue of [`SampledPath::from_fn`].
    pub fn from_fn_matrix<F: Fn(f64) -> Vec<f64>>(
        horizon: f64,
        m: usize,
        rows: usize,
        cols: usize,
        f: F,
    ) -> Result<Self> {
        let grid = uniform_grid(horizon, m);
        let values = grid.iter().flat_map(|&t| f(t)).collect();
        Self::with_shape(grid, values, rows, cols)
    }

    pub fn constant(horizon: f64, m: usize, value: Vec<f64>) -> Result<Self> {
        Self::from_fn(horizon, m, |_| value.clone())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of steps `m`.
    pub fn steps(&self) -> usize {
        self.grid.len() - 1
    }

    /// Flattened value dimension.
    pub fn dim(&self) -> usize {
        self.rows * self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn value(&self, i: usize) -> &[f64] {
        let s = self.dim();
        &self.values[i * s..(i + 1) * s]
    }

    pub fn values(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim())
    }

    pub fn flat_values(&self) -> &[f64] {
        &self.values
    }

    /// Scalar component `j` of every node.
    pub fn component(&self, j: usize) -> Vec<f64> {
        self.values().map(|v| v[j]).collect()
    }

    pub fn last(&self) -> &[f64] {
        self.value(self.len() - 1)
    }

    /// Whether the grid is equispaced to relative accuracy 1e-9.
    pub fn is_uniform(&self) -> bool {
        let h = self.horizon() / self.steps() as f64;
        self.grid
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
    }

    pub fn mesh(&self) -> f64 {
        self.grid
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// `max_i ‖p(t_i)‖`.
    pub fn sup_norm(&self) -> f64 {
        self.values().map(norm).fold(0.0, f64::max)
    }

    /// Linear interpolation at `t` (clamped to `[0, T]`).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let t = t.clamp(0.0, self.horizon());
        let i = self.grid.partition_point(|&g| g <= t);
        if i >= self.len() {
            return self.last().to_vec();
        }
        let i = i.max(1);
        let (t0, t1) = (self.grid[i - 1], self.grid[i]);
        let lam = (t - t0) / (t1 - t0);
        self.value(i - 1)
            .iter()
            .zip(self.value(i))
            .map(|(a, b)| a + lam * (b - a))
            .collect()
    }

    /// The same path represented on `grid` (which must span `[0, T]`).
    pub fn resample(&self, grid: &[f64]) -> Result<Self> {
        if (grid[grid.len() - 1] - self.horizon()).abs() > 1e-12 * self.horizon().max(1.0) {
            return Err(PathError::InvalidGrid("resampling grid has a different horizon".into()));
        }
        let values = grid.iter().flat_map(|&t| self.eval(t)).collect();
        Self::with_shape(grid.to_vec(), values, self.rows, self.cols)
    }

    /// Every `step`-th node; `step` must divide the number of steps.
    pub fn subsample(&self, step: usize) -> Result<Self> {
        if step == 0 || !self.steps().is_multiple_of(step) {
            return Err(PathError::InvalidGrid(format!(
                "step {step} does not divide {} steps",
                self.steps()
            )));
        }
        let idx: Vec<usize> = (0..self.len()).step_by(step).collect();
        self.select_nodes(&idx)
    }

    /// Restriction to the listed node indices (increasing, starting at 0).
    pub fn select_nodes(&self, idx: &[usize]) -> Result<Self> {
        let grid = idx.iter().map(|&i| self.grid[i]).collect();
        let values = idx.iter().flat_map(|&i| self.value(i).to_vec()).collect();
        Self::with_shape(grid, values, self.rows, self.cols)
    }

    /// Restriction to the first `n` nodes, i.e. to `[0, t_{n-1}]`.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.select_nodes(&idx)
    }

    /// Nodes `a..=b` as a path on `[0, t_b − t_a]`.
    pub fn window(&self, a: usize, b: usize) -> Result<Self> {
        if !(a < b && b < self.len()) {
            return Err(PathError::InvalidGrid(format!("bad window {a}..={b}")));
        }
        let t0 = self.grid[a];
        let grid = self.grid[a..=b].iter().map(|t| t - t0).collect();
        let s = self.dim();
        Self::with_shape(grid, self.values[a * s..(b + 1) * s].to_vec(), self.rows, self.cols)
    }

    /// Applies `f` node-wise; the result is vector-valued.
    pub fn map<F: Fn(f64, &[f64]) -> Vec<f64>>(&self, f: F) -> Result<Self> {
        let values = self
            .grid
            .iter()
            .zip(self.values())
            .map(|(&t, v)| f(t, v))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    /// Same values viewed as an `rows × cols` matrix path.
    pub fn reshape(&self, rows: usize, cols: usize) -> Result<Self> {
        Self::with_shape(self.grid.clone(), self.values.clone(), rows, cols)
    }

    /// `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: f64, other: &SampledPath, b: f64) -> Result<Self> {
        if other.grid != self.grid {
            return Err(PathError::InvalidGrid("paths live on different grids".into()));
        }
        if other.dim() != self.dim() {
            return Err(PathError::DimMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::with_shape(self.grid.clone(), values, self.rows, self.cols)
    }

    /// Largest node-wise distance to `other` on a shared grid.
    pub fn sup_distance(&self, other: &SampledPath) -> Result<f64> {
        Ok(self.combine(1.0, other, -1.0)?.sup_norm())
    }

    /// Writes `t,v1,…,vk` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim()).map(|j| format!("v{j}")));
        w.write_record(&header)?;
        for (t, v) in self.grid.iter().zip(self.values()) {
            let mut rec = vec![format_float(*t)];
            rec.extend(v.iter().map(|x| format_float(*x)));
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads the format produced by [`SampledPath::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let nums = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| PathError::Parse(e.to_string()))?;
            if nums.len() < 2 {
                return Err(PathError::Parse("row needs t and at least one value".into()));
            }
            grid.push(nums[0]);
            values.push(nums[1..].to_vec());
        }
        Self::new(grid, values)
    }
}

/// Shortest round-trip decimal representation.
pub(crate) fn format_float(x: f64) -> String {
    format!("{x:?}")
}

/// Prepends the time coordinate: `W(t) = (t, w(t))`.
pub fn time_augmented(w: &SampledPath) -> SampledPath {
    let values = w
        .grid
        .iter()
        .zip(w.values())
        .map(|(&t, v)| {
            let mut out = Vec::with_capacity(v.len() + 1);
            out.push(t);
            out.extend_from_slice(v);
            out
        })
        .collect();
    SampledPath::new(w.grid.clone(), values).expect("augmenting a valid path")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(SampledPath::new(vec![0.0, 1.0], vec![vec![0.0], vec![1.0]]).is_ok());
        assert!(SampledPath::new(vec![0.1, 1.0], vec![vec![0.0], vec![1.0]]).is_err());
        assert!(SampledPath::new(vec![0.0, 0.0], vec![vec![0.0], vec![1.0]]).is_err());
        assert!(SampledPath::new(vec![0.0, 1.0], vec![vec![0.0]]).is_err());
        assert!(SampledPath::new(vec![0.0, 1.0], vec![vec![0.0], vec![f64::NAN]]).is_err());
    }

    #[test]
    fn evaluation_interpolates() {
        let p = SampledPath::from_fn(2.0, 4, |t| vec![t * t]).unwrap();
        assert_eq!(p.eval(1.0), vec![1.0]);
        assert!((p.eval(1.25)[0] - 1.625).abs() < 1e-15);
        assert_eq!(p.eval(5.0), vec![4.0]);
    }

    #[test]
    fn augmentation() {
        let z = SampledPath::constant(1.0, 4, vec![0.0]).unwrap();
        let a = time_augmented(&time_augmented(&z));
        for (t, v) in a.grid().iter().zip(a.values()) {
            assert_eq!(v, &[*t, *t, 0.0]);
        }
    }

    #[test]
    fn csv_round_trip() {
        let p = SampledPath::from_fn(1.0, 8, |t| vec![t.sin(), t.cos() / 3.0]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("t,v1,v2\n"));
        let q = SampledPath::read_csv(buf.as_slice()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn subsample_and_truncate() {
        let p = SampledPath::from_fn(1.0, 8, |t| vec![t]).unwrap();
        let s = p.subsample(2).unwrap();
        assert_eq!(s.steps(), 4);
        assert_eq!(s.last(), &[1.0]);
        assert!(p.subsample(3).is_err());
        let tr = p.truncate(3).unwrap();
        assert_eq!(tr.horizon(), 0.25);
    }
}
