//! Uniform tensor grids on truncated boxes, sampled functions and cube families.
//!
//! Node `k` along an axis sits at `lower + k·h` and owns the cell `[x_k, x_k + h)`,
//! so the nodes tile the half-open box `[lower, lower + 2W)` exactly.

mod cubes;
mod dump;

pub use cubes::{enumerate_cubes, Cube, CubeFamily};
pub use dump::{read_csv, read_dump, write_csv, write_dump};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Uniform grid on a box of side `2·half_width` per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    half_width: f64,
    points_per_axis: usize,
    periodic: bool,
    lower: Vec<f64>,
}

/// Builds a grid centred at the origin.
pub fn make_grid(
    dim: usize,
    half_width: f64,
    points_per_axis: usize,
    periodic: bool,
) -> Result<GridSpec> {
    GridSpec::new(dim, half_width, points_per_axis, periodic)
}

impl GridSpec {
    pub fn new(
        dim: usize,
        half_width: f64,
        points_per_axis: usize,
        periodic: bool,
    ) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half_width must be positive, got {half_width}"
            )));
        }
        if points_per_axis < 4 {
            return Err(Error::InvalidGrid(format!(
                "points_per_axis must be at least 4, got {points_per_axis}"
            )));
        }
        if points_per_axis
            .checked_pow(dim as u32)
            .is_none_or(|n| n > 1 << 28)
        {
            return Err(Error::InvalidGrid("grid too large".into()));
        }
        Ok(Self {
            dim,
            half_width,
            points_per_axis,
            periodic,
            lower: vec![-half_width; dim],
        })
    }

    /// Same grid translated so that its lower corner is `lower`.
    pub fn with_lower(mut self, lower: &[f64]) -> Result<Self> {
        if lower.len() != self.dim || lower.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "lower corner {lower:?} does not match dimension {}",
                self.dim
            )));
        }
        self.lower = lower.to_vec();
        Ok(self)
    }

    /// Same box with twice as many points per axis.
    pub fn refined(&self) -> Result<Self> {
        Self::new(
            self.dim,
            self.half_width,
            2 * self.points_per_axis,
            self.periodic,
        )?
        .with_lower(&self.lower)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    pub fn coord(&self, axis: usize, index: usize) -> f64 {
        self.lower[axis] + index as f64 * self.spacing()
    }

    /// Multi-index of a flat index; the last axis varies fastest.
    pub fn unflatten(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let m = self.points_per_axis;
        let mut idx = [0; MAX_DIM];
        for a in (0..self.dim).rev() {
            idx[a] = flat % m;
            flat /= m;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx[..self.dim]
            .iter()
            .fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    pub fn point_into(&self, flat: usize, out: &mut [f64]) {
        let idx = self.unflatten(flat);
        for a in 0..self.dim {
            out[a] = self.coord(a, idx[a]);
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim];
        self.point_into(flat, &mut p);
        p
    }

    /// Index of the node at `x`, if `x` is a node up to rounding.
    pub fn node_index(&self, x: &[f64]) -> Option<usize> {
        let h = self.spacing();
        let mut idx = [0; MAX_DIM];
        for a in 0..self.dim {
            let t = (x[a] - self.lower[a]) / h;
            let k = t.round();
            if (t - k).abs() > 1e-9 || k < 0.0 || k >= self.points_per_axis as f64 {
                return None;
            }
            idx[a] = k as usize;
        }
        Some(self.flatten(&idx))
    }

    pub fn same_layout(&self, other: &GridSpec) -> bool {
        self.dim == other.dim
            && self.points_per_axis == other.points_per_axis
            && (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width
            && self
                .lower
                .iter()
                .zip(&other.lower)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * self.half_width)
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}-d grid with {} points/axis vs {}-d grid with {} points/axis",
                self.dim, self.points_per_axis, other.dim, other.points_per_axis
            )))
        }
    }
}

/// Point values on a grid. Quadrature weights are uniform, `h^dim` per node.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: GridSpec,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample {
                node: grid.unflatten(k)[..grid.dim()].to_vec(),
                value: values[k],
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &GridSpec, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Quadrature weight of every node.
    pub fn weight(&self) -> f64 {
        self.grid.cell_volume()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.weight()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn abs(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Self::new(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.flatten(idx)]
    }
}

/// Evaluates `expr` at every node.
pub fn sample(grid: &GridSpec, expr: impl Fn(&[f64]) -> f64) -> Result<SampledFunction> {
    sample_excluding(grid, expr, |_| false)
}

/// Evaluates `expr` at every node except those selected by `exclude`, which are set to zero.
pub fn sample_excluding(
    grid: &GridSpec,
    expr: impl Fn(&[f64]) -> f64,
    exclude: impl Fn(&[f64]) -> bool,
) -> Result<SampledFunction> {
    let mut x = vec![0.0; grid.dim()];
    let values = (0..grid.len())
        .map(|k| {
            grid.point_into(k, &mut x);
            if exclude(&x) {
                0.0
            } else {
                expr(&x)
            }
        })
        .collect();
    SampledFunction::new(grid.clone(), values)
}
