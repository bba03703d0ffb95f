//! Uniform discretization of the truncated half-line `[0, y_max]` and the
//! calculus primitives built on it.
//!
//! All quadratures are composite trapezoid; derivatives are three-point
//! central stencils with second-order one-sided closures at the ends.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    y_max: f64,
    n_cells: usize,
    h: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn new(y_max: f64, n_cells: usize) -> Result<Self> {
        if !(y_max.is_finite() && y_max > 0.0) {
            return Err(Error::InvalidGrid(format!("y_max must be positive, got {y_max}")));
        }
        if n_cells < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "n_cells must be at least {MIN_CELLS}, got {n_cells}"
            )));
        }
        let h = y_max / n_cells as f64;
        let mut nodes: Vec<f64> = (0..=n_cells).map(|k| k as f64 * h).collect();
        nodes[n_cells] = y_max;
        Ok(Self {
            y_max,
            n_cells,
            h,
            nodes,
        })
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Number of nodes, `n_cells + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Index of the cell `[y_k, y_{k+1}]` containing `y`, clamped to the grid.
    pub(crate) fn cell_of(&self, y: f64) -> usize {
        let k = (y / self.h).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n_cells - 1)
        }
    }
}

/// Shorthand for [`Grid::new`].
pub fn build_grid(y_max: f64, n_cells: usize) -> Result<Grid> {
    Grid::new(y_max, n_cells)
}

/// Scalar samples on the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
    diverged: bool,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            diverged: false,
        })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self {
            grid,
            values,
            diverged: false,
        }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&y| f(y)).collect();
        Self {
            grid,
            values,
            diverged: false,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged
    }

    pub fn mark_diverged(&mut self) {
        self.diverged = true;
    }

    /// True when the field is usable as input to the calculus primitives.
    pub fn is_finite(&self) -> bool {
        !self.diverged && self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }

    fn check(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Diverged)
        }
    }

    fn with_values(&self, values: Vec<f64>) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            values,
            diverged: false,
        }
    }
}

/// Composite trapezoid approximation of `∫₀^{y_max} f dy`.
pub fn integrate(f: &Field) -> Result<f64> {
    f.check()?;
    Ok(trapz(f.grid.h(), &f.values))
}

/// Discrete antiderivative from the wall: `result[0] = 0` and
/// `result[k] = ∫₀^{y_k} f` by cumulative trapezoid.
pub fn cumulative_integral(f: &Field) -> Result<Field> {
    f.check()?;
    let mut out = vec![0.0; f.values.len()];
    cumtrapz(f.grid.h(), &f.values, &mut out);
    Ok(f.with_values(out))
}

/// `∂_y f` by central differences, one-sided second order at the ends.
pub fn first_derivative(f: &Field) -> Result<Field> {
    f.check()?;
    let mut out = vec![0.0; f.values.len()];
    diff1(f.grid.h(), &f.values, &mut out);
    Ok(f.with_values(out))
}

/// `∂_y² f` by the three-point stencil, one-sided second order at the ends.
pub fn second_derivative(f: &Field) -> Result<Field> {
    f.check()?;
    let mut out = vec![0.0; f.values.len()];
    diff2(f.grid.h(), &f.values, &mut out);
    Ok(f.with_values(out))
}

// Slice-level kernels. The solver calls these directly on its work buffers.

pub(crate) fn trapz(h: f64, f: &[f64]) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    // Same summation order as `cumtrapz` so the last cumulative node agrees exactly.
    let mut acc = 0.0;
    for k in 1..n {
        acc += 0.5 * h * (f[k - 1] + f[k]);
    }
    acc
}

pub(crate) fn cumtrapz(h: f64, f: &[f64], out: &mut [f64]) {
    let mut acc = 0.0;
    out[0] = 0.0;
    for k in 1..f.len() {
        acc += 0.5 * h * (f[k - 1] + f[k]);
        out[k] = acc;
    }
}

pub(crate) fn diff1(h: f64, f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let inv = 1.0 / (2.0 * h);
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv;
    for k in 1..n - 1 {
        out[k] = (f[k + 1] - f[k - 1]) * inv;
    }
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv;
}

pub(crate) fn diff2(h: f64, f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let inv = 1.0 / (h * h);
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
    for k in 1..n - 1 {
        out[k] = (f[k + 1] - 2.0 * f[k] + f[k - 1]) * inv;
    }
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv;
}

pub(crate) fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Trapezoid integral of the piecewise-linear interpolant of `f` over
/// `[lo, hi] ⊂ [0, y_max]`, with `lo` and `hi` not necessarily nodes.
pub(crate) fn trapz_between(grid: &Grid, f: &[f64], lo: f64, hi: f64) -> f64 {
    let lo = lo.clamp(0.0, grid.y_max());
    let hi = hi.clamp(0.0, grid.y_max());
    if hi <= lo {
        return 0.0;
    }
    let h = grid.h();
    let y = grid.nodes();
    let interp = |k: usize, x: f64| f[k] + (f[k + 1] - f[k]) * (x - y[k]) / h;
    let (klo, khi) = (grid.cell_of(lo), grid.cell_of(hi));
    if klo == khi {
        return 0.5 * (hi - lo) * (interp(klo, lo) + interp(klo, hi));
    }
    let mut acc = 0.5 * (y[klo + 1] - lo) * (interp(klo, lo) + f[klo + 1]);
    for k in klo + 1..khi {
        acc += 0.5 * h * (f[k] + f[k + 1]);
    }
    acc += 0.5 * (hi - y[khi]) * (f[khi] + interp(khi, hi));
    acc
}

/// Linear interpolation of nodal data at `y`.
pub(crate) fn interpolate(grid: &Grid, f: &[f64], y: f64) -> f64 {
    let y = y.clamp(0.0, grid.y_max());
    let k = grid.cell_of(y);
    let x = grid.nodes()[k];
    f[k] + (f[k + 1] - f[k]) * (y - x) / grid.h()
}
