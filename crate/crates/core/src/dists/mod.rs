//! Grid-discretized probability distributions and their convolution algebra.
//!
//! Every monetary quantity in one model lives on a shared uniform grid of
//! `cells` points spaced `step` apart. Cell `i` represents the value `i * step`.

pub(crate) mod fft;
pub(crate) mod kernel;
mod laws;
mod lognormal;
pub(crate) mod ops;

pub use fft::{fft, ifft};
pub use laws::{BufferLaw, ExposureLaw};
pub use lognormal::{discretize_lognormal, discretize_lognormal_folded, Discretized, LogNormal};
pub use ops::{
    conv_power, convolve, convolve_saturating, scale_pmf, threshold_prob, threshold_prob_spectral,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mass that may wrap around the grid before a convolution is rejected.
pub const ALIAS_TOLERANCE: f64 = 1e-9;

/// Tail mass a strict discretization may fold into the last cell.
pub const FOLD_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("grid cell count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("grid step {0} must be positive and finite")]
    BadStep(f64),
    #[error("grids differ: {left:?} vs {right:?}")]
    GridMismatch { left: Grid, right: Grid },
    #[error("convolution wraps {mass:e} of mass around the grid; enlarge the cell count")]
    Aliasing { mass: f64 },
    #[error("discretization folds {mass:e} of tail mass into the last cell (limit {limit:e})")]
    TailTooHeavy { mass: f64, limit: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid mass vector: {0}")]
    InvalidMass(String),
}

/// A uniform grid `{0, step, 2 step, ..., (cells - 1) step}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    step: f64,
    cells: usize,
}

impl Grid {
    pub fn new(step: f64, cells: usize) -> Result<Self, DistError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(DistError::BadStep(step));
        }
        if !cells.is_power_of_two() {
            return Err(DistError::NotPowerOfTwo(cells));
        }
        Ok(Grid { step, cells })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Upper end of the representable range.
    pub fn span(&self) -> f64 {
        self.step * (self.cells - 1) as f64
    }

    /// Nearest cell to a currency value, clamped into the grid.
    pub fn cell_of(&self, value: f64) -> usize {
        let c = (value / self.step).round();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(self.cells - 1)
        }
    }

    pub fn value_of(&self, cell: usize) -> f64 {
        cell as f64 * self.step
    }
}

/// Probability mass function on a [`Grid`].
///
/// Masses are non-negative. The total is usually 1 but intermediate mixture
/// terms may carry sub-probability measures.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPmf {
    grid: Grid,
    masses: Vec<f64>,
}

impl GridPmf {
    pub fn from_masses(grid: Grid, masses: Vec<f64>) -> Result<Self, DistError> {
        if masses.len() != grid.cells {
            return Err(DistError::InvalidMass(format!(
                "expected {} cells, got {}",
                grid.cells,
                masses.len()
            )));
        }
        if let Some(bad) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(DistError::InvalidMass(format!("mass {bad} is not a finite non-negative value")));
        }
        Ok(GridPmf { grid, masses })
    }

    /// Point mass at `cell`.
    pub fn point(grid: Grid, cell: usize) -> Self {
        assert!(cell < grid.cells, "cell {cell} outside grid of {} cells", grid.cells);
        let mut masses = vec![0.0; grid.cells];
        masses[cell] = 1.0;
        GridPmf { grid, masses }
    }

    /// The identity of convolution.
    pub fn dirac(grid: Grid) -> Self {
        Self::point(grid, 0)
    }

    /// Builds from sparse `(cell, mass)` pairs.
    pub fn from_cells(grid: Grid, entries: &[(usize, f64)]) -> Result<Self, DistError> {
        let mut masses = vec![0.0; grid.cells];
        for &(cell, m) in entries {
            if cell >= grid.cells {
                return Err(DistError::InvalidMass(format!("cell {cell} outside grid")));
            }
            masses[cell] += m;
        }
        Self::from_masses(grid, masses)
    }

    pub(crate) fn from_raw(grid: Grid, masses: Vec<f64>) -> Self {
        debug_assert_eq!(masses.len(), grid.cells);
        GridPmf { grid, masses }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn into_masses(self) -> Vec<f64> {
        self.masses
    }

    pub fn mass(&self, cell: usize) -> f64 {
        self.masses.get(cell).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Mean in currency units (of the possibly unnormalized measure).
    pub fn mean(&self) -> f64 {
        let m: f64 = self.masses.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
        m * self.grid.step / self.total()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let total = self.total();
        self.masses
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = self.grid.value_of(i) - mean;
                d * d * p
            })
            .sum::<f64>()
            / total
    }

    /// Inclusive CDF, `cdf[i] = P[X <= i]`.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect()
    }

    /// Highest cell carrying mass above `eps`, if any.
    pub fn support_end(&self, eps: f64) -> Option<usize> {
        self.masses.iter().rposition(|&m| m > eps)
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.total() - 1.0).abs() <= tol
    }

    fn check_same_grid(&self, other: &GridPmf) -> Result<(), DistError> {
        if self.grid != other.grid {
            return Err(DistError::GridMismatch { left: self.grid, right: other.grid });
        }
        Ok(())
    }
}
