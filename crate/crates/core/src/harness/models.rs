//! Law families of the Poisson-network experiments.

use std::sync::Arc;

use crate::cascade_lti::LtiModel;
use crate::dists::{BufferLaw, ExposureLaw, Grid, GridPmf, LogNormal};
use crate::ensemble::{Ensemble, EnsembleError};
use crate::netgen::{EdgeTypeLaw, NodeTypeLaw};

use super::HarnessError;

/// Fraction of banks defaulted by the initial shock.
pub const INITIAL_DEFAULT: f64 = 0.01;

/// Relative spread of the exposures in Experiments 1 and 2A.
pub const EXP1_EXPOSURE_CV: f64 = 0.383;

/// Total expected interbank assets of a bank in Experiments 1 and 2A.
pub const EXP1_EXPOSURE_TOTAL: f64 = 0.2;

/// Tail probability a buffer law must leave inside the grid.
pub const GRID_TAIL: f64 = 1e-6;

/// Type laws of a directed Poisson skeleton on `n` nodes: each of the
/// `n (n - 1)` ordered pairs is an edge with probability `z / (n - 1)`.
pub fn poisson_types(n: usize, z: f64, k_max: usize) -> Result<(NodeTypeLaw, EdgeTypeLaw), HarnessError> {
    if n < 2 {
        return Err(HarnessError::Config(format!("a Poisson skeleton needs at least two nodes, got {n}")));
    }
    let p = (z / (n - 1) as f64).clamp(0.0, 1.0);
    let nodes = NodeTypeLaw::binomial(n - 1, p, k_max)?;
    let edges = EdgeTypeLaw::independent(&nodes)?;
    Ok((nodes, edges))
}

/// A buffer that is `value` with probability `1 - atom0` and zero otherwise.
/// Non-positive values are always breached.
pub fn point_buffer(atom0: f64, value: f64, grid: Grid) -> Result<BufferLaw, HarnessError> {
    if value <= 0.0 {
        return Ok(BufferLaw::new(1.0, &GridPmf::point(grid, 1))?);
    }
    Ok(BufferLaw::deterministic(atom0, value, grid)?)
}

/// Deterministic buffers and exposures with mean `0.2 / j` that depend on the
/// creditor's in-degree.
pub fn exp1_ensemble(delta: f64, sigma: f64, k_max: usize, grid: Grid) -> Result<Ensemble, HarnessError> {
    let d = Arc::new(point_buffer(INITIAL_DEFAULT, delta, grid)?);
    let s = Arc::new(point_buffer(0.0, sigma, grid)?);
    let mut by_in_degree = vec![None; k_max + 1];
    for (j, slot) in by_in_degree.iter_mut().enumerate().skip(1) {
        let mean = EXP1_EXPOSURE_TOTAL / j as f64;
        *slot = Some(Arc::new(ExposureLaw::lognormal(mean, EXP1_EXPOSURE_CV * mean, grid)?));
    }
    Ok(Ensemble::build(
        grid,
        k_max,
        |_, _| Ok(Some((d.clone(), s.clone()))),
        |_, j| Ok(by_in_degree[j].clone()),
    )?)
}

/// Grid whose last cell sits at twice the largest buffer.
pub fn exp1_grid(max_buffer: f64, cells: usize) -> Result<Grid, HarnessError> {
    Ok(Grid::new(2.0 * max_buffer / (cells - 1) as f64, cells)?)
}

/// Parameters of the log-normal laws of Experiment 2B.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Exp2bLaws {
    pub delta_mean: f64,
    pub delta_std: f64,
    pub sigma_mean: f64,
    pub sigma_std: f64,
    /// Network-average exposure.
    pub omega_mean: f64,
    /// Coefficient of variation of every exposure.
    pub omega_cv: f64,
    pub degree_exponent: f64,
}

impl Default for Exp2bLaws {
    fn default() -> Self {
        Exp2bLaws {
            delta_mean: 0.18,
            delta_std: 0.18,
            sigma_mean: 0.12,
            sigma_std: 0.12,
            omega_mean: 1.0,
            omega_cv: 1.0,
            degree_exponent: -0.5,
        }
    }
}

impl Exp2bLaws {
    /// Grid covering the `1 - GRID_TAIL` quantile of both buffers.
    pub fn grid(&self, cells: usize) -> Result<Grid, HarnessError> {
        let top = [(self.delta_mean, self.delta_std), (self.sigma_mean, self.sigma_std)]
            .iter()
            .map(|&(m, s)| LogNormal::new(m, s).map(|l| l.quantile(1.0 - GRID_TAIL)))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok(Grid::new(top / (cells as f64 - 1.5), cells)?)
    }

    /// Exposure of type `(k, j)` has mean `c (j k)^beta`, with `c` chosen so
    /// that the mean over edge types is `omega_mean`.
    pub fn ensemble(&self, edges: &EdgeTypeLaw, grid: Grid) -> Result<Ensemble, HarnessError> {
        let k_max = edges.k_max();
        let factor = |k: usize, j: usize| ((j * k) as f64).powf(self.degree_exponent);
        let mut avg = 0.0;
        for k in 1..=k_max {
            for j in 1..=k_max {
                avg += edges.get(k, j) * factor(k, j);
            }
        }
        if avg <= 0.0 {
            return Err(HarnessError::Config("edge-type law has no mass on positive degrees".into()));
        }
        let c = self.omega_mean / avg;
        let d = Arc::new(BufferLaw::lognormal_folded(INITIAL_DEFAULT, self.delta_mean, self.delta_std, grid)?.0);
        let s = Arc::new(BufferLaw::lognormal_folded(0.0, self.sigma_mean, self.sigma_std, grid)?.0);
        Ok(Ensemble::build(
            grid,
            k_max,
            |_, _| Ok(Some((d.clone(), s.clone()))),
            |k, j| {
                if k == 0 || j == 0 || edges.get(k, j) == 0.0 {
                    return Ok(None);
                }
                let mean = c * factor(k, j);
                let w = ExposureLaw::lognormal(mean, self.omega_cv * mean, grid).map_err(EnsembleError::from)?;
                Ok(Some(Arc::new(w)))
            },
        )?)
    }
}

/// Random-skeleton model on the Poisson type laws.
pub fn poisson_model(
    n: usize,
    z: f64,
    k_max: usize,
    ensemble: Arc<Ensemble>,
    lambda: f64,
) -> Result<LtiModel, HarnessError> {
    let (nodes, edges) = poisson_types(n, z, k_max)?;
    Ok(LtiModel::new(nodes, edges, ensemble, lambda)?)
}

/// Degree cap large enough that Poisson(`z`) degrees beyond it are negligible.
pub fn default_k_max(z: f64) -> usize {
    ((4.0 * z).ceil() as usize).max(16)
}
