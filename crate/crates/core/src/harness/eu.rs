//! Stylized 90-bank network grown by directed preferential attachment, with
//! log-normal balance sheets conditioned on the degrees.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cascade_fixed::{EdgeLawRow, FixedLtiModel, NodeLawRow};
use crate::cascade_mc::{McError, NetworkRealization, RealizationSource};
use crate::dists::{BufferLaw, ExposureLaw, Grid, GridPmf, LogNormal};
use crate::netgen::{preferential_attachment, top_connected_subnetwork, Skeleton};
use crate::rng::{stream, StreamRng};

use super::HarnessError;

/// Tail probability of the largest buffer left beyond the grid; it is
/// folded into the top cell.
pub const EU_GRID_TAIL: f64 = 1e-4;

/// Growth and balance-sheet parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EuCalibration {
    pub alpha: f64,
    pub gamma: f64,
    pub delta_in: f64,
    pub delta_out: f64,
    pub grow_n: usize,
    pub keep: usize,
    pub beta1: f64,
    pub a1: f64,
    pub b1: f64,
    pub beta2: f64,
    pub a2: f64,
    pub b2: f64,
    pub stress_prefactor: f64,
    /// Read the exposure formula as the creditor's total interbank assets and
    /// split it evenly over its debtors.
    pub split_exposures: bool,
}

impl Default for EuCalibration {
    fn default() -> Self {
        EuCalibration {
            alpha: 0.169,
            gamma: 0.169,
            delta_in: 4.417,
            delta_out: 4.417,
            grow_n: 1000,
            keep: 90,
            beta1: 0.3,
            a1: 8.03,
            b1: 0.9,
            beta2: -0.2,
            a2: 8.75,
            b2: 1.16,
            stress_prefactor: 2.0 / 3.0,
            split_exposures: true,
        }
    }
}

/// `(k j)^beta` with both degrees floored at one.
fn degree_factor(k: usize, j: usize, beta: f64) -> f64 {
    ((k.max(1) * j.max(1)) as f64).powf(beta)
}

/// Log-space location and scale of one node's or edge's law.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LogLaw {
    mu: f64,
    sigma: f64,
}

impl LogLaw {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x: f64 = rng.sample(StandardNormal);
        (self.mu + self.sigma * x).exp()
    }

    fn lognormal(&self) -> LogNormal {
        let var = self.sigma * self.sigma;
        let mean = (self.mu + 0.5 * var).exp();
        LogNormal { mean, std: mean * var.exp_m1().sqrt() }
    }
}

/// Laws of the balance sheet on a given skeleton, after scaling all default
/// buffers by `delta_scale` and stress buffers by `sigma_scale`.
#[derive(Debug, Clone)]
pub struct EuBalanceSheets {
    pub skeleton: Arc<Skeleton>,
    delta: Vec<LogLaw>,
    sigma: Vec<LogLaw>,
    omega: Vec<LogLaw>,
}

impl EuBalanceSheets {
    pub fn new(skeleton: Arc<Skeleton>, cal: &EuCalibration, delta_scale: f64, sigma_scale: f64) -> Result<Self, HarnessError> {
        if !(delta_scale > 0.0 && sigma_scale > 0.0) {
            return Err(HarnessError::Config("buffer scale factors must be positive".into()));
        }
        let g = &skeleton;
        let node = |v: usize, scale: f64, pre: f64| {
            let (j, k) = g.node_type(v);
            LogLaw { mu: cal.a1 + (pre * scale * degree_factor(k, j, cal.beta1)).ln(), sigma: cal.b1 }
        };
        let n = g.node_count();
        let delta = (0..n).map(|v| node(v, delta_scale, 1.0)).collect();
        let sigma = (0..n).map(|v| node(v, sigma_scale, cal.stress_prefactor)).collect();
        let omega = (0..g.edge_count())
            .map(|e| {
                let (k, j) = g.edge_type(e);
                let split = if cal.split_exposures { (j.max(1) as f64).ln() } else { 0.0 };
                LogLaw { mu: cal.a2 + degree_factor(k, j, cal.beta2).ln() - split, sigma: cal.b2 }
            })
            .collect();
        Ok(EuBalanceSheets { skeleton, delta, sigma, omega })
    }

    /// Draws `Delta_v, Sigma_v` node by node, then `Omega` edge by edge.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<NetworkRealization, HarnessError> {
        let mut delta = Vec::with_capacity(self.delta.len());
        let mut sigma = Vec::with_capacity(self.sigma.len());
        for (d, s) in self.delta.iter().zip(&self.sigma) {
            delta.push(d.draw(rng));
            sigma.push(s.draw(rng));
        }
        let omega = self.omega.iter().map(|w| w.draw(rng)).collect();
        Ok(NetworkRealization::new(self.skeleton.clone(), delta, sigma, omega)?)
    }

    /// Node laws in the fixed-engine file format, with default atom `p0`.
    pub fn node_law_rows(&self, p0: f64) -> Vec<NodeLawRow> {
        self.delta
            .iter()
            .zip(&self.sigma)
            .enumerate()
            .map(|(v, (d, s))| {
                let (d, s) = (d.lognormal(), s.lognormal());
                NodeLawRow { v, p0, q0: 0.0, delta_mean: d.mean, delta_std: d.std, sigma_mean: s.mean, sigma_std: s.std }
            })
            .collect()
    }

    pub fn edge_law_rows(&self) -> Vec<EdgeLawRow> {
        self.omega
            .iter()
            .enumerate()
            .map(|(e, w)| {
                let edge = self.skeleton.edge(e);
                let w = w.lognormal();
                EdgeLawRow { v: edge.debtor as usize, w: edge.creditor as usize, omega_mean: w.mean, omega_std: w.std }
            })
            .collect()
    }

    /// Per-node mean of the default buffer.
    pub fn delta_means(&self) -> Vec<f64> {
        self.delta.iter().map(|l| l.lognormal().mean).collect()
    }

    /// Shared grid whose top cell sits at the largest `1 - tail` buffer
    /// quantile.
    pub fn grid(&self, cells: usize, tail: f64) -> Result<Grid, HarnessError> {
        let top = self.delta.iter().chain(&self.sigma).map(|l| l.lognormal().quantile(1.0 - tail)).fold(0.0, f64::max);
        Ok(Grid::new(top / (cells as f64 - 1.5), cells)?)
    }

    /// Fixed-skeleton model with day-0 default probability `p0` at every
    /// node. Buffer tails beyond the grid are folded into the top cell.
    pub fn fixed_model(&self, grid: Grid, p0: f64, lambda: f64) -> Result<FixedLtiModel, HarnessError> {
        let buffer = |l: &LogLaw, atom: f64| -> Result<Arc<BufferLaw>, HarnessError> {
            let ln = l.lognormal();
            let law = if ln.mean < 0.5 * grid.step() {
                BufferLaw::new(atom, &GridPmf::point(grid, 1))?
            } else {
                BufferLaw::lognormal_folded(atom, ln.mean, ln.std, grid)?.0
            };
            Ok(Arc::new(law))
        };
        let default = self.delta.iter().map(|l| buffer(l, p0)).collect::<Result<Vec<_>, _>>()?;
        let stress = self.sigma.iter().map(|l| buffer(l, 0.0)).collect::<Result<Vec<_>, _>>()?;
        let exposure = self
            .omega
            .iter()
            .map(|l| {
                let ln = l.lognormal();
                Ok(Arc::new(ExposureLaw::lognormal(ln.mean, ln.std, grid)?))
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        Ok(FixedLtiModel::new(self.skeleton.clone(), default, stress, exposure, lambda)?)
    }
}

/// Redraws the balance sheets on the same skeleton in every trial.
impl RealizationSource for EuBalanceSheets {
    fn realize(&self, rng: &mut StreamRng) -> Result<NetworkRealization, McError> {
        self.draw(rng).map_err(|e| match e {
            HarnessError::Mc(m) => m,
            other => McError::InvalidParameter(other.to_string()),
        })
    }
}

/// Grows `grow_n` nodes and keeps the `keep` most connected ones.
pub fn eu_skeleton<R: Rng + ?Sized>(cal: &EuCalibration, rng: &mut R) -> Result<Skeleton, HarnessError> {
    let g = preferential_attachment(cal.grow_n, cal.alpha, cal.gamma, cal.delta_in, cal.delta_out, rng)?;
    Ok(top_connected_subnetwork(&g, cal.keep)?.skeleton)
}

/// Skeleton and one draw of the balance sheets, all from `seed`.
pub fn build_eu_network(cal: &EuCalibration, seed: u64) -> Result<NetworkRealization, HarnessError> {
    let mut rng = stream(seed, 0);
    let g = Arc::new(eu_skeleton(cal, &mut rng)?);
    EuBalanceSheets::new(g, cal, 1.0, 1.0)?.draw(&mut rng)
}
