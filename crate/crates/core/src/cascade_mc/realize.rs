use std::sync::Arc;

use rand::Rng;

use super::McError;
use crate::ensemble::Ensemble;
use crate::netgen::Skeleton;

/// A skeleton together with its buffers and exposures, in currency units.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub skeleton: Arc<Skeleton>,
    /// `Delta_v`; zero means defaulted on day 0.
    pub delta: Vec<f64>,
    /// `Sigma_v`; zero means stressed on day 0.
    pub sigma: Vec<f64>,
    /// `Omega` per edge, in the skeleton's edge order.
    pub omega: Vec<f64>,
}

impl NetworkRealization {
    pub fn new(skeleton: Arc<Skeleton>, delta: Vec<f64>, sigma: Vec<f64>, omega: Vec<f64>) -> Result<Self, McError> {
        let n = skeleton.node_count();
        if delta.len() != n || sigma.len() != n || omega.len() != skeleton.edge_count() {
            return Err(McError::InvalidRealization("buffer or exposure count does not match the skeleton".into()));
        }
        if delta.iter().chain(&sigma).any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(McError::InvalidRealization("buffers must be finite and non-negative".into()));
        }
        if omega.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(McError::InvalidRealization("exposures must be finite and positive".into()));
        }
        Ok(NetworkRealization { skeleton, delta, sigma, omega })
    }

    pub fn node_count(&self) -> usize {
        self.skeleton.node_count()
    }
}

/// Draws `Delta_v`, `Sigma_v` and `Omega_l` independently given the skeleton
/// from the type-indexed laws, node by node and then edge by edge.
pub fn realize_network<R: Rng + ?Sized>(
    skeleton: Arc<Skeleton>,
    ensemble: &Ensemble,
    rng: &mut R,
) -> Result<NetworkRealization, McError> {
    let h = ensemble.grid().step();
    let n = skeleton.node_count();
    let mut delta = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for v in 0..n {
        let (j, k) = skeleton.node_type(v);
        let d = ensemble.default_law(j, k)?;
        let s = ensemble.stress_law(j, k)?;
        delta.push(d.sample_cell(rng.random()) as f64 * h);
        sigma.push(s.sample_cell(rng.random()) as f64 * h);
    }
    let mut omega = Vec::with_capacity(skeleton.edge_count());
    for e in 0..skeleton.edge_count() {
        let (k, j) = skeleton.edge_type(e);
        omega.push(ensemble.exposure_law(k, j)?.sample_cell(rng.random()) as f64 * h);
    }
    NetworkRealization::new(skeleton, delta, sigma, omega)
}
