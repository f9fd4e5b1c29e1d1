//! Cascade mapping on a known skeleton with node- and edge-specific laws.
//!
//! Probabilities are tracked per node (`p`, `q`, `q^`) and per edge
//! (`p~`, `t`). Convolutions over a node's neighbours are saturated just
//! above that node's largest buffer cell, and the leave-one-out products
//! behind `p~` come from prefix and suffix products.

mod io;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dists::kernel::{breach_inner, sat_convolve, saturate};
use crate::dists::ops::scale_masses;
use crate::dists::{BufferLaw, DistError, ExposureLaw, Grid};
use crate::netgen::Skeleton;

pub use io::{
    grid_for_rows, model_from_rows, read_edge_laws, read_node_laws, write_edge_laws, write_node_laws, EdgeLawRow,
    NodeLawRow,
};

#[derive(Debug, Error)]
pub enum FixedError {
    #[error("expected {expected} {what} laws, got {found}")]
    Count { what: &'static str, expected: usize, found: usize },
    #[error("all laws must share one grid")]
    GridMismatch,
    #[error("lambda {0} outside [0, 1]")]
    BadLambda(f64),
    #[error("law file: {0}")]
    Format(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A skeleton with a default and stress buffer law per node and an exposure
/// law per edge.
#[derive(Debug, Clone)]
pub struct FixedLtiModel {
    pub skeleton: Arc<Skeleton>,
    pub default: Vec<Arc<BufferLaw>>,
    /// Law of `Sigma_v` given `v` not initially defaulted.
    pub stress: Vec<Arc<BufferLaw>>,
    pub exposure: Vec<Arc<ExposureLaw>>,
    pub lambda: f64,
}

impl FixedLtiModel {
    pub fn new(
        skeleton: Arc<Skeleton>,
        default: Vec<Arc<BufferLaw>>,
        stress: Vec<Arc<BufferLaw>>,
        exposure: Vec<Arc<ExposureLaw>>,
        lambda: f64,
    ) -> Result<Self, FixedError> {
        let n = skeleton.node_count();
        let l = skeleton.edge_count();
        for (what, found, expected) in
            [("default", default.len(), n), ("stress", stress.len(), n), ("exposure", exposure.len(), l)]
        {
            if found != expected {
                return Err(FixedError::Count { what, expected, found });
            }
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(FixedError::BadLambda(lambda));
        }
        let grid = default.first().map(|d| d.grid());
        if let Some(grid) = grid {
            let same = default.iter().chain(&stress).all(|d| d.grid() == grid) && exposure.iter().all(|w| w.grid() == grid);
            if !same {
                return Err(FixedError::GridMismatch);
            }
        }
        Ok(FixedLtiModel { skeleton, default, stress, exposure, lambda })
    }

    pub fn grid(&self) -> Option<Grid> {
        self.default.first().map(|d| d.grid())
    }

    /// Same model with a different stress response.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self, FixedError> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(FixedError::BadLambda(lambda));
        }
        Ok(FixedLtiModel { lambda, ..self.clone() })
    }
}

/// Per-node and per-edge probabilities after `n` steps. Edge `e` is
/// `w -> v`; `ptilde[e]` is the probability that `v` defaults without
/// regarding `w` and `t[e]` that `xi_wv = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedLtiState {
    pub n: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub qhat: Vec<f64>,
    pub ptilde: Vec<f64>,
    pub t: Vec<f64>,
}

impl FixedLtiState {
    /// Day-0 probabilities from the buffer atoms, with `t_wv = p_w`.
    pub fn initial(model: &FixedLtiModel) -> Self {
        let g = &model.skeleton;
        let p: Vec<f64> = model.default.iter().map(|d| d.atom0()).collect();
        let qhat: Vec<f64> = model.stress.iter().map(|s| s.atom0()).collect();
        let q = p.iter().zip(&qhat).map(|(p, qh)| qh * (1.0 - p)).collect();
        let ptilde = g.edges().iter().map(|e| p[e.creditor as usize]).collect();
        let t = g.edges().iter().map(|e| p[e.debtor as usize]).collect();
        FixedLtiState { n: 0, p, q, qhat, ptilde, t }
    }

    pub fn expected_defaults(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn expected_stressed(&self) -> f64 {
        self.q.iter().sum()
    }

    fn distance(&self, other: &Self) -> f64 {
        [(&self.p, &other.p), (&self.q, &other.q), (&self.qhat, &other.qhat), (&self.ptilde, &other.ptilde), (&self.t, &other.t)]
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Buffer mass above the working length is treated as sitting in its top
/// cell, so this much probability may be misread as a breach.
pub const WORKING_TAIL: f64 = 1e-12;

fn working_len(law: &BufferLaw) -> usize {
    let cdf = law.cdf();
    (cdf.partition_point(|&c| c < 1.0 - WORKING_TAIL) + 1).min(cdf.len())
}

fn unit(len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[0] = 1.0;
    v
}

/// Three-point mixture `a0 delta_0 + a1 W + a2 (factor W)` saturated at `len`.
fn mixture(law: &ExposureLaw, len: usize, a0: f64, a1: f64, a2: f64, factor: f64) -> Vec<f64> {
    let w = law.pmf().masses();
    let mut out = vec![0.0; len];
    if a1 > 0.0 {
        for (o, x) in out.iter_mut().zip(saturate(w, len)) {
            *o += a1 * x;
        }
    }
    if a2 > 0.0 {
        for (o, x) in out.iter_mut().zip(saturate(&scale_masses(w, factor), len)) {
            *o += a2 * x;
        }
    }
    out[0] += a0;
    out
}

/// Product of all factors and every leave-one-out product.
fn products(factors: &[Vec<f64>], len: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = factors.len();
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(unit(len));
    for f in factors {
        let next = sat_convolve(prefix.last().expect("non-empty"), f);
        prefix.push(next);
    }
    let mut loo = vec![Vec::new(); m];
    let mut suffix = unit(len);
    for i in (0..m).rev() {
        loo[i] = sat_convolve(&prefix[i], &suffix);
        suffix = sat_convolve(&suffix, &factors[i]);
    }
    (prefix.pop().expect("non-empty"), loo)
}

fn full_product(factors: &[Vec<f64>], len: usize) -> Vec<f64> {
    factors.iter().fold(unit(len), |acc, f| sat_convolve(&acc, f))
}

/// One application of the cascade mapping.
pub fn fixed_lti_step(state: &FixedLtiState, model: &FixedLtiModel) -> FixedLtiState {
    let g = &model.skeleton;
    let lambda = model.lambda;
    let n = g.node_count();

    struct NodeUpdate {
        p: f64,
        qhat: f64,
        full_default: f64,
        loo: Vec<f64>,
    }

    let updates: Vec<NodeUpdate> = (0..n)
        .into_par_iter()
        .map(|v| {
            let d = &model.default[v];
            let s = &model.stress[v];
            let (len_d, len_s) = (working_len(d), working_len(s));
            let ins = g.in_edges(v);
            let gs: Vec<Vec<f64>> = ins
                .iter()
                .map(|&e| {
                    let w = g.edge(e).debtor as usize;
                    let pw = state.p[w];
                    let t = state.t[e].min(pw);
                    mixture(&model.exposure[e], len_d, 1.0 - pw, t, pw - t, 1.0 - lambda)
                })
                .collect();
            let gts: Vec<Vec<f64>> = ins
                .iter()
                .map(|&e| {
                    let pw = state.p[g.edge(e).debtor as usize];
                    mixture(&model.exposure[e], len_d, 1.0 - pw, pw, 0.0, 1.0)
                })
                .collect();
            let hs: Vec<Vec<f64>> = g
                .out_edges(v)
                .iter()
                .map(|&e| {
                    let w = g.edge(e).creditor as usize;
                    let (pt, qh) = (state.ptilde[e], state.qhat[w]);
                    mixture(&model.exposure[e], len_s, (1.0 - qh) * (1.0 - pt), pt, qh * (1.0 - pt), lambda)
                })
                .collect();
            let (all, loo) = products(&gs, len_d);
            let cdf_d = &d.cdf()[..len_d];
            NodeUpdate {
                p: breach_inner(cdf_d, &all).clamp(0.0, 1.0),
                qhat: breach_inner(&s.cdf()[..len_s], &full_product(&hs, len_s)).clamp(0.0, 1.0),
                full_default: breach_inner(cdf_d, &full_product(&gts, len_d)).clamp(0.0, 1.0),
                loo: loo.iter().map(|x| breach_inner(cdf_d, x).clamp(0.0, 1.0)).collect(),
            }
        })
        .collect();

    let mut next = state.clone();
    next.n = state.n + 1;
    for (v, u) in updates.iter().enumerate() {
        next.p[v] = u.p;
        next.qhat[v] = u.qhat;
        next.q[v] = (1.0 - u.p - (1.0 - u.qhat) * (1.0 - u.full_default)).clamp(0.0, 1.0 - u.p);
        for (i, &e) in g.in_edges(v).iter().enumerate() {
            next.ptilde[e] = u.loo[i];
        }
    }
    for (e, edge) in g.edges().iter().enumerate() {
        let (w, v) = (edge.debtor as usize, edge.creditor as usize);
        let t = state.t[e] + (next.p[w] - state.p[w]) * (1.0 - state.qhat[v]);
        next.t[e] = t.clamp(0.0, next.p[w]);
    }
    next
}

/// Result of [`fixed_lti_run`].
#[derive(Debug, Clone, Serialize)]
pub struct FixedOutcome {
    pub state: FixedLtiState,
    pub iterations: usize,
    pub converged: bool,
    pub expected_defaults: f64,
    pub expected_stressed: f64,
}

/// Iterates from the day-0 state until the sup-norm change of all tables
/// drops below `tol` or `max_iter` steps were taken.
pub fn fixed_lti_run(model: &FixedLtiModel, tol: f64, max_iter: usize) -> FixedOutcome {
    let mut state = FixedLtiState::initial(model);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let next = fixed_lti_step(&state, model);
        iterations += 1;
        let change = next.distance(&state);
        state = next;
        if change < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("fixed-skeleton mapping did not converge within {max_iter} steps");
    }
    FixedOutcome {
        expected_defaults: state.expected_defaults(),
        expected_stressed: state.expected_stressed(),
        state,
        iterations,
        converged,
    }
}
