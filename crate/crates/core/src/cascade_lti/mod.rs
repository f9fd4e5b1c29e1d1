//! Cascade mapping on random skeletons.
//!
//! Probabilities are tabulated by node type `(j, k)` and edge type `(k, j)`
//! and iterated to their fixed point. Each step mixes exposure laws into the
//! shock densities `g`, `h` and `g~`, raises them to convolution powers and
//! integrates them against the buffer CDFs.

mod prepared;

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::dists::fft::real_spectrum;
use crate::dists::kernel::{breach_inner, sat_power};
use crate::dists::{threshold_prob_spectral, BufferLaw, GridPmf};
use crate::ensemble::{Ensemble, EnsembleError};
use crate::netgen::{check_consistency, EdgeTypeLaw, NodeTypeLaw};
use prepared::{accumulate, ExposureCache, ScaledExposure};

/// Largest violation of the type-law consistency conditions accepted.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum LtiError {
    #[error("type laws are inconsistent (violation {0:e})")]
    Inconsistent(f64),
    #[error("node and edge laws have caps {0} and {1}")]
    CapMismatch(usize, usize),
    #[error("lambda {0} outside [0, 1]")]
    BadLambda(f64),
    #[error("negative mixture weight {weight:e} for edge type ({k}, {j})")]
    NegativeWeight { k: usize, j: usize, weight: f64 },
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

/// How convolution powers are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Route {
    /// Exact sums truncated just above the largest buffer, with overflow
    /// collected in the top cell.
    #[default]
    Saturating,
    /// Componentwise powers of length-`M` spectra and the inner product
    /// `(1/M) <F(D), g^j>`; mass beyond the grid wraps around.
    Spectral,
}

/// Type laws, buffer and exposure laws, and the stress response.
#[derive(Debug, Clone)]
pub struct LtiModel {
    pub nodes: NodeTypeLaw,
    pub edges: EdgeTypeLaw,
    pub ensemble: Arc<Ensemble>,
    pub lambda: f64,
}

impl LtiModel {
    /// Checks consistency of the type laws and that every type with positive
    /// probability has its laws.
    pub fn new(nodes: NodeTypeLaw, edges: EdgeTypeLaw, ensemble: Arc<Ensemble>, lambda: f64) -> Result<Self, LtiError> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(LtiError::BadLambda(lambda));
        }
        if nodes.k_max() != edges.k_max() {
            return Err(LtiError::CapMismatch(nodes.k_max(), edges.k_max()));
        }
        let report = check_consistency(&nodes, &edges, CONSISTENCY_TOLERANCE);
        if !report.consistent {
            return Err(LtiError::Inconsistent(report.max_violation));
        }
        let d = nodes.k_max() + 1;
        for a in 0..d {
            for b in 0..d {
                if nodes.get(a, b) > 0.0 {
                    ensemble.default_law(a, b)?;
                    ensemble.stress_law(a, b)?;
                }
                if edges.get(a, b) > 0.0 {
                    ensemble.exposure_law(a, b)?;
                }
            }
        }
        Ok(LtiModel { nodes, edges, ensemble, lambda })
    }

    pub fn k_max(&self) -> usize {
        self.nodes.k_max()
    }
}

/// Probability tables after `n` steps.
///
/// Node tables `p`, `q`, `ptilde`, `qhat` are indexed `j * (K + 1) + k`;
/// the edge table `t` is indexed `k * (K + 1) + j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LtiState {
    pub n: usize,
    pub k_max: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub ptilde: Vec<f64>,
    pub qhat: Vec<f64>,
    pub t: Vec<f64>,
}

impl LtiState {
    fn idx(&self, a: usize, b: usize) -> usize {
        a * (self.k_max + 1) + b
    }

    pub fn p(&self, j: usize, k: usize) -> f64 {
        self.p[self.idx(j, k)]
    }

    pub fn q(&self, j: usize, k: usize) -> f64 {
        self.q[self.idx(j, k)]
    }

    pub fn ptilde(&self, j: usize, k: usize) -> f64 {
        self.ptilde[self.idx(j, k)]
    }

    pub fn qhat(&self, j: usize, k: usize) -> f64 {
        self.qhat[self.idx(j, k)]
    }

    pub fn t(&self, k: usize, j: usize) -> f64 {
        self.t[self.idx(k, j)]
    }

    /// `p_k = sum_j p_jk P(j | k)`; zero where `P+_k = 0`.
    pub fn p_by_out_degree(&self, nodes: &NodeTypeLaw) -> Vec<f64> {
        let d = self.k_max + 1;
        let out = nodes.out_marginal();
        (0..d)
            .map(|k| {
                if out[k] > 0.0 {
                    (0..d).map(|j| self.p(j, k) * nodes.get(j, k)).sum::<f64>() / out[k]
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn by_in_degree(&self, table: &[f64], nodes: &NodeTypeLaw) -> Vec<f64> {
        let d = self.k_max + 1;
        let inm = nodes.in_marginal();
        (0..d)
            .map(|j| {
                if inm[j] > 0.0 {
                    (0..d).map(|k| table[j * d + k] * nodes.get(j, k)).sum::<f64>() / inm[j]
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `p~_j = sum_k p~_jk P(k | j)`.
    pub fn ptilde_by_in_degree(&self, nodes: &NodeTypeLaw) -> Vec<f64> {
        self.by_in_degree(&self.ptilde, nodes)
    }

    /// `q^_j = sum_k q^_jk P(k | j)`.
    pub fn qhat_by_in_degree(&self, nodes: &NodeTypeLaw) -> Vec<f64> {
        self.by_in_degree(&self.qhat, nodes)
    }

    /// `sum_jk P_jk p_jk`.
    pub fn default_fraction(&self, nodes: &NodeTypeLaw) -> f64 {
        self.weighted(&self.p, nodes)
    }

    /// `sum_jk P_jk q_jk`.
    pub fn stress_fraction(&self, nodes: &NodeTypeLaw) -> f64 {
        self.weighted(&self.q, nodes)
    }

    fn weighted(&self, table: &[f64], nodes: &NodeTypeLaw) -> f64 {
        let d = self.k_max + 1;
        (0..d * d).map(|i| table[i] * nodes.get(i / d, i % d)).sum()
    }

    fn distance(&self, other: &LtiState) -> f64 {
        [(&self.p, &other.p), (&self.q, &other.q), (&self.ptilde, &other.ptilde), (&self.qhat, &other.qhat), (&self.t, &other.t)]
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Day-0 tables from the buffer atoms: `p~ = p`, `q = q^ (1 - p)` and
/// `t_kj = p_k`.
pub fn init_state(model: &LtiModel) -> Result<LtiState, LtiError> {
    let k_max = model.k_max();
    let d = k_max + 1;
    let mut p = vec![0.0; d * d];
    let mut qhat = vec![0.0; d * d];
    for j in 0..d {
        for k in 0..d {
            if let (Ok(dl), Ok(sl)) = (model.ensemble.default_law(j, k), model.ensemble.stress_law(j, k)) {
                p[j * d + k] = dl.atom0();
                qhat[j * d + k] = sl.atom0();
            }
        }
    }
    let q = p.iter().zip(&qhat).map(|(p, qh)| qh * (1.0 - p)).collect();
    let mut state = LtiState { n: 0, k_max, ptilde: p.clone(), p, q, qhat, t: vec![0.0; d * d] };
    let pk = state.p_by_out_degree(&model.nodes);
    for k in 0..d {
        for j in 0..d {
            state.t[k * d + j] = pk[k];
        }
    }
    Ok(state)
}

/// Shock densities of one step: `g_j`, `h_k` and `g~_j` on the full grid.
#[derive(Debug, Clone)]
pub struct Densities {
    pub g: Vec<GridPmf>,
    pub h: Vec<GridPmf>,
    pub gtilde: Vec<GridPmf>,
}

/// Model data prepared for repeated steps.
struct Prepared<'a> {
    model: &'a LtiModel,
    route: Route,
    len: usize,
    q_k_given_j: Vec<f64>,
    q_j_given_k: Vec<f64>,
    exposures: Vec<Option<Arc<ScaledExposure>>>,
}

impl<'a> Prepared<'a> {
    fn new(model: &'a LtiModel, route: Route, full_grid: bool) -> Result<Self, LtiError> {
        let d = model.k_max() + 1;
        let m = model.ensemble.grid().cells();
        let len = if full_grid || route == Route::Spectral {
            m
        } else {
            let mut top = 1;
            for j in 0..d {
                for k in 0..d {
                    if model.nodes.get(j, k) > 0.0 {
                        top = top.max(model.ensemble.default_law(j, k)?.support_end());
                        top = top.max(model.ensemble.stress_law(j, k)?.support_end());
                    }
                }
            }
            (top + 1).min(m)
        };
        let (q_in, q_out) = (model.edges.in_marginal(), model.edges.out_marginal());
        let mut q_k_given_j = vec![0.0; d * d];
        let mut q_j_given_k = vec![0.0; d * d];
        let mut exposures = vec![None; d * d];
        let mut cache = ExposureCache::default();
        for k in 0..d {
            for j in 0..d {
                let qkj = model.edges.get(k, j);
                if qkj > 0.0 {
                    q_k_given_j[j * d + k] = qkj / q_in[j];
                    q_j_given_k[k * d + j] = qkj / q_out[k];
                    let law = model.ensemble.exposure_law(k, j)?;
                    exposures[k * d + j] = Some(cache.get(law, model.lambda, len));
                }
            }
        }
        Ok(Prepared { model, route, len, q_k_given_j, q_j_given_k, exposures })
    }

    fn delta0(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len];
        v[0] = 1.0;
        v
    }

    /// `g_j` and `g~_j` from the step-`n` out-degree marginals and `t`.
    fn g_mixtures(&self, j: usize, pk: &[f64], state: &LtiState) -> Result<(Vec<f64>, Vec<f64>), LtiError> {
        let d = self.model.k_max() + 1;
        let mut g = vec![0.0; self.len];
        let mut gt = vec![0.0; self.len];
        let mut atom = 0.0;
        for k in 0..d {
            let w = self.q_k_given_j[j * d + k];
            let Some(x) = (w > 0.0).then(|| self.exposures[k * d + j].as_ref()).flatten() else {
                continue;
            };
            let t = state.t(k, j);
            let reduced = pk[k] - t;
            if reduced < -1e-12 {
                return Err(LtiError::NegativeWeight { k, j, weight: reduced });
            }
            atom += w * (1.0 - pk[k]);
            accumulate(&mut g, w * t, &x.full);
            accumulate(&mut g, w * reduced.max(0.0), &x.reduced);
            accumulate(&mut gt, w * pk[k], &x.full);
        }
        g[0] += atom;
        gt[0] += atom;
        if atom == 0.0 && g.iter().all(|&x| x == 0.0) {
            return Ok((self.delta0(), self.delta0()));
        }
        Ok((g, gt))
    }

    /// `h_k` from the step-`n` in-degree marginals `p~_j`, `q^_j`.
    fn h_mixture(&self, k: usize, ptj: &[f64], qhj: &[f64]) -> Vec<f64> {
        let d = self.model.k_max() + 1;
        let mut h = vec![0.0; self.len];
        let mut atom = 0.0;
        for j in 0..d {
            let w = self.q_j_given_k[k * d + j];
            let Some(x) = (w > 0.0).then(|| self.exposures[k * d + j].as_ref()).flatten() else {
                continue;
            };
            atom += w * (1.0 - qhj[j]) * (1.0 - ptj[j]);
            accumulate(&mut h, w * ptj[j], &x.full);
            accumulate(&mut h, w * qhj[j] * (1.0 - ptj[j]), &x.recalled);
        }
        h[0] += atom;
        if h.iter().all(|&x| x == 0.0) {
            return self.delta0();
        }
        h
    }

    /// `<F, m^{*n}>` for each buffer law in `laws`.
    fn breach(&self, mixture: &[f64], n: usize, laws: &[Option<&BufferLaw>]) -> Vec<f64> {
        match self.route {
            Route::Saturating => {
                let pw = sat_power(mixture, n);
                laws.iter().map(|l| l.map_or(0.0, |l| breach_inner(&l.cdf()[..self.len], &pw))).collect()
            }
            Route::Spectral => {
                let exp = n as i32;
                let spec: Vec<Complex64> = real_spectrum(mixture, self.len).into_iter().map(|z| z.powi(exp)).collect();
                laws.iter()
                    .map(|l| l.map_or(0.0, |l| threshold_prob_spectral(l, &spec).expect("spectrum has grid length")))
                    .collect()
            }
        }
    }

    fn step(&self, state: &LtiState) -> Result<LtiState, LtiError> {
        let model = self.model;
        let d = model.k_max() + 1;
        let ens = &model.ensemble;
        let pk = state.p_by_out_degree(&model.nodes);
        let ptj = state.ptilde_by_in_degree(&model.nodes);
        let qhj = state.qhat_by_in_degree(&model.nodes);
        let present = |j: usize, k: usize| model.nodes.get(j, k) > 0.0;

        // rows over j: p, p~ and the full-exposure default probability
        let rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..d)
            .into_par_iter()
            .map(|j| {
                let laws: Vec<Option<&BufferLaw>> =
                    (0..d).map(|k| if present(j, k) { ens.default_law(j, k).ok() } else { None }).collect();
                if j == 0 {
                    let atoms: Vec<f64> = laws.iter().map(|l| l.map_or(0.0, |l| l.atom0())).collect();
                    return Ok((atoms.clone(), atoms.clone(), atoms));
                }
                let (g, gt) = self.g_mixtures(j, &pk, state)?;
                Ok((self.breach(&g, j, &laws), self.breach(&g, j - 1, &laws), self.breach(&gt, j, &laws)))
            })
            .collect::<Result<_, LtiError>>()?;

        let cols: Vec<Vec<f64>> = (0..d)
            .into_par_iter()
            .map(|k| {
                let laws: Vec<Option<&BufferLaw>> =
                    (0..d).map(|j| if present(j, k) { ens.stress_law(j, k).ok() } else { None }).collect();
                if k == 0 {
                    return laws.iter().map(|l| l.map_or(0.0, |l| l.atom0())).collect();
                }
                let h = self.h_mixture(k, &ptj, &qhj);
                self.breach(&h, k, &laws)
            })
            .collect();

        let mut next = LtiState {
            n: state.n + 1,
            k_max: state.k_max,
            p: vec![0.0; d * d],
            q: vec![0.0; d * d],
            ptilde: vec![0.0; d * d],
            qhat: vec![0.0; d * d],
            t: vec![0.0; d * d],
        };
        for j in 0..d {
            for k in 0..d {
                let i = j * d + k;
                let p = rows[j].0[k].clamp(0.0, 1.0);
                let qh = cols[k][j].clamp(0.0, 1.0);
                let x = rows[j].2[k].clamp(0.0, 1.0);
                next.p[i] = p;
                next.ptilde[i] = rows[j].1[k].clamp(0.0, 1.0);
                next.qhat[i] = qh;
                next.q[i] = (1.0 - p - (1.0 - qh) * (1.0 - x)).clamp(0.0, 1.0 - p);
            }
        }
        let pk_next = next.p_by_out_degree(&model.nodes);
        for k in 0..d {
            for j in 0..d {
                let i = k * d + j;
                let t = state.t[i] + (pk_next[k] - pk[k]) * (1.0 - qhj[j]);
                next.t[i] = t.clamp(0.0, pk_next[k]);
            }
        }
        Ok(next)
    }
}

/// The densities `g_j`, `h_k`, `g~_j` built from `state`, on the full grid.
pub fn build_densities(state: &LtiState, model: &LtiModel) -> Result<Densities, LtiError> {
    let prep = Prepared::new(model, Route::Saturating, true)?;
    let d = model.k_max() + 1;
    let grid = model.ensemble.grid();
    let pk = state.p_by_out_degree(&model.nodes);
    let ptj = state.ptilde_by_in_degree(&model.nodes);
    let qhj = state.qhat_by_in_degree(&model.nodes);
    let (mut g, mut gtilde, mut h) = (Vec::with_capacity(d), Vec::with_capacity(d), Vec::with_capacity(d));
    for j in 0..d {
        let (a, b) = prep.g_mixtures(j, &pk, state)?;
        g.push(GridPmf::from_raw(grid, a));
        gtilde.push(GridPmf::from_raw(grid, b));
    }
    for k in 0..d {
        h.push(GridPmf::from_raw(grid, prep.h_mixture(k, &ptj, &qhj)));
    }
    Ok(Densities { g, h, gtilde })
}

/// One application of the cascade mapping.
pub fn lti_step(state: &LtiState, model: &LtiModel) -> Result<LtiState, LtiError> {
    Prepared::new(model, Route::Saturating, false)?.step(state)
}

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LtiOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub route: Route,
}

impl Default for LtiOptions {
    fn default() -> Self {
        LtiOptions { tol: 1e-8, max_iter: 500, route: Route::Saturating }
    }
}

/// Result of [`iterate_to_fixed_point`].
#[derive(Debug, Clone, Serialize)]
pub struct LtiOutcome {
    pub state: LtiState,
    pub iterations: usize,
    pub converged: bool,
    pub default_frac: f64,
    pub stress_frac: f64,
}

impl LtiOutcome {
    /// `N sum_jk P_jk p_jk`.
    pub fn expected_defaults(&self, n: usize) -> f64 {
        n as f64 * self.default_frac
    }

    /// `N sum_jk P_jk q_jk`.
    pub fn expected_stressed(&self, n: usize) -> f64 {
        n as f64 * self.stress_frac
    }
}

/// Iterates from the day-0 state until the sup-norm change of all tables
/// drops below `tol` or `max_iter` steps were taken.
pub fn iterate_to_fixed_point(model: &LtiModel, opts: LtiOptions) -> Result<LtiOutcome, LtiError> {
    let prep = Prepared::new(model, opts.route, false)?;
    let mut state = init_state(model)?;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let next = prep.step(&state)?;
        iterations += 1;
        let change = next.distance(&state);
        state = next;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("cascade mapping did not converge within {} steps", opts.max_iter);
    }
    Ok(LtiOutcome {
        default_frac: state.default_fraction(&model.nodes),
        stress_frac: state.stress_fraction(&model.nodes),
        state,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dists::{ExposureLaw, Grid};

    fn grid() -> Grid {
        Grid::new(1.0, 64).unwrap()
    }

    fn single_type(p0: f64, delta: f64, sigma: f64, omega: f64, lambda: f64) -> LtiModel {
        let nodes = NodeTypeLaw::from_triples(1, &[(1, 1, 1.0)]).unwrap();
        let edges = EdgeTypeLaw::from_triples(1, &[(1, 1, 1.0)]).unwrap();
        let ens = Ensemble::uniform(
            1,
            BufferLaw::deterministic(p0, delta, grid()).unwrap(),
            BufferLaw::deterministic(0.0, sigma, grid()).unwrap(),
            ExposureLaw::deterministic(omega, grid()).unwrap(),
        )
        .unwrap();
        LtiModel::new(nodes, edges, Arc::new(ens), lambda).unwrap()
    }

    #[test]
    fn zero_shock_is_a_fixed_point() {
        let m = single_type(0.0, 2.0, 60.0, 4.0, 0.5);
        let s0 = init_state(&m).unwrap();
        assert!(s0.p.iter().chain(&s0.q).chain(&s0.t).all(|&x| x == 0.0));
        let out = iterate_to_fixed_point(&m, LtiOptions::default()).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        assert_eq!(out.expected_defaults(1000), 0.0);
        let dens = build_densities(&s0, &m).unwrap();
        assert_eq!(dens.g[1].mass(0), 1.0);
        assert_eq!(dens.h[1].mass(0), 1.0);
        assert_eq!(dens.gtilde[1].mass(0), 1.0);
    }

    #[test]
    fn scalar_recursion_on_a_single_type() {
        let p0 = 0.01;
        let m = single_type(p0, 2.0, 60.0, 4.0, 0.7);
        let mut s = init_state(&m).unwrap();
        let mut want = p0;
        for _ in 0..3 {
            s = lti_step(&s, &m).unwrap();
            want = p0 + (1.0 - p0) * want;
            assert!((s.p(1, 1) - want).abs() < 1e-14, "{} vs {want}", s.p(1, 1));
            assert_eq!(s.qhat(1, 1), 0.0);
        }
    }

    #[test]
    fn uniform_initial_default_marginal() {
        let nodes = NodeTypeLaw::poisson(3.0, 12).unwrap();
        let edges = EdgeTypeLaw::independent(&nodes).unwrap();
        let ens = Ensemble::uniform(
            12,
            BufferLaw::deterministic(0.01, 5.0, grid()).unwrap(),
            BufferLaw::deterministic(0.0, 5.0, grid()).unwrap(),
            ExposureLaw::deterministic(1.0, grid()).unwrap(),
        )
        .unwrap();
        let m = LtiModel::new(nodes, edges, Arc::new(ens), 0.5).unwrap();
        let s = init_state(&m).unwrap();
        for pk in s.p_by_out_degree(&m.nodes) {
            assert!((pk - 0.01).abs() < 1e-15);
        }
        assert!((s.t(3, 7) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn isolated_types_keep_their_atoms() {
        let nodes = NodeTypeLaw::from_triples(1, &[(0, 0, 0.5), (1, 1, 0.5)]).unwrap();
        let edges = EdgeTypeLaw::from_triples(1, &[(1, 1, 1.0)]).unwrap();
        let ens = Ensemble::uniform(
            1,
            BufferLaw::deterministic(0.2, 2.0, grid()).unwrap(),
            BufferLaw::deterministic(0.0, 60.0, grid()).unwrap(),
            ExposureLaw::deterministic(4.0, grid()).unwrap(),
        )
        .unwrap();
        let m = LtiModel::new(nodes, edges, Arc::new(ens), 0.5).unwrap();
        let out = iterate_to_fixed_point(&m, LtiOptions::default()).unwrap();
        assert!((out.state.p(0, 0) - 0.2).abs() < 1e-15);
        assert!(out.state.p(1, 1) > 0.99);
    }

    #[test]
    fn mixture_arithmetic() {
        let m = single_type(0.0, 2.0, 60.0, 8.0, 0.5);
        let mut s = init_state(&m).unwrap();
        s.p[3] = 0.3;
        s.t[3] = 0.2;
        let dens = build_densities(&s, &m).unwrap();
        let g = &dens.g[1];
        assert!((g.mass(0) - 0.7).abs() < 1e-15);
        assert!((g.mass(8) - 0.2).abs() < 1e-15);
        assert!((g.mass(4) - 0.1).abs() < 1e-15);
        assert!((g.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_stress_response_collapses_the_reduced_branch() {
        let m = single_type(0.0, 2.0, 60.0, 8.0, 1.0);
        let mut s = init_state(&m).unwrap();
        s.p[3] = 0.3;
        s.t[3] = 0.2;
        let dens = build_densities(&s, &m).unwrap();
        assert!((dens.g[1].mass(0) - 0.8).abs() < 1e-15);
        s.t[3] = 0.3;
        let dens = build_densities(&s, &m).unwrap();
        assert!((dens.g[1].mass(0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn rejects_inconsistent_laws() {
        let nodes = NodeTypeLaw::from_triples(10, &[(9, 10, 1.0)]).unwrap();
        let edges = EdgeTypeLaw::from_triples(10, &[(10, 9, 1.0)]).unwrap();
        let g = grid();
        let ens = Ensemble::uniform(
            10,
            BufferLaw::deterministic(0.0, 2.0, g).unwrap(),
            BufferLaw::deterministic(0.0, 2.0, g).unwrap(),
            ExposureLaw::deterministic(1.0, g).unwrap(),
        )
        .unwrap();
        assert!(matches!(LtiModel::new(nodes, edges, Arc::new(ens), 0.5), Err(LtiError::Inconsistent(_))));
    }
}
