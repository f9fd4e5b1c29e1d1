use serde::Serialize;

use super::{McError, NetworkRealization};

/// Relative slack in buffer comparisons so that a shock equal to its buffer
/// counts as a breach despite rounding in the shock sum.
const TIE_TOLERANCE: f64 = 1e-9;

/// `shock >= buffer` up to rounding.
pub fn breaches(shock: f64, buffer: f64) -> bool {
    shock >= buffer - TIE_TOLERANCE * buffer.abs().max(shock.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Normal,
    Stressed,
    Defaulted,
}

/// How the day-0 state is seeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialShock {
    /// Day-0 defaults and stress are the nodes with zero buffers.
    FromBuffers,
    /// Additionally default the listed nodes on day 0.
    Defaults(Vec<usize>),
}

/// Cascade state after `step` synchronous updates.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeState {
    step: usize,
    forced: Vec<bool>,
    defaulted: Vec<bool>,
    stress_hat: Vec<bool>,
    default_step: Vec<Option<usize>>,
    stress_step: Vec<Option<usize>>,
    xi: Vec<f64>,
    zeta: Vec<f64>,
}

impl CascadeState {
    /// Day-0 state: `D_0`, the stress set `S^_0`, `xi^(0)` and `zeta^(0)`.
    pub fn initial(real: &NetworkRealization, lambda: f64, shock: &InitialShock) -> Result<Self, McError> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(McError::InvalidParameter(format!("lambda {lambda} outside [0, 1]")));
        }
        let n = real.node_count();
        let g = &real.skeleton;
        let mut forced: Vec<bool> = real.delta.iter().map(|&d| d == 0.0).collect();
        if let InitialShock::Defaults(seeds) = shock {
            for &v in seeds {
                if v >= n {
                    return Err(McError::InvalidParameter(format!("seed node {v} out of range")));
                }
                forced[v] = true;
            }
        }
        let defaulted = forced.clone();
        let stress_hat: Vec<bool> = real.sigma.iter().map(|&s| s == 0.0).collect();
        let xi = g.edges().iter().map(|e| if defaulted[e.debtor as usize] { 1.0 } else { 0.0 }).collect();
        let zeta = g
            .edges()
            .iter()
            .map(|e| {
                let w = e.creditor as usize;
                if forced[w] {
                    1.0
                } else if stress_hat[w] {
                    lambda
                } else {
                    0.0
                }
            })
            .collect();
        let first = |hit: &[bool]| hit.iter().map(|&b| b.then_some(0)).collect();
        Ok(CascadeState {
            step: 0,
            default_step: first(&defaulted),
            stress_step: first(&stress_hat),
            forced,
            defaulted,
            stress_hat,
            xi,
            zeta,
        })
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn status(&self, v: usize) -> Status {
        if self.defaulted[v] {
            Status::Defaulted
        } else if self.stress_hat[v] {
            Status::Stressed
        } else {
            Status::Normal
        }
    }

    pub fn statuses(&self) -> Vec<Status> {
        (0..self.defaulted.len()).map(|v| self.status(v)).collect()
    }

    pub fn is_defaulted(&self, v: usize) -> bool {
        self.defaulted[v]
    }

    /// Membership of the stress-breach set, defaulted nodes included.
    pub fn is_stress_breached(&self, v: usize) -> bool {
        self.stress_hat[v]
    }

    pub fn default_step(&self, v: usize) -> Option<usize> {
        self.default_step[v]
    }

    pub fn stress_step(&self, v: usize) -> Option<usize> {
        self.stress_step[v]
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn default_count(&self) -> usize {
        self.defaulted.iter().filter(|&&d| d).count()
    }

    pub fn stress_count(&self) -> usize {
        self.defaulted.iter().zip(&self.stress_hat).filter(|(&d, &s)| s && !d).count()
    }

    fn fractions(&self) -> (f64, f64) {
        let n = self.defaulted.len().max(1) as f64;
        (self.default_count() as f64 / n, self.stress_count() as f64 / n)
    }

    /// One synchronous update in place; returns whether anything changed.
    fn advance(&mut self, real: &NetworkRealization, lambda: f64, shock_in: &mut Vec<f64>) -> bool {
        let g = &real.skeleton;
        let n = self.defaulted.len();
        let next = self.step + 1;

        shock_in.clear();
        shock_in.resize(n, 0.0);
        for (e, edge) in g.edges().iter().enumerate() {
            shock_in[edge.creditor as usize] += real.omega[e] * self.xi[e];
        }

        let mut changed = false;
        let mut new_default = vec![false; n];
        for v in 0..n {
            let d = self.forced[v] || breaches(shock_in[v], real.delta[v]);
            if d && !self.defaulted[v] {
                new_default[v] = true;
                changed = true;
            }
        }

        let mut new_stress = vec![false; n];
        for v in 0..n {
            if self.stress_hat[v] {
                continue;
            }
            let stress: f64 = g.out_edges(v).iter().map(|&e| real.omega[e] * self.zeta[e]).sum();
            if breaches(stress, real.sigma[v]) {
                new_stress[v] = true;
                changed = true;
            }
        }

        // zeta^(n+1) from D_{n+1} without regarding the debtor and S^_{n+1};
        // the leave-one-out shock uses xi^(n), as D_{n+1} does
        for (e, edge) in g.edges().iter().enumerate() {
            let w = edge.creditor as usize;
            let without = self.forced[w] || breaches(shock_in[w] - real.omega[e] * self.xi[e], real.delta[w]);
            let z = if without {
                1.0
            } else if self.stress_hat[w] || new_stress[w] {
                lambda
            } else {
                0.0
            };
            if z != self.zeta[e] {
                self.zeta[e] = z;
                changed = true;
            }
        }

        // xi^(n+1): a newly defaulted debtor hits a creditor already in S^_n
        // with the reduced fraction 1 - lambda
        for (e, edge) in g.edges().iter().enumerate() {
            if new_default[edge.debtor as usize] {
                self.xi[e] = if self.stress_hat[edge.creditor as usize] { 1.0 - lambda } else { 1.0 };
            }
        }

        for v in 0..n {
            if new_default[v] {
                self.defaulted[v] = true;
                self.default_step[v] = Some(next);
            }
            if new_stress[v] {
                self.stress_hat[v] = true;
                self.stress_step[v] = Some(next);
            }
        }

        if changed {
            self.step = next;
        }
        changed
    }
}

/// One synchronous step of the cascade mapping.
pub fn cascade_step(state: &CascadeState, real: &NetworkRealization, lambda: f64) -> CascadeState {
    let mut next = state.clone();
    let mut scratch = Vec::new();
    if !next.advance(real, lambda, &mut scratch) {
        next.step = state.step + 1;
    }
    next
}

/// Final state of a cascade run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeReport {
    /// Last step at which some node changed status.
    pub steps_taken: usize,
    pub default_frac: f64,
    /// Fraction of nodes stressed and not defaulted.
    pub stress_frac: f64,
    /// `(default_frac, stress_frac)` after each step `0..=steps_taken`.
    pub trajectory: Vec<(f64, f64)>,
    pub statuses: Vec<Status>,
}

/// Iterates the cascade mapping to its fixed point.
///
/// # Panics
///
/// If statuses keep changing beyond `2N` steps, which the dynamics rule out.
pub fn run_cascade(real: &NetworkRealization, lambda: f64, shock: &InitialShock) -> Result<CascadeReport, McError> {
    let n = real.node_count();
    let mut state = CascadeState::initial(real, lambda, shock)?;
    let mut trajectory = vec![state.fractions()];
    let mut steps_taken = 0;
    let mut scratch = Vec::new();
    let limit = 2 * n + 2 * real.skeleton.edge_count() + 4;
    let mut counts = (state.default_count(), state.stress_count());
    while state.advance(real, lambda, &mut scratch) {
        let now = (state.default_count(), state.stress_count());
        trajectory.push(state.fractions());
        if now != counts {
            steps_taken = state.step;
        }
        counts = now;
        assert!(state.step <= limit, "cascade failed to reach a fixed point within {limit} steps");
    }
    assert!(steps_taken <= 2 * n.max(1), "cascade took {steps_taken} steps on {n} nodes");
    trajectory.truncate(steps_taken + 1);
    let (default_frac, stress_frac) = state.fractions();
    Ok(CascadeReport { steps_taken, default_frac, stress_frac, trajectory, statuses: state.statuses() })
}
