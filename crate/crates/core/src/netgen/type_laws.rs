use serde::{Deserialize, Serialize};

use super::NetError;

const SUM_TOLERANCE: f64 = 1e-12;

fn validate(entries: &[f64], what: &str) -> Result<(), NetError> {
    if let Some(bad) = entries.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(NetError::InvalidLaw(format!("{what} has entry {bad}")));
    }
    let total: f64 = entries.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(NetError::InvalidLaw(format!("{what} sums to {total}")));
    }
    Ok(())
}

/// Node-type law `P[j, k]`: probability that a node has in-degree `j` and
/// out-degree `k`, both capped at `k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeTypeLaw {
    k_max: usize,
    p: Vec<f64>,
}

impl NodeTypeLaw {
    /// `p` is dense and row-major in `j`: entry `j * (k_max + 1) + k`.
    pub fn new(k_max: usize, p: Vec<f64>) -> Result<Self, NetError> {
        if p.len() != (k_max + 1) * (k_max + 1) {
            return Err(NetError::InvalidLaw(format!("node law needs {} entries", (k_max + 1).pow(2))));
        }
        validate(&p, "node type law")?;
        Ok(NodeTypeLaw { k_max, p })
    }

    pub fn from_triples(k_max: usize, triples: &[(usize, usize, f64)]) -> Result<Self, NetError> {
        let mut p = vec![0.0; (k_max + 1) * (k_max + 1)];
        for &(j, k, prob) in triples {
            if j > k_max || k > k_max {
                return Err(NetError::InvalidLaw(format!("type ({j}, {k}) exceeds cap {k_max}")));
            }
            p[j * (k_max + 1) + k] += prob;
        }
        Self::new(k_max, p)
    }

    /// Independent in- and out-degrees with the given marginals.
    pub fn product(in_marginal: &[f64], out_marginal: &[f64]) -> Result<Self, NetError> {
        let k_max = in_marginal.len().max(out_marginal.len()).saturating_sub(1);
        let mut p = vec![0.0; (k_max + 1) * (k_max + 1)];
        for (j, pj) in in_marginal.iter().enumerate() {
            for (k, pk) in out_marginal.iter().enumerate() {
                p[j * (k_max + 1) + k] = pj * pk;
            }
        }
        Self::new(k_max, p)
    }

    /// Product of Poisson(`z`) marginals truncated at `k_max` and renormalized.
    pub fn poisson(z: f64, k_max: usize) -> Result<Self, NetError> {
        let m = truncated(poisson_pmf(z, k_max))?;
        Self::product(&m, &m)
    }

    /// Product of Binomial(`trials`, `prob`) marginals, the exact bi-degree
    /// law of a directed Erdos-Renyi graph, truncated at `k_max`.
    pub fn binomial(trials: usize, prob: f64, k_max: usize) -> Result<Self, NetError> {
        let m = truncated(binomial_pmf(trials, prob, k_max))?;
        Self::product(&m, &m)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        if j > self.k_max || k > self.k_max {
            0.0
        } else {
            self.p[j * (self.k_max + 1) + k]
        }
    }

    /// `P^-_j`.
    pub fn in_marginal(&self) -> Vec<f64> {
        let d = self.k_max + 1;
        (0..d).map(|j| self.p[j * d..(j + 1) * d].iter().sum()).collect()
    }

    /// `P^+_k`.
    pub fn out_marginal(&self) -> Vec<f64> {
        let d = self.k_max + 1;
        (0..d).map(|k| (0..d).map(|j| self.p[j * d + k]).sum()).collect()
    }

    pub fn mean_in_degree(&self) -> f64 {
        self.in_marginal().iter().enumerate().map(|(j, p)| j as f64 * p).sum()
    }

    pub fn mean_out_degree(&self) -> f64 {
        self.out_marginal().iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

/// Edge-type law `Q[k, j]`: probability that an edge leaves a debtor of
/// out-degree `k` and enters a creditor of in-degree `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTypeLaw {
    k_max: usize,
    q: Vec<f64>,
}

impl EdgeTypeLaw {
    /// `q` is dense and row-major in `k`: entry `k * (k_max + 1) + j`.
    pub fn new(k_max: usize, q: Vec<f64>) -> Result<Self, NetError> {
        if q.len() != (k_max + 1) * (k_max + 1) {
            return Err(NetError::InvalidLaw(format!("edge law needs {} entries", (k_max + 1).pow(2))));
        }
        validate(&q, "edge type law")?;
        Ok(EdgeTypeLaw { k_max, q })
    }

    pub fn from_triples(k_max: usize, triples: &[(usize, usize, f64)]) -> Result<Self, NetError> {
        let mut q = vec![0.0; (k_max + 1) * (k_max + 1)];
        for &(k, j, prob) in triples {
            if j > k_max || k > k_max {
                return Err(NetError::InvalidLaw(format!("type ({k}, {j}) exceeds cap {k_max}")));
            }
            q[k * (k_max + 1) + j] += prob;
        }
        Self::new(k_max, q)
    }

    /// Non-assortative law `Q = Q+ x Q-` with `Q+_k = k P+_k / z` and
    /// `Q-_j = j P-_j / z`, i.e. uniform stub matching.
    pub fn independent(node_law: &NodeTypeLaw) -> Result<Self, NetError> {
        let z = node_law.mean_in_degree();
        if z <= 0.0 {
            return Err(NetError::InvalidLaw("mean degree is zero".into()));
        }
        let zo = node_law.mean_out_degree();
        let q_out: Vec<f64> = node_law.out_marginal().iter().enumerate().map(|(k, p)| k as f64 * p / zo).collect();
        let q_in: Vec<f64> = node_law.in_marginal().iter().enumerate().map(|(j, p)| j as f64 * p / z).collect();
        let d = node_law.k_max() + 1;
        let mut q = vec![0.0; d * d];
        for k in 0..d {
            for j in 0..d {
                q[k * d + j] = q_out[k] * q_in[j];
            }
        }
        // renormalize away rounding so the strict sum check holds
        let total: f64 = q.iter().sum();
        q.iter_mut().for_each(|x| *x /= total);
        Self::new(node_law.k_max(), q)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        if j > self.k_max || k > self.k_max {
            0.0
        } else {
            self.q[k * (self.k_max + 1) + j]
        }
    }

    /// `Q^+_k = sum_j Q[k, j]`.
    pub fn out_marginal(&self) -> Vec<f64> {
        let d = self.k_max + 1;
        (0..d).map(|k| self.q[k * d..(k + 1) * d].iter().sum()).collect()
    }

    /// `Q^-_j = sum_k Q[k, j]`.
    pub fn in_marginal(&self) -> Vec<f64> {
        let d = self.k_max + 1;
        (0..d).map(|j| (0..d).map(|k| self.q[k * d + j]).sum()).collect()
    }

    /// Pearson correlation of `(k, j)` across edges.
    pub fn assortativity(&self) -> f64 {
        let d = self.k_max + 1;
        let (mut mk, mut mj, mut mkk, mut mjj, mut mkj) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for k in 0..d {
            for j in 0..d {
                let q = self.q[k * d + j];
                let (kf, jf) = (k as f64, j as f64);
                mk += q * kf;
                mj += q * jf;
                mkk += q * kf * kf;
                mjj += q * jf * jf;
                mkj += q * kf * jf;
            }
        }
        let cov = mkj - mk * mj;
        let denom = ((mkk - mk * mk) * (mjj - mj * mj)).sqrt();
        if denom > 0.0 {
            cov / denom
        } else {
            0.0
        }
    }
}

/// Outcome of [`check_consistency`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// Mean in-degree `sum_j j P^-_j`.
    pub z: f64,
    pub max_violation: f64,
}

/// Checks that the mean in- and out-degrees agree and that the edge-law
/// marginals are the size-biased node-law marginals.
pub fn check_consistency(p: &NodeTypeLaw, q: &EdgeTypeLaw, tol: f64) -> ConsistencyReport {
    let z_in = p.mean_in_degree();
    let z_out = p.mean_out_degree();
    let mut violation = (z_in - z_out).abs();
    let z = z_in;
    let d = p.k_max().max(q.k_max()) + 1;
    let (p_in, p_out) = (p.in_marginal(), p.out_marginal());
    let (q_in, q_out) = (q.in_marginal(), q.out_marginal());
    let at = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
    if z > 0.0 {
        for i in 0..d {
            violation = violation.max((at(&q_out, i) - i as f64 * at(&p_out, i) / z).abs());
            violation = violation.max((at(&q_in, i) - i as f64 * at(&p_in, i) / z).abs());
        }
    } else {
        violation = violation.max(1.0);
    }
    ConsistencyReport { consistent: violation <= tol, z, max_violation: violation }
}

fn poisson_pmf(z: f64, k_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    let mut term = (-z).exp();
    for k in 0..=k_max {
        if k > 0 {
            term *= z / k as f64;
        }
        out.push(term);
    }
    out
}

fn binomial_pmf(trials: usize, prob: f64, k_max: usize) -> Vec<f64> {
    let ln_q = (1.0 - prob).ln();
    let ln_p = prob.ln();
    let mut ln_choose = 0.0;
    (0..=k_max)
        .map(|k| {
            if k > trials {
                return 0.0;
            }
            if k > 0 {
                ln_choose += ((trials - k + 1) as f64).ln() - (k as f64).ln();
            }
            (ln_choose + k as f64 * ln_p + (trials - k) as f64 * ln_q).exp()
        })
        .collect()
}

fn truncated(pmf: Vec<f64>) -> Result<Vec<f64>, NetError> {
    let total: f64 = pmf.iter().sum();
    if !(total > 0.0) {
        return Err(NetError::InvalidLaw("degree law has no mass below the cap".into()));
    }
    Ok(pmf.into_iter().map(|p| p / total).collect())
}
