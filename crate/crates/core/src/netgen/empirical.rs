use super::{EdgeTypeLaw, NetError, NodeTypeLaw, Skeleton};

/// Type laws observed on a skeleton.
#[derive(Debug, Clone)]
pub struct EmpiricalLaws {
    pub node: NodeTypeLaw,
    pub edge: EdgeTypeLaw,
    /// Nodes whose in- or out-degree exceeded the cap and was clamped.
    pub clamped_nodes: usize,
}

/// Fractions of nodes per type `(j, k)` and of edges per type `(k, j)`, with
/// degrees above `k_max` clamped to `k_max`.
pub fn empirical_laws(g: &Skeleton, k_max: usize) -> Result<EmpiricalLaws, NetError> {
    let n = g.node_count();
    let l = g.edge_count();
    if n == 0 || l == 0 {
        return Err(NetError::EmptyGraph);
    }
    let d = k_max + 1;
    let mut p = vec![0.0; d * d];
    let mut clamped_nodes = 0;
    for v in 0..n {
        let (j, k) = g.node_type(v);
        if j > k_max || k > k_max {
            clamped_nodes += 1;
        }
        p[j.min(k_max) * d + k.min(k_max)] += 1.0;
    }
    let mut q = vec![0.0; d * d];
    for e in 0..l {
        let (k, j) = g.edge_type(e);
        q[k.min(k_max) * d + j.min(k_max)] += 1.0;
    }
    if clamped_nodes > 0 {
        log::warn!("{clamped_nodes} nodes have degree above the cap {k_max} and were clamped");
    }
    let node = NodeTypeLaw::new(k_max, normalize(p))?;
    let edge = EdgeTypeLaw::new(k_max, normalize(q))?;
    Ok(EmpiricalLaws { node, edge, clamped_nodes })
}

fn normalize(mut counts: Vec<f64>) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    counts.iter_mut().for_each(|c| *c /= total);
    // absorb the last rounding ulp so the strict unit-sum check holds
    let drift = 1.0 - counts.iter().sum::<f64>();
    if let Some(top) = counts.iter_mut().max_by(|a, b| a.total_cmp(b)) {
        *top += drift;
    }
    counts
}
