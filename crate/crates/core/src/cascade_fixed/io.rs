use std::io::Read;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FixedError, FixedLtiModel};
use crate::dists::{BufferLaw, ExposureLaw, Grid, GridPmf, LogNormal};
use crate::ensemble::conditional_stress_atom;
use crate::netgen::Skeleton;

/// One row of the node-law file. `q0` is the unconditional probability of a
/// zero stress buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeLawRow {
    pub v: usize,
    pub p0: f64,
    pub q0: f64,
    pub delta_mean: f64,
    pub delta_std: f64,
    pub sigma_mean: f64,
    pub sigma_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeLawRow {
    pub v: usize,
    pub w: usize,
    pub omega_mean: f64,
    pub omega_std: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>, R: Read>(input: R) -> Result<Vec<T>, FixedError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    reader.deserialize().map(|r| r.map_err(FixedError::from)).collect()
}

pub fn read_node_laws<R: Read>(input: R) -> Result<Vec<NodeLawRow>, FixedError> {
    read_rows(input)
}

pub fn read_edge_laws<R: Read>(input: R) -> Result<Vec<EdgeLawRow>, FixedError> {
    read_rows(input)
}

fn write_rows<T: Serialize, W: std::io::Write>(rows: &[T], out: W) -> Result<(), FixedError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_node_laws<W: std::io::Write>(rows: &[NodeLawRow], out: W) -> Result<(), FixedError> {
    write_rows(rows, out)
}

pub fn write_edge_laws<W: std::io::Write>(rows: &[EdgeLawRow], out: W) -> Result<(), FixedError> {
    write_rows(rows, out)
}

fn buffer(atom0: f64, mean: f64, std: f64, grid: Grid) -> Result<BufferLaw, FixedError> {
    if mean <= 0.0 || atom0 >= 1.0 {
        return Ok(BufferLaw::new(1.0, &GridPmf::point(grid, 1))?);
    }
    let (law, folded) = BufferLaw::lognormal_folded(atom0, mean, std, grid)?;
    if folded > 0.0 {
        log::debug!("buffer tail mass {folded:e} folded into the top cell");
    }
    Ok(law)
}

/// Grid whose span covers the `1 - 1e-6` quantile of every buffer.
pub fn grid_for_rows(nodes: &[NodeLawRow], cells: usize) -> Result<Grid, FixedError> {
    let mut top: f64 = 0.0;
    for r in nodes {
        for (m, s) in [(r.delta_mean, r.delta_std), (r.sigma_mean, r.sigma_std)] {
            if m > 0.0 {
                top = top.max(LogNormal::new(m, s)?.quantile(1.0 - 1e-6));
            }
        }
    }
    if top <= 0.0 {
        top = 1.0;
    }
    Ok(Grid::new(top / (cells as f64 - 1.5), cells)?)
}

/// Builds log-normal-with-atom laws for every node and edge of `skeleton`.
pub fn model_from_rows(
    skeleton: Arc<Skeleton>,
    nodes: &[NodeLawRow],
    edges: &[EdgeLawRow],
    grid: Grid,
    lambda: f64,
) -> Result<FixedLtiModel, FixedError> {
    let n = skeleton.node_count();
    let mut node_laws: Vec<Option<(Arc<BufferLaw>, Arc<BufferLaw>)>> = vec![None; n];
    for r in nodes {
        if r.v >= n {
            return Err(FixedError::Format(format!("node {} outside skeleton of {n} nodes", r.v)));
        }
        if !(0.0..=1.0).contains(&r.p0) || !(0.0..=1.0).contains(&r.q0) || r.p0 + r.q0 > 1.0 + 1e-12 {
            return Err(FixedError::Format(format!("node {}: invalid atoms p0={} q0={}", r.v, r.p0, r.q0)));
        }
        let d = buffer(r.p0, r.delta_mean, r.delta_std, grid)?;
        let s = buffer(conditional_stress_atom(r.p0, r.q0), r.sigma_mean, r.sigma_std, grid)?;
        node_laws[r.v] = Some((Arc::new(d), Arc::new(s)));
    }
    let mut edge_laws: Vec<Option<Arc<ExposureLaw>>> = vec![None; skeleton.edge_count()];
    for r in edges {
        let e = (r.v < n)
            .then(|| skeleton.out_edges(r.v).iter().copied().find(|&e| skeleton.edge(e).creditor as usize == r.w))
            .flatten()
            .ok_or_else(|| FixedError::Format(format!("edge {} -> {} not in skeleton", r.v, r.w)))?;
        edge_laws[e] = Some(Arc::new(ExposureLaw::lognormal(r.omega_mean, r.omega_std, grid)?));
    }
    let mut default = Vec::with_capacity(n);
    let mut stress = Vec::with_capacity(n);
    for (v, laws) in node_laws.into_iter().enumerate() {
        let (d, s) = laws.ok_or_else(|| FixedError::Format(format!("no law for node {v}")))?;
        default.push(d);
        stress.push(s);
    }
    let exposure = edge_laws
        .into_iter()
        .enumerate()
        .map(|(e, w)| {
            let edge = skeleton.edge(e);
            w.ok_or_else(|| FixedError::Format(format!("no law for edge {} -> {}", edge.debtor, edge.creditor)))
        })
        .collect::<Result<_, _>>()?;
    FixedLtiModel::new(skeleton, default, stress, exposure, lambda)
}
