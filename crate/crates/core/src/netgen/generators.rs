use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::{Edge, NetError, NodeTypeLaw, Skeleton, BALANCE_ATTEMPTS, EDGE_RETRIES};

/// Directed Erdos-Renyi graph: each ordered pair `(v, w)`, `v != w`, is an
/// edge independently with probability `z / (n - 1)`.
///
/// Pairs are enumerated in a fixed order and gaps between successive edges
/// are drawn from a geometric law, so the cost is proportional to the edge
/// count rather than `n^2`.
pub fn poisson_skeleton<R: Rng + ?Sized>(n: usize, z: f64, rng: &mut R) -> Result<Skeleton, NetError> {
    if n < 2 {
        return Ok(Skeleton::empty(n));
    }
    let p = z / (n - 1) as f64;
    if !(p > 0.0 && p < 1.0) {
        return Err(NetError::InvalidParameter(format!("need 0 < z < n - 1, got z = {z}, n = {n}")));
    }
    let gaps = Geometric::new(p).map_err(|e| NetError::InvalidParameter(e.to_string()))?;
    let row = (n - 1) as u64;
    let pairs = n as u64 * row;
    let mut edges = Vec::with_capacity((z * n as f64 * 1.1) as usize + 16);
    let mut idx = gaps.sample(rng);
    while idx < pairs {
        let v = idx / row;
        let r = idx % row;
        let w = if r >= v { r + 1 } else { r };
        edges.push(Edge::new(v as usize, w as usize));
        idx = idx.saturating_add(1).saturating_add(gaps.sample(rng));
    }
    Ok(Skeleton::from_trusted(n, edges))
}

/// Diagnostics of [`configuration_skeleton`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfigurationReport {
    /// Degree sequences drawn until the stub totals balanced.
    pub balance_attempts: usize,
    /// Stubs re-paired to avoid a self-loop or a repeated edge.
    pub rematched: usize,
    /// Edge pairs rewired by a double edge swap.
    pub switched: usize,
    /// Stub pairs discarded after all retries failed.
    pub dropped: usize,
}

/// Directed configuration graph with uniform stub matching.
///
/// Bi-degrees are drawn i.i.d. from `law` until the in- and out-stub totals
/// agree; in-stubs are then shuffled and paired with out-stubs. A pairing
/// that would create a self-loop or a repeated edge is redrawn among the
/// unpaired in-stubs, then repaired by swapping with an earlier edge, and
/// finally dropped.
pub fn configuration_skeleton<R: Rng + ?Sized>(
    law: &NodeTypeLaw,
    n: usize,
    rng: &mut R,
) -> Result<(Skeleton, ConfigurationReport), NetError> {
    let d = law.k_max() + 1;
    let weights: Vec<f64> = (0..d * d).map(|i| law.get(i / d, i % d)).collect();
    let types = WeightedIndex::new(&weights).map_err(|e| NetError::InvalidLaw(e.to_string()))?;
    let mut report = ConfigurationReport::default();

    let mut degrees = vec![(0usize, 0usize); n];
    loop {
        if report.balance_attempts == BALANCE_ATTEMPTS {
            return Err(NetError::Unbalanced(BALANCE_ATTEMPTS));
        }
        report.balance_attempts += 1;
        let mut balance: i64 = 0;
        for slot in degrees.iter_mut() {
            let t = types.sample(rng);
            *slot = (t / d, t % d);
            balance += slot.1 as i64 - slot.0 as i64;
        }
        if balance == 0 {
            break;
        }
    }

    let mut out_stubs = Vec::new();
    let mut in_stubs = Vec::new();
    for (v, &(j, k)) in degrees.iter().enumerate() {
        out_stubs.extend(std::iter::repeat_n(v as u32, k));
        in_stubs.extend(std::iter::repeat_n(v as u32, j));
    }
    in_stubs.shuffle(rng);

    let stubs = out_stubs.len();
    let mut edges: Vec<Edge> = Vec::with_capacity(stubs);
    let mut present: HashSet<Edge> = HashSet::with_capacity(stubs);
    let valid = |present: &HashSet<Edge>, v: u32, w: u32| v != w && !present.contains(&Edge { debtor: v, creditor: w });

    for i in 0..stubs {
        let v = out_stubs[i];
        if !valid(&present, v, in_stubs[i]) {
            let mut fixed = false;
            for _ in 0..EDGE_RETRIES {
                let r = rng.random_range(i..stubs);
                if valid(&present, v, in_stubs[r]) {
                    in_stubs.swap(i, r);
                    report.rematched += 1;
                    fixed = true;
                    break;
                }
            }
            if !fixed {
                let w = in_stubs[i];
                let mut switched = false;
                for _ in 0..EDGE_RETRIES {
                    if edges.is_empty() {
                        break;
                    }
                    let r = rng.random_range(0..edges.len());
                    let Edge { debtor: a, creditor: b } = edges[r];
                    if valid(&present, a, w) && valid(&present, v, b) && (a, w) != (v, b) {
                        present.remove(&edges[r]);
                        edges[r] = Edge { debtor: a, creditor: w };
                        present.insert(edges[r]);
                        let e = Edge { debtor: v, creditor: b };
                        present.insert(e);
                        edges.push(e);
                        report.switched += 1;
                        switched = true;
                        break;
                    }
                }
                if !switched {
                    report.dropped += 1;
                }
                continue;
            }
        }
        let e = Edge { debtor: v, creditor: in_stubs[i] };
        present.insert(e);
        edges.push(e);
    }
    if report.dropped > 0 {
        log::warn!("configuration graph dropped {} of {} stub pairs", report.dropped, stubs);
    }
    Ok((Skeleton::from_trusted(n, edges), report))
}

/// Directed preferential attachment grown from a 3-cycle until `n_target`
/// nodes exist.
///
/// Each step applies one rule: with probability `alpha` a new node lends to
/// an existing node chosen with probability proportional to `j + delta_in`;
/// with probability `gamma` a new node borrows from an existing node chosen
/// proportionally to `k + delta_out`; otherwise an edge is added between two
/// existing nodes chosen by those two rules. Growth runs on the multigraph,
/// so self-loops and repeated edges from the last rule count towards the
/// attachment degrees; the returned skeleton keeps each distinct non-loop
/// edge once.
pub fn preferential_attachment<R: Rng + ?Sized>(
    n_target: usize,
    alpha: f64,
    gamma: f64,
    delta_in: f64,
    delta_out: f64,
    rng: &mut R,
) -> Result<Skeleton, NetError> {
    if !(alpha >= 0.0 && gamma >= 0.0 && alpha + gamma <= 1.0 + 1e-12) {
        return Err(NetError::InvalidParameter(format!("alpha = {alpha}, gamma = {gamma}")));
    }
    if !(delta_in > 0.0 && delta_out > 0.0) {
        return Err(NetError::InvalidParameter("attachment offsets must be positive".into()));
    }
    let seed = [Edge::new(0, 1), Edge::new(1, 2), Edge::new(2, 0)];
    if n_target <= 3 {
        let n = n_target;
        let edges = if n == 3 { seed.to_vec() } else { Vec::new() };
        return Ok(Skeleton::from_trusted(n, edges));
    }
    let mut edges: Vec<Edge> = seed.to_vec();
    let mut n = 3usize;

    // proportional to in-degree + delta_in: the creditor of a uniform edge
    // with probability L / (L + delta_in n), a uniform node otherwise
    let pick_creditor = |rng: &mut R, edges: &[Edge], n: usize| -> u32 {
        let l = edges.len() as f64;
        if rng.random::<f64>() * (l + delta_in * n as f64) < l {
            edges[rng.random_range(0..edges.len())].creditor
        } else {
            rng.random_range(0..n) as u32
        }
    };
    let pick_debtor = |rng: &mut R, edges: &[Edge], n: usize| -> u32 {
        let l = edges.len() as f64;
        if rng.random::<f64>() * (l + delta_out * n as f64) < l {
            edges[rng.random_range(0..edges.len())].debtor
        } else {
            rng.random_range(0..n) as u32
        }
    };

    while n < n_target {
        let u: f64 = rng.random();
        let e = if u < alpha {
            let w = pick_creditor(rng, &edges, n);
            n += 1;
            Edge { debtor: (n - 1) as u32, creditor: w }
        } else if u < 1.0 - gamma {
            let v = pick_debtor(rng, &edges, n);
            Edge { debtor: v, creditor: pick_creditor(rng, &edges, n) }
        } else {
            let w = pick_debtor(rng, &edges, n);
            n += 1;
            Edge { debtor: w, creditor: (n - 1) as u32 }
        };
        edges.push(e);
    }
    let mut present = HashSet::with_capacity(edges.len());
    edges.retain(|e| e.debtor != e.creditor && present.insert(*e));
    Ok(Skeleton::from_trusted(n, edges))
}

/// An induced subgraph with its map back to the parent's node ids.
#[derive(Debug, Clone)]
pub struct Subnetwork {
    pub skeleton: Skeleton,
    /// `ids[new] = old`, increasing.
    pub ids: Vec<usize>,
}

/// Induced subgraph on the `m` nodes of largest total degree `j + k`, ties
/// broken by smaller id. Kept nodes are relabeled in their original order.
pub fn top_connected_subnetwork(g: &Skeleton, m: usize) -> Result<Subnetwork, NetError> {
    let n = g.node_count();
    if m > n {
        return Err(NetError::InvalidParameter(format!("cannot keep {m} of {n} nodes")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.in_degree(v) + g.out_degree(v)), v));
    let mut ids: Vec<usize> = order[..m].to_vec();
    ids.sort_unstable();
    let mut relabel = vec![u32::MAX; n];
    for (new, &old) in ids.iter().enumerate() {
        relabel[old] = new as u32;
    }
    let edges = g
        .edges()
        .iter()
        .filter_map(|e| {
            let (a, b) = (relabel[e.debtor as usize], relabel[e.creditor as usize]);
            (a != u32::MAX && b != u32::MAX).then_some(Edge { debtor: a, creditor: b })
        })
        .collect();
    Ok(Subnetwork { skeleton: Skeleton::from_trusted(m, edges), ids })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn poisson_vanishing_density_is_empty() {
        let g = poisson_skeleton(100, 1e-9, &mut stream(1, 0)).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn poisson_pairs_are_valid() {
        let g = poisson_skeleton(300, 4.0, &mut stream(2, 0)).unwrap();
        assert!(Skeleton::new(300, g.edges().to_vec()).is_ok());
        assert!((g.mean_degree() - 4.0).abs() < 0.5);
    }

    #[test]
    fn unit_degrees_make_a_permutation() {
        let law = NodeTypeLaw::from_triples(1, &[(1, 1, 1.0)]).unwrap();
        for seed in 0..50 {
            let (g, report) = configuration_skeleton(&law, 3, &mut stream(seed, 0)).unwrap();
            assert_eq!(report.dropped, 0);
            assert_eq!(g.edge_count(), 3);
            for v in 0..3 {
                assert_eq!(g.node_type(v), (1, 1));
            }
            assert!(Skeleton::new(3, g.edges().to_vec()).is_ok());
        }
    }

    #[test]
    fn unbalanceable_law_errors() {
        let law = NodeTypeLaw::from_triples(1, &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(configuration_skeleton(&law, 5, &mut stream(0, 0)), Err(NetError::Unbalanced(_))));
    }

    #[test]
    fn pure_rule_one_grows_a_tree_on_the_seed() {
        let g = preferential_attachment(200, 1.0, 0.0, 1.0, 1.0, &mut stream(3, 0)).unwrap();
        assert_eq!(g.node_count(), 200);
        assert_eq!(g.edge_count(), 200);
        for v in 3..200 {
            assert_eq!(g.out_degree(v), 1);
        }
        for e in g.edges().iter().skip(3) {
            assert!(e.creditor < e.debtor);
        }
    }

    #[test]
    fn star_keeps_only_the_hub() {
        let edges = (1..=10).map(|v| Edge::new(v, 0)).collect();
        let g = Skeleton::new(11, edges).unwrap();
        let sub = top_connected_subnetwork(&g, 1).unwrap();
        assert_eq!(sub.ids, vec![0]);
        assert_eq!(sub.skeleton.edge_count(), 0);
        let all = top_connected_subnetwork(&g, 11).unwrap();
        assert_eq!(all.skeleton.edges(), g.edges());
    }
}
