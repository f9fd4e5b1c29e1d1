//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use cascadenet::cascade_fixed::{fixed_lti_run, FixedLtiModel};
use cascadenet::cascade_mc::{run_cascade, InitialShock, NetworkRealization, Status};
use cascadenet::dists::{BufferLaw, ExposureLaw, Grid, GridPmf};
use cascadenet::netgen::{Edge, Skeleton};
use rand::Rng;

/// Sets and shock fractions after one step of the literal recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleStep {
    pub defaulted: Vec<bool>,
    pub stress_hat: Vec<bool>,
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
}

/// Evaluates the set definitions of the double cascade directly, recomputing
/// every set from the previous step's shock fractions. Edges are
/// `(debtor, creditor)` pairs. Returns steps `0..` until a step repeats.
pub fn oracle_cascade(
    n: usize,
    edges: &[(usize, usize)],
    delta: &[f64],
    sigma: &[f64],
    omega: &[f64],
    lambda: f64,
) -> Vec<OracleStep> {
    let without = |xi: &[f64], e: usize| -> bool {
        let (_, v) = edges[e];
        let shock: f64 = edges
            .iter()
            .enumerate()
            .filter(|&(f, &(_, c))| c == v && f != e)
            .map(|(f, _)| omega[f] * xi[f])
            .sum();
        shock >= delta[v]
    };
    let zeta_of = |dwr: &[bool], shat: &[bool]| -> Vec<f64> {
        edges
            .iter()
            .enumerate()
            .map(|(e, &(_, w))| {
                if dwr[e] {
                    1.0
                } else if shat[w] {
                    lambda
                } else {
                    0.0
                }
            })
            .collect()
    };

    let d0: Vec<bool> = delta.iter().map(|&d| d == 0.0).collect();
    let s0: Vec<bool> = sigma.iter().map(|&s| s == 0.0).collect();
    let dwr0: Vec<bool> = edges.iter().map(|&(_, v)| delta[v] == 0.0).collect();
    let xi0: Vec<f64> = edges.iter().map(|&(w, _)| if d0[w] { 1.0 } else { 0.0 }).collect();
    let zeta0 = zeta_of(&dwr0, &s0);
    let mut steps = vec![OracleStep { defaulted: d0, stress_hat: s0, xi: xi0, zeta: zeta0 }];

    loop {
        let prev = steps.last().unwrap().clone();
        let defaulted: Vec<bool> = (0..n)
            .map(|v| {
                let shock: f64 =
                    edges.iter().enumerate().filter(|(_, &(_, c))| c == v).map(|(e, _)| omega[e] * prev.xi[e]).sum();
                shock >= delta[v]
            })
            .collect();
        let dwr: Vec<bool> = (0..edges.len()).map(|e| without(&prev.xi, e)).collect();
        let stress_hat: Vec<bool> = (0..n)
            .map(|v| {
                let shock: f64 =
                    edges.iter().enumerate().filter(|(_, &(d, _))| d == v).map(|(e, _)| omega[e] * prev.zeta[e]).sum();
                shock >= sigma[v]
            })
            .collect();
        let xi: Vec<f64> = edges
            .iter()
            .enumerate()
            .map(|(e, &(w, v))| {
                if prev.defaulted[w] || !defaulted[w] {
                    prev.xi[e]
                } else if !prev.stress_hat[v] {
                    1.0
                } else {
                    1.0 - lambda
                }
            })
            .collect();
        let zeta = zeta_of(&dwr, &stress_hat);
        let next = OracleStep { defaulted, stress_hat, xi, zeta };
        if next == prev {
            return steps;
        }
        steps.push(next);
        assert!(steps.len() < 10 * (n + edges.len() + 2), "oracle did not settle");
    }
}

/// Final statuses from an oracle run.
pub fn oracle_statuses(step: &OracleStep) -> Vec<Status> {
    step.defaulted
        .iter()
        .zip(&step.stress_hat)
        .map(|(&d, &s)| match (d, s) {
            (true, _) => Status::Defaulted,
            (false, true) => Status::Stressed,
            _ => Status::Normal,
        })
        .collect()
}

pub fn skeleton(n: usize, edges: &[(usize, usize)]) -> Arc<Skeleton> {
    Arc::new(Skeleton::new(n, edges.iter().map(|&(d, c)| Edge::new(d, c)).collect()).unwrap())
}

/// Random tree on `n` nodes with each edge oriented at random.
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    (1..n)
        .map(|v| {
            let u = rng.random_range(0..v);
            if rng.random_bool(0.5) {
                (u, v)
            } else {
                (v, u)
            }
        })
        .collect()
}

/// Finite law on integer cells: `(cell, probability)` pairs.
pub type CellLaw = Vec<(usize, f64)>;

/// Probability of default and of stress without default for every node,
/// by enumerating all joint outcomes of independent node and edge laws and
/// running the reference recursion on each.
pub fn enumerate_outcomes(
    n: usize,
    edges: &[(usize, usize)],
    delta: &[CellLaw],
    sigma: &[CellLaw],
    omega: &[CellLaw],
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let laws: Vec<&CellLaw> = delta.iter().chain(sigma).chain(omega).collect();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut pick = vec![0usize; laws.len()];
    loop {
        let prob: f64 = laws.iter().zip(&pick).map(|(l, &i)| l[i].1).product();
        if prob > 0.0 {
            let value = |k: usize| laws[k][pick[k]].0 as f64;
            let d: Vec<f64> = (0..n).map(value).collect();
            let s: Vec<f64> = (n..2 * n).map(value).collect();
            let w: Vec<f64> = (2 * n..laws.len()).map(value).collect();
            let steps = oracle_cascade(n, edges, &d, &s, &w, lambda);
            for (v, st) in oracle_statuses(steps.last().unwrap()).iter().enumerate() {
                match st {
                    Status::Defaulted => p[v] += prob,
                    Status::Stressed => q[v] += prob,
                    Status::Normal => {}
                }
            }
        }
        let mut k = 0;
        loop {
            if k == laws.len() {
                return (p, q);
            }
            pick[k] += 1;
            if pick[k] < laws[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

/// One small graph with deterministic buffers and exposures.
#[derive(Debug, Clone)]
pub struct SmallCase {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub delta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub omega: Vec<f64>,
    pub lambda: f64,
}

/// Every directed graph on up to three nodes plus seeded four-node graphs,
/// 500 cases in all. Values are multiples of 1/4 so shock sums are exact.
pub fn curated_cases() -> Vec<SmallCase> {
    let mut graphs = Vec::new();
    for n in 1..=3usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            graphs.push((n, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect::<Vec<_>>()));
        }
    }
    let pairs4: Vec<(usize, usize)> = (0..4).flat_map(|a| (0..4).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    let mut rng = cascadenet::rng::stream(2024, 0);
    while graphs.len() < 500 {
        let mask: u32 = rng.random_range(0..1 << pairs4.len());
        graphs.push((4, pairs4.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect()));
    }
    graphs
        .into_iter()
        .enumerate()
        .map(|(i, (n, edges))| {
            let mut rng = cascadenet::rng::stream(2025, i as u64);
            let mut quarter = |zero: f64, hi: u32| -> f64 {
                if rng.random_bool(zero) {
                    0.0
                } else {
                    rng.random_range(1..=hi) as f64 / 4.0
                }
            };
            let delta = (0..n).map(|_| quarter(0.25, 8)).collect();
            let sigma = (0..n).map(|_| quarter(0.25, 8)).collect();
            let omega = edges.iter().map(|_| quarter(0.0, 6)).collect();
            let lambda = [0.0, 0.25, 0.5, 0.75, 1.0][i % 5];
            SmallCase { n, edges, delta, sigma, omega, lambda }
        })
        .collect()
}

/// Direct `O(M^2)` forward DFT with the sign convention `exp(-2 pi i k l / M)`.
pub fn direct_dft(x: &[rustfft::num_complex::Complex64]) -> Vec<rustfft::num_complex::Complex64> {
    use rustfft::num_complex::Complex64;
    let m = x.len();
    (0..m)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(l, &v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * ((k * l) % m) as f64 / m as f64))
                .sum()
        })
        .collect()
}

/// Direct linear convolution, cut at `len` cells.
pub fn direct_convolve(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            if i + j < len {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// Random PMF on `m` cells supported on the first `support` of them.
pub fn random_pmf<R: Rng>(rng: &mut R, m: usize, support: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..m).map(|i| if i < support && rng.random_bool(0.7) { rng.random::<f64>() } else { 0.0 }).collect();
    if v.iter().all(|&x| x == 0.0) {
        v[0] = 1.0;
    }
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// Worst per-cell error of FFT convolution against the direct sum and of
/// Parseval's identity over `pairs` random PMF pairs with `M <= 256`.
pub fn fft_oracle_suite(pairs: usize, seed: u64) -> (f64, f64) {
    use cascadenet::dists::{convolve, fft, Grid, GridPmf};
    use rustfft::num_complex::Complex64;
    let mut conv_err: f64 = 0.0;
    let mut parseval_err: f64 = 0.0;
    for t in 0..pairs {
        let mut rng = cascadenet::rng::stream(seed, t as u64);
        let m = 1usize << rng.random_range(1..=8);
        let grid = Grid::new(1.0, m).unwrap();
        let a = random_pmf(&mut rng, m, m / 2);
        let b = random_pmf(&mut rng, m, m / 2);
        let got = convolve(&GridPmf::from_masses(grid, a.clone()).unwrap(), &GridPmf::from_masses(grid, b.clone()).unwrap())
            .unwrap();
        let want = direct_convolve(&a, &b, m);
        for (g, w) in got.masses().iter().zip(&want) {
            conv_err = conv_err.max((g - w).abs());
        }
        let x: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let spec = fft(&x).unwrap();
        let time: f64 = a.iter().map(|v| v * v).sum();
        let freq: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() / m as f64;
        parseval_err = parseval_err.max((time - freq).abs());
    }
    (conv_err, parseval_err)
}

pub fn buffer(grid: Grid, law: &CellLaw) -> Arc<BufferLaw> {
    let atom: f64 = law.iter().filter(|(c, _)| *c == 0).map(|(_, p)| p).sum();
    let rest: Vec<(usize, f64)> = law.iter().filter(|(c, _)| *c > 0).map(|&(c, p)| (c, p / (1.0 - atom))).collect();
    let conditional = if rest.is_empty() { GridPmf::point(grid, 1) } else { GridPmf::from_cells(grid, &rest).unwrap() };
    Arc::new(BufferLaw::new(atom, &conditional).unwrap())
}

pub fn exposure(grid: Grid, law: &CellLaw) -> Arc<ExposureLaw> {
    Arc::new(ExposureLaw::new(&GridPmf::from_cells(grid, law).unwrap()).unwrap())
}

pub fn model(
    grid: Grid,
    n: usize,
    edges: &[(usize, usize)],
    delta: &[CellLaw],
    sigma: &[CellLaw],
    omega: &[CellLaw],
    lambda: f64,
) -> FixedLtiModel {
    FixedLtiModel::new(
        skeleton(n, edges),
        delta.iter().map(|l| buffer(grid, l)).collect(),
        sigma.iter().map(|l| buffer(grid, l)).collect(),
        omega.iter().map(|l| exposure(grid, l)).collect(),
        lambda,
    )
    .unwrap()
}

/// Buffer law on cells `0..cells` with one or two support points.
pub fn random_law<R: Rng>(rng: &mut R, cells: usize, zero_chance: f64) -> CellLaw {
    if rng.random_bool(zero_chance) {
        let c = rng.random_range(1..cells);
        let p0 = rng.random_range(0.1..0.6);
        return vec![(0, p0), (c, 1.0 - p0)];
    }
    let a = rng.random_range(1..cells);
    let b = rng.random_range(1..cells);
    if a == b {
        return vec![(a, 1.0)];
    }
    let pa = rng.random_range(0.2..0.8);
    vec![(a, pa), (b, 1.0 - pa)]
}

pub fn random_weight<R: Rng>(rng: &mut R) -> CellLaw {
    if rng.random_bool(0.5) {
        vec![(2 * rng.random_range(1..3), 1.0)]
    } else {
        let p = rng.random_range(0.2..0.8);
        vec![(2, p), (4, 1.0 - p)]
    }
}

/// Runs `cases` random trees with deterministic data and returns the first
/// mismatch between the fixed-skeleton engine and the cascade, if any.
pub fn deterministic_tree_mismatch(cases: u64) -> Option<String> {
    let grid = Grid::new(1.0, 64).unwrap();
    for case in 0..cases {
        let mut rng = cascadenet::rng::stream(11, case);
        let n = rng.random_range(2..=12);
        let edges = random_tree(n, &mut rng);
        let lambda = [0.0, 0.5, 1.0][case as usize % 3];
        let cell = |rng: &mut _, zero: f64, hi: usize| -> usize {
            if Rng::random_bool(rng, zero) {
                0
            } else {
                Rng::random_range(rng, 1..hi)
            }
        };
        let d: Vec<usize> = (0..n).map(|_| cell(&mut rng, 0.2, 10)).collect();
        let s: Vec<usize> = (0..n).map(|_| cell(&mut rng, 0.2, 10)).collect();
        let w: Vec<usize> = edges.iter().map(|_| 2 * rng.random_range(1..4)).collect();
        let point = |c: &usize| vec![(*c, 1.0)];
        let m = model(
            grid,
            n,
            &edges,
            &d.iter().map(point).collect::<Vec<_>>(),
            &s.iter().map(point).collect::<Vec<_>>(),
            &w.iter().map(point).collect::<Vec<_>>(),
            lambda,
        );
        let out = fixed_lti_run(&m, 1e-12, 200);
        if !out.converged {
            return Some(format!("case {case} did not converge"));
        }
        let real = NetworkRealization::new(
            skeleton(n, &edges),
            d.iter().map(|&c| c as f64).collect(),
            s.iter().map(|&c| c as f64).collect(),
            w.iter().map(|&c| c as f64).collect(),
        )
        .unwrap();
        let report = run_cascade(&real, lambda, &InitialShock::FromBuffers).unwrap();
        for v in 0..n {
            let (p, q) = (out.state.p[v], out.state.q[v]);
            let expected = match report.statuses[v] {
                Status::Defaulted => (1.0, 0.0),
                Status::Stressed => (0.0, 1.0),
                Status::Normal => (0.0, 0.0),
            };
            if (p, q) != expected {
                return Some(format!("case {case} node {v}: (p, q) = ({p}, {q}), expected {expected:?}, edges {edges:?}"));
            }
        }
    }
    None
}

/// Largest difference between the fixed-skeleton engine and exhaustive
/// enumeration on one random tree with at most 6 nodes and 8 cells.
pub fn enumeration_case(seed: u64, lambda: f64) -> f64 {
    let grid = Grid::new(1.0, 8).unwrap();
    let mut rng = cascadenet::rng::stream(seed, 0);
    let n = rng.random_range(2..=6);
    let edges = random_tree(n, &mut rng);
    let mut delta: Vec<CellLaw> = (0..n).map(|_| random_law(&mut rng, 8, 0.3)).collect();
    let mut sigma: Vec<CellLaw> = (0..n).map(|_| random_law(&mut rng, 8, 0.3)).collect();
    let omega: Vec<CellLaw> = edges.iter().map(|_| random_weight(&mut rng)).collect();
    // keep the enumeration small: at most 2^14 joint outcomes
    let mut size: usize = delta.iter().chain(&sigma).chain(&omega).map(|l| l.len()).product();
    for law in delta.iter_mut().chain(sigma.iter_mut()) {
        if size <= 1 << 14 {
            break;
        }
        if law.len() > 1 {
            size /= law.len();
            law.truncate(1);
            law[0].1 = 1.0;
        }
    }
    let (p, q) = enumerate_outcomes(n, &edges, &delta, &sigma, &omega, lambda);
    let out = fixed_lti_run(&model(grid, n, &edges, &delta, &sigma, &omega, lambda), 1e-14, 500);
    assert!(out.converged);
    (0..n)
        .flat_map(|v| [(out.state.p[v] - p[v]).abs(), (out.state.q[v] - q[v]).abs()])
        .fold(0.0, f64::max)
}
