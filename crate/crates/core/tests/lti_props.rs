use std::sync::Arc;

use cascadenet::cascade_fixed::{fixed_lti_run, FixedLtiModel};
use cascadenet::cascade_lti::{init_state, iterate_to_fixed_point, lti_step, LtiModel, LtiOptions, Route};
use cascadenet::dists::{BufferLaw, Grid};
use cascadenet::ensemble::Ensemble;
use cascadenet::harness::models::{exp1_ensemble, exp1_grid, poisson_model, poisson_types};
use cascadenet::netgen::{empirical_laws, poisson_skeleton};
use cascadenet::rng::stream;
use proptest::prelude::*;

fn direct_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    for (i, &x) in a.iter().enumerate().filter(|(_, x)| **x != 0.0) {
        for (j, &y) in b.iter().enumerate() {
            if i + j < out.len() {
                out[i + j] += x * y;
            } else {
                // everything past the end is at least the last cell
                *out.last_mut().unwrap() += x * y;
            }
        }
    }
    out
}

/// Default-only recursion on type laws whose buffers do not depend on the
/// node type: `p_j = P[Delta <= sum of j independent Bernoulli(pbar_j) W_j]`.
fn pure_default_fraction(model: &LtiModel, delta: &BufferLaw) -> f64 {
    let (nodes, edges, ens) = (&model.nodes, &model.edges, &model.ensemble);
    let d = nodes.k_max() + 1;
    let atom = delta.atom0();
    let cell = delta.pmf().masses()[1..].iter().position(|&m| m > 0.0).unwrap() + 1;
    let mut p_in = vec![atom; d];
    loop {
        // default probability of a debtor with out-degree k
        let p_out: Vec<f64> = (0..d)
            .map(|k| {
                let mass: f64 = (0..d).map(|j| nodes.get(j, k)).sum();
                if mass == 0.0 {
                    0.0
                } else {
                    (0..d).map(|j| nodes.get(j, k) * p_in[j]).sum::<f64>() / mass
                }
            })
            .collect();
        let next: Vec<f64> = (0..d)
            .map(|j| {
                if j == 0 {
                    return atom;
                }
                let qj: f64 = (0..d).map(|k| edges.get(k, j)).sum();
                if qj == 0.0 {
                    return atom;
                }
                let pbar: f64 = (0..d).map(|k| edges.get(k, j) * p_out[k]).sum::<f64>() / qj;
                let w = ens.exposure_law(1, j).unwrap().pmf().masses().to_vec();
                let mut g: Vec<f64> = w.iter().map(|x| pbar * x).collect();
                g[0] += 1.0 - pbar;
                let mut shock = vec![0.0; w.len()];
                shock[0] = 1.0;
                for _ in 0..j {
                    shock = direct_convolve(&shock, &g);
                }
                atom + (1.0 - atom) * shock[cell..].iter().sum::<f64>()
            })
            .collect();
        let change = next.iter().zip(&p_in).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        p_in = next;
        if change < 1e-14 {
            break;
        }
    }
    (0..d).map(|j| (0..d).map(|k| nodes.get(j, k)).sum::<f64>() * p_in[j]).sum()
}

#[test]
fn zero_response_matches_a_default_only_recursion() {
    for (delta, z) in [(0.03, 3.0), (0.05, 3.0), (0.08, 4.0)] {
        let grid = exp1_grid(0.1, 256).unwrap();
        let k = 16;
        let ensemble = Arc::new(exp1_ensemble(delta, 0.05, k, grid).unwrap());
        let model = poisson_model(5000, z, k, ensemble.clone(), 0.0).unwrap();
        let opts = LtiOptions { tol: 1e-13, max_iter: 2000, route: Route::Saturating };
        let out = iterate_to_fixed_point(&model, opts).unwrap();
        let reference = pure_default_fraction(&model, ensemble.default_law(1, 1).unwrap());
        assert!((out.default_frac - reference).abs() < 1e-9, "delta {delta}: {} vs {reference}", out.default_frac);
    }
}

#[test]
fn zero_response_ignores_the_stress_buffers() {
    let grid = exp1_grid(0.1, 512).unwrap();
    let base = iterate_to_fixed_point(
        &poisson_model(5000, 5.0, 20, Arc::new(exp1_ensemble(0.04, 0.01, 20, grid).unwrap()), 0.0).unwrap(),
        LtiOptions::default(),
    )
    .unwrap();
    let other = iterate_to_fixed_point(
        &poisson_model(5000, 5.0, 20, Arc::new(exp1_ensemble(0.04, 0.09, 20, grid).unwrap()), 0.0).unwrap(),
        LtiOptions::default(),
    )
    .unwrap();
    for (a, b) in base.state.p.iter().zip(&other.state.p) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn saturating_and_spectral_routes_agree() {
    // wide grid so that shock sums never wrap around in the spectral route
    let grid = Grid::new(0.002, 2048).unwrap();
    let k = 20;
    let ensemble = Arc::new(exp1_ensemble(0.05, 0.05, k, grid).unwrap());
    for lambda in [0.0, 0.4, 1.0] {
        let model = poisson_model(5000, 5.0, k, ensemble.clone(), lambda).unwrap();
        let a = iterate_to_fixed_point(&model, LtiOptions { route: Route::Saturating, ..Default::default() }).unwrap();
        let b = iterate_to_fixed_point(&model, LtiOptions { route: Route::Spectral, ..Default::default() }).unwrap();
        assert!((a.default_frac - b.default_frac).abs() < 1e-6, "lambda {lambda}");
        assert!((a.stress_frac - b.stress_frac).abs() < 1e-6, "lambda {lambda}");
    }
}

#[test]
fn fixed_skeleton_engine_agrees_with_type_averaged_engine() {
    let n = 5000;
    let k = 30;
    let g = Arc::new(poisson_skeleton(n, 5.0, &mut stream(21, 0)).unwrap());
    let laws = empirical_laws(&g, k).unwrap();
    let grid = exp1_grid(0.05, 256).unwrap();
    let ensemble = Arc::new(exp1_ensemble(0.05, 0.05, k, grid).unwrap());
    for lambda in [0.0, 1.0] {
        let lti = LtiModel::new(laws.node.clone(), laws.edge.clone(), ensemble.clone(), lambda).unwrap();
        let lti = iterate_to_fixed_point(&lti, LtiOptions::default()).unwrap();
        let fixed = FixedLtiModel::new(
            g.clone(),
            (0..n).map(|v| {
                let (j, kk) = g.node_type(v);
                Arc::new(ensemble.default_law(j, kk).unwrap().clone())
            }).collect(),
            (0..n).map(|v| {
                let (j, kk) = g.node_type(v);
                Arc::new(ensemble.stress_law(j, kk).unwrap().clone())
            }).collect(),
            (0..g.edge_count()).map(|e| {
                let (kk, j) = g.edge_type(e);
                Arc::new(ensemble.exposure_law(kk, j).unwrap().clone())
            }).collect(),
            lambda,
        )
        .unwrap();
        let out = fixed_lti_run(&fixed, 1e-8, 500);
        let fixed_frac = out.expected_defaults / n as f64;
        assert!((fixed_frac - lti.default_frac).abs() < 0.1, "lambda {lambda}: fixed {fixed_frac} lti {}", lti.default_frac);
    }
}

fn small_model(delta: f64, sigma: f64, z: f64, lambda: f64) -> LtiModel {
    let grid = exp1_grid(0.1, 128).unwrap();
    let k = 12;
    let ensemble: Arc<Ensemble> = Arc::new(exp1_ensemble(delta, sigma, k, grid).unwrap());
    let (nodes, edges) = poisson_types(1000, z, k).unwrap();
    LtiModel::new(nodes, edges, ensemble, lambda).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn iteration_is_monotone_and_bounded(
        delta in 0.01f64..0.09, sigma in 0.005f64..0.09, z in 1.0f64..4.0, lambda in 0.0f64..=1.0
    ) {
        let model = small_model(delta, sigma, z, lambda);
        let d = model.k_max() + 1;
        let mut state = init_state(&model).unwrap();
        for _ in 0..30 {
            let next = lti_step(&state, &model).unwrap();
            for (table, before, after) in [
                ("p", &state.p, &next.p),
                ("ptilde", &state.ptilde, &next.ptilde),
                ("qhat", &state.qhat, &next.qhat),
                ("t", &state.t, &next.t),
            ] {
                for (a, b) in before.iter().zip(after.iter()) {
                    prop_assert!(*b >= *a - 1e-12, "{} decreased", table);
                    prop_assert!((0.0..=1.0).contains(b));
                }
            }
            let pk = next.p_by_out_degree(&model.nodes);
            for kk in 0..d {
                for j in 0..d {
                    if model.edges.get(kk, j) > 0.0 {
                        prop_assert!(next.t(kk, j) <= pk[kk] + 1e-9);
                    }
                }
            }
            state = next;
        }
    }
}
