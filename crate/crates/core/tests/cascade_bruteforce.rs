mod common;

use cascadenet::cascade_mc::{cascade_step, run_cascade, CascadeState, InitialShock, NetworkRealization};
use common::{curated_cases, oracle_cascade, oracle_statuses, skeleton};

#[test]
fn step_by_step_agreement_on_small_graphs() {
    let cases = curated_cases();
    assert_eq!(cases.len(), 500);
    for (i, c) in cases.iter().enumerate() {
        let real =
            NetworkRealization::new(skeleton(c.n, &c.edges), c.delta.clone(), c.sigma.clone(), c.omega.clone()).unwrap();
        let steps = oracle_cascade(c.n, &c.edges, &c.delta, &c.sigma, &c.omega, c.lambda);
        let mut state = CascadeState::initial(&real, c.lambda, &InitialShock::FromBuffers).unwrap();
        for (n, expected) in steps.iter().chain(std::iter::repeat(steps.last().unwrap()).take(3)).enumerate() {
            for v in 0..c.n {
                assert_eq!(state.is_defaulted(v), expected.defaulted[v], "case {i} step {n} node {v}: {c:?}");
                assert_eq!(state.is_stress_breached(v), expected.stress_hat[v], "case {i} step {n} node {v}: {c:?}");
            }
            assert_eq!(state.xi(), &expected.xi[..], "case {i} step {n}: {c:?}");
            assert_eq!(state.zeta(), &expected.zeta[..], "case {i} step {n}: {c:?}");
            state = cascade_step(&state, &real, c.lambda);
        }
        let report = run_cascade(&real, c.lambda, &InitialShock::FromBuffers).unwrap();
        assert_eq!(report.statuses, oracle_statuses(steps.last().unwrap()), "case {i}");
    }
}

#[test]
fn seeded_defaults_equal_zero_default_buffers() {
    for c in curated_cases().iter().filter(|c| c.n == 4).take(100) {
        let g = skeleton(c.n, &c.edges);
        let seeded = NetworkRealization::new(g.clone(), c.delta.clone(), c.sigma.clone(), c.omega.clone()).unwrap();
        let mut zeroed = c.delta.clone();
        zeroed[0] = 0.0;
        let direct = NetworkRealization::new(g, zeroed, c.sigma.clone(), c.omega.clone()).unwrap();
        let a = run_cascade(&seeded, c.lambda, &InitialShock::Defaults(vec![0])).unwrap();
        let b = run_cascade(&direct, c.lambda, &InitialShock::FromBuffers).unwrap();
        assert_eq!(a.statuses, b.statuses);
    }
}
