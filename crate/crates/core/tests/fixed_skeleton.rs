mod common;

use common::{deterministic_tree_mismatch, enumeration_case};

#[test]
fn deterministic_trees_match_the_cascade() {
    if let Some(msg) = deterministic_tree_mismatch(50) {
        panic!("{msg}");
    }
}

#[test]
fn small_random_trees_match_enumeration() {
    for lambda in [0.0, 0.5, 1.0] {
        for seed in 0..40 {
            let err = enumeration_case(seed, lambda);
            assert!(err < 1e-9, "lambda {lambda} seed {seed}: error {err}");
        }
    }
}
