//! Oracle values at alpha = 0.03, frozen from an independent
//! Nelder-Mead run over all orthonormal bases (300 restarts).

use trine_core::envelope::Envelope;
use trine_core::geometry::von_neumann_basis;
use trine_core::info::optimal_theta;
use trine_core::oracle::{best_von_neumann, grid_search_symmetric, local_perturbation_test, Resolution};
use trine_core::reports::VON_NEUMANN_GAP;
use trine_core::GAMMA1_REFERENCE;

const BEST_BASIS_003: f64 = 0.7386096;
const THETA_STAR_003: f64 = 0.28768;
const ACCESSIBLE_003: f64 = 0.7423322;

#[test]
fn best_basis_is_the_rotated_symmetric_basis() {
    let curve = optimal_theta(0.03, 1e-10).unwrap();
    assert!((curve.info_bits - BEST_BASIS_003).abs() < 1e-7);
    assert!((curve.theta_star - THETA_STAR_003).abs() < 1e-4);

    let vn = best_von_neumann(0.03, 12, 0).unwrap().best_info_bits().unwrap();
    assert!((vn - BEST_BASIS_003).abs() < 1e-6, "{vn}");
}

#[test]
fn von_neumann_gap() {
    let env = Envelope::new(GAMMA1_REFERENCE).unwrap();
    let acc = env.accessible_information(0.03).unwrap().info_bits;
    assert!((acc - ACCESSIBLE_003).abs() < 1e-6);
    for seed in [0, 1, 2] {
        let vn = best_von_neumann(0.03, 10, seed).unwrap().best_info_bits().unwrap();
        assert!(acc - vn >= VON_NEUMANN_GAP, "seed {seed}: {}", acc - vn);
    }
}

#[test]
fn second_triple_is_needed() {
    let one = grid_search_symmetric(0.03, 1, Resolution::FINE)
        .unwrap()
        .best_info_bits()
        .unwrap();
    let two = grid_search_symmetric(0.03, 2, Resolution::FINE)
        .unwrap()
        .best_info_bits()
        .unwrap();
    assert!(two - one >= VON_NEUMANN_GAP, "{one} {two}");
    assert!((ACCESSIBLE_003 - two).abs() < 1e-3);
}

#[test]
fn perturbation_finds_improvement_off_the_optimum() {
    let basis = von_neumann_basis(0.0).to_povm();
    let r = local_perturbation_test(0.03, &basis, 2_000, 1e-2, 5).unwrap();
    assert!(r.max_improvement > 1e-3, "{}", r.max_improvement);
    assert!(r.accepted > 0);
}
