mod common;

use fpetpf::euler::EulerSolver;

#[test]
fn sod_matches_the_exact_solution() {
    let (l1, shock) = common::sod_errors(501, 0.2);
    assert!(l1 < 2e-2, "L1 {l1}");
    assert!(shock < 2.0, "shock off by {shock} cells");
}

#[test]
fn smooth_advection_is_high_order() {
    let orders = common::advection_order(&[41, 81, 161]);
    assert!(*orders.last().unwrap() >= 4.0, "{orders:?}");
}

#[test]
fn mass_is_conserved_before_waves_reach_the_boundary() {
    assert!(common::sod_mass_drift(201) < 1e-8);
}

#[test]
fn runs_are_deterministic() {
    let s = common::sod_initial(201);
    let a = EulerSolver::default().advance(&s, 0.1).unwrap();
    let b = EulerSolver::default().advance(&s, 0.1).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exact_sod_density_has_two_sharp_features() {
    use fpetpf::euler::GasConstants;
    use fpetpf::harness::diagnostics::{feature_count, max_jump};
    use fpetpf::harness::riemann::{Primitive, RiemannSolution};

    let exact = RiemannSolution::solve(Primitive::new(1.0, 0.0, 1.0), Primitive::new(0.125, 0.0, 0.1), &GasConstants::default()).unwrap();
    let xs: Vec<f64> = (0..501).map(|i| i as f64 / 500.0).collect();
    let rho: Vec<f64> = exact.sample_at(&xs, 0.5, 0.2).iter().map(|s| s.rho).collect();
    assert_eq!(feature_count(&rho, 0.05 * max_jump(&rho)), 2);
}
