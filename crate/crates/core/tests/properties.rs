use std::f64::consts::{FRAC_PI_3, PI};

use berry_core::berry::{analyze_loop, wilson_loop_phase, wilson_phase_of_chain, Band};
use berry_core::bloch::{make_cone_loop, make_polar_loop, solid_angle, FieldLoop, Orientation};
use berry_core::cli::format_g;
use berry_core::evolution::{default_n_steps, evolve_state, instantaneous_eigenstates};
use berry_core::linalg::{
    diagonalize_unitary_2x2, kron, su2_exp, tensor, CMatrix, PauliVector, StateVector,
};
use berry_core::pairproto::{
    abelian_check, composition_check, phased_state, sigma_of_gamma, GeneralizedBasis,
};
use berry_core::{phase_distance, Complex, HamiltonianSchedule};
use proptest::prelude::*;

fn axis() -> impl Strategy<Value = PauliVector<f64>> {
    (0.0..PI, -PI..PI).prop_map(|(t, p)| PauliVector::from_angles(t, p))
}

fn unitary() -> impl Strategy<Value = CMatrix<f64, 2>> {
    (axis(), -PI..PI, -PI..PI).prop_map(|(n, a, phase)| {
        su2_exp(&n, a).matrix().scale(Complex::from_polar(1.0, phase))
    })
}

fn cone(theta: f64, n: usize) -> FieldLoop<f64> {
    make_cone_loop(theta, n, Orientation::Positive).unwrap()
}

proptest! {
    #[test]
    fn su2_same_axis_composes(n in axis(), a in -PI..PI, b in -PI..PI) {
        let prod = su2_exp(&n, a) * su2_exp(&n, b);
        prop_assert!(prod.matrix().max_abs_diff(su2_exp(&n, a + b).matrix()) < 1e-12);
    }

    #[test]
    fn su2_is_special_unitary(n in axis(), a in -10.0..10.0_f64) {
        let u = su2_exp(&n, a);
        prop_assert!(u.matrix().unitarity_deviation() < 1e-12);
        prop_assert!((u.matrix().det() - Complex::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn kron_mixed_product(a in unitary(), b in unitary(), c in unitary(), d in unitary()) {
        let lhs = kron(&a, &b) * kron(&c, &d);
        let rhs = kron(&(a * c), &(b * d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn tensor_of_unitaries_is_unitary(n in axis(), m in axis(), a in -PI..PI, b in -PI..PI) {
        let t = tensor(&su2_exp(&n, a), &su2_exp(&m, b));
        prop_assert!(t.matrix().unitarity_deviation() < 1e-12);
    }

    #[test]
    fn diagonalize_round_trip(u in unitary()) {
        let eig = diagonalize_unitary_2x2(&u).unwrap();
        let v = *eig.basis.matrix();
        let back = v * *eig.diagonal.matrix() * v.adjoint();
        prop_assert!(back.max_abs_diff(&u) < 1e-9);
        prop_assert!(eig.diagonal.matrix().max_off_diagonal() == 0.0);
        let p = eig.phases();
        prop_assert!(p[0] <= p[1]);
    }

    #[test]
    fn solid_angle_reverses_sign(theta in 0.05..1.5_f64, n in 64usize..512) {
        let lp = cone(theta, n);
        let fwd = solid_angle(&lp).unwrap().omega;
        let back = solid_angle(&lp.reversed()).unwrap().omega;
        prop_assert!((fwd + back).abs() < 1e-9);
    }

    #[test]
    fn solid_angle_rotation_invariant(theta in 0.05..1.5_f64, r in axis(), angle in -PI..PI) {
        let lp = cone(theta, 256);
        let a = solid_angle(&lp).unwrap().omega;
        let b = solid_angle(&lp.rotated(&r, angle)).unwrap().omega;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn wilson_gauge_invariant(
        theta in 0.05..1.5_f64,
        phases in proptest::collection::vec(-PI..PI, 128),
    ) {
        let lp = cone(theta, 128);
        let states: Vec<_> = lp.samples()[..128]
            .iter()
            .map(|b| *instantaneous_eigenstates(b).0.vector())
            .collect();
        let reference = wilson_phase_of_chain(&states).unwrap();
        let regauged: Vec<_> = states
            .iter()
            .zip(&phases)
            .map(|(v, &p)| v.scale(Complex::from_polar(1.0, p)))
            .collect();
        let g = wilson_phase_of_chain(&regauged).unwrap();
        prop_assert!(phase_distance(g, reference) < 1e-12);
    }

    #[test]
    fn wilson_band_antisymmetric(theta in 0.05..1.5_f64, r in axis(), angle in -PI..PI) {
        let lp = cone(theta, 512).rotated(&r, angle);
        let m = wilson_loop_phase(&lp, Band::Minus).unwrap();
        let p = wilson_loop_phase(&lp, Band::Plus).unwrap();
        prop_assert!(phase_distance(p, -m) < 1e-9);
    }

    #[test]
    fn wilson_orientation_reversal(theta in 0.05..1.5_f64) {
        let lp = cone(theta, 512);
        let fwd = wilson_loop_phase(&lp, Band::Minus).unwrap();
        let back = wilson_loop_phase(&lp.reversed(), Band::Minus).unwrap();
        prop_assert!(phase_distance(back, -fwd) < 1e-9);
    }

    #[test]
    fn sigma_family_commutes_and_composes(a in -10.0..10.0_f64, b in -10.0..10.0_f64) {
        prop_assert!(abelian_check(&[a, b]).unwrap() < 1e-12);
        prop_assert!(composition_check(a, b) < 1e-12);
    }

    #[test]
    fn sigma_periodic(g in -10.0..10.0_f64) {
        let s = *sigma_of_gamma(g).matrix();
        prop_assert!(sigma_of_gamma(g + 2.0 * PI).matrix().max_abs_diff(&s) < 1e-12);
        prop_assert!(sigma_of_gamma(g + PI).matrix().max_abs_diff(&-s) < 1e-12);
    }

    #[test]
    fn sigma_eigenvalues(g in 0.01..3.13_f64) {
        let eig = diagonalize_unitary_2x2(sigma_of_gamma(g).matrix()).unwrap();
        let vals = eig.eigenvalues();
        prop_assert!((vals[0] - Complex::from_polar(1.0, -g)).norm() < 1e-9);
        prop_assert!((vals[1] - Complex::from_polar(1.0, g)).norm() < 1e-9);
    }

    #[test]
    fn generalized_basis_orthonormal(alpha in -PI..PI, beta in -PI..PI) {
        let g = GeneralizedBasis::new(alpha, beta);
        prop_assert!((g.phi_plus.vector().norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((g.phi_minus.vector().norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!(g.phi_plus.inner(&g.phi_minus).norm() < 1e-12);
    }

    #[test]
    fn phasing_preserves_basis_orthogonality(alpha in -PI..PI, beta in -PI..PI, g in -PI..PI) {
        let b = GeneralizedBasis::new(alpha, beta);
        let p = phased_state(&b.phi_plus, g);
        let m = phased_state(&b.phi_minus, g);
        prop_assert!(p.inner(&m).norm() < 1e-12);
    }

    #[test]
    fn csv_numbers_keep_twelve_digits(x in -1e6..1e6_f64) {
        let s = format_g(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs().max(1e-300));
    }
}

#[test]
fn solid_angle_law_for_cones() {
    for k in 1..=5 {
        let theta = k as f64 * PI / 12.0;
        let g = wilson_loop_phase(&cone(theta, 10_000), Band::Minus).unwrap();
        assert!(phase_distance(g, PI * (1.0 - theta.cos())) <= 1e-3, "theta {theta}: {g}");
    }
}

#[test]
fn wilson_depends_only_on_enclosed_area() {
    let target = solid_angle(&cone(FRAC_PI_3, 4096)).unwrap().omega;
    let wobbly = |r0: f64| {
        let axis = PauliVector::from_angles(0.3, 0.7);
        make_polar_loop(&axis, 4096, Orientation::Positive, move |p: f64| {
            r0 * (1.0 + 0.3 * (3.0 * p).cos())
        })
        .unwrap()
    };
    let (mut lo, mut hi) = (0.2, 1.4);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if solid_angle(&wobbly(mid)).unwrap().omega < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lp = wobbly(0.5 * (lo + hi));
    assert!((solid_angle(&lp).unwrap().omega - target).abs() < 1e-9);
    let a = wilson_loop_phase(&cone(FRAC_PI_3, 4096), Band::Minus).unwrap();
    let b = wilson_loop_phase(&lp, Band::Minus).unwrap();
    assert!(phase_distance(a, b) <= 2e-3, "{a} vs {b}");
}

#[test]
fn rk4_drift_shrinks_with_step_count() {
    let schedule = HamiltonianSchedule::new(cone(FRAC_PI_3, 1000), 1.0, 100.0 * PI).unwrap();
    let drifts: Vec<f64> = [10_000, 20_000, 40_000]
        .iter()
        .map(|&n| evolve_state(&schedule, &StateVector::basis(0), n).unwrap().norm_drift)
        .collect();
    // Fifth-order local error: halving the step cuts drift about 16-32 fold.
    assert!(drifts[1] < drifts[0] / 8.0, "{drifts:?}");
    assert!(drifts[2] < drifts[1] / 8.0, "{drifts:?}");
}

#[test]
fn method_residual_falls_as_one_over_length() {
    let residual = |m: f64| {
        let schedule = HamiltonianSchedule::new(cone(FRAC_PI_3, 10_000), 1.0, m * PI).unwrap();
        analyze_loop(&schedule, Band::Minus, default_n_steps(10_000).max(500 * m as usize))
            .unwrap()
            .method_residual
    };
    let r1 = residual(400.0);
    let r2 = residual(800.0);
    let r4 = residual(1600.0);
    assert!((r1 / r2 - 2.0).abs() < 0.1, "{r1} {r2}");
    assert!((r2 / r4 - 2.0).abs() < 0.1, "{r2} {r4}");
}
