use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bergman::algebra::GeneratorBasis;
use bergman::group::{exp_generator, random_algebra_element, random_domain_point, DomainPoint};
use bergman::laplacian::{
    continuous_floor, discrete_spectrum, eigenvalue, full_apply, invariance_residual, radial_apply, radial_omega,
    radial_part, LaplacianError, ModeLabel, RadialPoint,
};
use bergman::{c, Mat2, C64};

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

fn norm2(z: &Mat2) -> C64 {
    c(z.iter().map(|v| v.norm_sqr()).sum(), 0.0)
}

#[test]
fn radial_apply_annihilates_the_inverse_weight() {
    let p = RadialPoint::new(0.8, 0.3).unwrap();
    for n in [3, 5, 8] {
        let v = radial_apply(n, |a, b| 1.0 / radial_omega(a, b), &p, 1e-3).unwrap();
        assert!(v.abs() < 1e-9, "{v}");
    }
}

#[test]
fn radial_apply_is_linear() {
    let p = RadialPoint::new(0.9, 0.4).unwrap();
    let f1 = |a: f64, b: f64| (a * b).sin();
    let f2 = |a: f64, b: f64| a.cosh() + b * b;
    let (x, y) = (0.7, -1.3);
    let lhs = radial_apply(5, |a, b| x * f1(a, b) + y * f2(a, b), &p, 1e-3).unwrap();
    let rhs = x * radial_apply(5, f1, &p, 1e-3).unwrap() + y * radial_apply(5, f2, &p, 1e-3).unwrap();
    assert!((lhs - rhs).abs() < 1e-8 * rhs.abs().max(1.0), "{lhs} {rhs}");
}

#[test]
fn radial_part_matches_an_explicit_root_sum() {
    let (l1, l2): (f64, f64) = (0.7, 0.25);
    let n = 4;
    // φ = λ₁²λ₂ + sin λ₂
    let phi = |a: f64, b: f64| a * a * b + b.sin();
    let (p1, p2) = (2.0 * l1 * l2, l1 * l1 + l2.cos());
    let (p11, p22) = (2.0 * l2, -l2.sin());
    let lb = p11
        + p22
        + 2.0 * coth(2.0 * l1) * p1
        + 2.0 * coth(2.0 * l2) * p2
        + 2.0 * coth(l1 - l2) * (p1 - p2)
        + 2.0 * coth(l1 + l2) * (p1 + p2);
    let expected = 0.25 * lb - 0.5 * n as f64 * (l1.tanh() * p1 + l2.tanh() * p2);
    let got = radial_part(n, phi, &RadialPoint::new(l1, l2).unwrap(), 1e-3).unwrap();
    assert!((got - expected).abs() < 1e-7, "{got} {expected}");
}

#[test]
fn radial_point_validation() {
    assert!(matches!(RadialPoint::new(0.3, 0.3), Err(LaplacianError::ChamberWallTooClose(_))));
    assert!(RadialPoint::new(0.3, 0.0).is_err());
    let near = RadialPoint::new(0.3, 0.001).unwrap();
    assert!(radial_part(4, |a, _| a, &near, 1e-3).is_err());
    assert!(radial_omega(0.6, 0.2) > 0.0);
}

#[test]
fn full_apply_examples_at_the_origin() {
    let z0 = DomainPoint::origin();
    let one = full_apply(5, |_| c(1.0, 0.0), &z0, 1e-2).unwrap();
    assert!(one.norm() < 1e-12);
    let lin = full_apply(5, |z| z[(0, 0)], &z0, 1e-2).unwrap();
    assert!(lin.norm() < 1e-12);
    // Σ|z_ij|² has ∂_{ic}∂̄_{ab} = δ_{ia}δ_{cb}, so the trace is 4 at Z = 0.
    let sq = full_apply(5, norm2, &z0, 1e-2).unwrap();
    assert!((sq - c(4.0, 0.0)).norm() < 1e-8, "{sq}");
}

#[test]
fn full_apply_kills_holomorphic_functions() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let z = random_domain_point(&mut r, 0.6);
        let f = |w: &Mat2| w.determinant() + w[(0, 1)] * w[(1, 0)] * c(0.3, 0.2) + w[(1, 1)].exp();
        assert!(full_apply(4, f, &z, 1e-2).unwrap().norm() < 1e-7);
    }
}

#[test]
fn full_apply_is_stable_under_step_halving() {
    let z = random_domain_point(&mut ChaCha8Rng::seed_from_u64(2), 0.5);
    let f = |w: &Mat2| norm2(w) + (w.adjoint() * w).determinant() * c(0.4, 0.0);
    let a = full_apply(5, f, &z, 1e-2).unwrap();
    let b = full_apply(5, f, &z, 5e-3).unwrap();
    assert!((a - b).norm() < 1e-3);
}

#[test]
fn full_apply_rejects_points_near_the_boundary() {
    let z = DomainPoint::new(Mat2::new(c(0.995, 0.0), C64::default(), C64::default(), C64::default())).unwrap();
    assert!(matches!(full_apply(4, norm2, &z, 1e-2), Err(LaplacianError::BoundaryTooClose(_))));
}

#[test]
fn invariance_spot_check() {
    let basis = GeneratorBasis::new();
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let g = exp_generator(&basis, &random_algebra_element(&mut r, 0.5));
    let z = random_domain_point(&mut r, 0.4);
    let f = |w: &Mat2| c(1.0, 0.0) + norm2(w) * c(0.5, 0.0) + w[(0, 0)].conj() * w[(1, 0)];
    assert!(invariance_residual(5, &g, f, &z, 1e-2).unwrap() < 1e-3);
}

#[test]
fn eigenvalue_examples() {
    for n in 2..8u32 {
        let e = eigenvalue(n, (C64::default(), C64::default()));
        assert!((e.re + 0.5 * (n as f64 - 1.0).powi(2)).abs() < 1e-15 && e.im == 0.0);
        assert_eq!(-e.re, continuous_floor(n));
    }
    assert_eq!(continuous_floor(2), 0.5);
    assert_eq!(continuous_floor(5), 8.0);
    let grid_min = (-20..=20)
        .flat_map(|i| (-20..=20).map(move |j| (i as f64 * 0.25, j as f64 * 0.25)))
        .map(|(a, b)| -eigenvalue(5, (c(a, 0.0), c(b, 0.0))).re)
        .fold(f64::INFINITY, f64::min);
    assert!((grid_min - continuous_floor(5)).abs() < 1e-12);
}

#[test]
fn discrete_spectrum_at_n5() {
    let s = discrete_spectrum(5);
    assert_eq!(s.enumerated_count, 9);
    assert_eq!(s.formula_count, 1);
    let find = |l1, l2| s.entries.iter().find(|e| e.kind == ModeLabel::Discrete { l1, l2 }).unwrap();
    assert_eq!((find(0, 0).eig_printed, find(0, 0).eig_substituted), (0.0, 0.0));
    assert_eq!(find(1, 0).eig_printed, 5.0);
    assert!((find(1, 0).eig_substituted - 3.0).abs() < 1e-12);
    let mut sub: Vec<f64> = s.entries.iter().map(|e| e.eig_substituted.round()).collect();
    let mut printed: Vec<f64> = s.entries.iter().map(|e| e.eig_printed).collect();
    sub.sort_by(f64::total_cmp);
    printed.sort_by(f64::total_cmp);
    assert_eq!(sub, vec![0.0, 3.0, 3.0, 4.0, 4.0, 6.0, 7.0, 7.0, 8.0]);
    assert_eq!(printed, vec![0.0, 5.0, 5.0, 10.0, 12.0, 12.0, 17.0, 17.0, 24.0]);
}

#[test]
fn discrete_spectrum_small_levels() {
    let s = discrete_spectrum(2);
    assert_eq!(s.entries.len(), 1);
    assert_eq!(s.entries[0].kind, ModeLabel::Discrete { l1: 0, l2: 0 });
    for n in 2..12u32 {
        let k = ((n - 1) / 2) as usize;
        let s = discrete_spectrum(n);
        assert_eq!(s.enumerated_count, (k + 1) * (k + 1));
        assert_eq!(s.formula_count, k * k.saturating_sub(1) / 2);
        assert!(s.entries.iter().all(|e| e.eig_substituted >= -1e-12));
    }
}

proptest! {
    #[test]
    fn eigenvalue_symmetries(n in 2u32..12, a in -5.0f64..5.0, b in -5.0f64..5.0, ai in -3.0f64..3.0) {
        let t1 = c(a, ai);
        let t2 = c(b, 0.0);
        let e = eigenvalue(n, (t1, t2));
        prop_assert!((e - eigenvalue(n, (t2, t1))).norm() < 1e-12);
        prop_assert!((e - eigenvalue(n, (-t1, t2))).norm() < 1e-12);
        prop_assert!((e - eigenvalue(n, (t1, -t2))).norm() < 1e-12);
    }

    #[test]
    fn real_tau_stays_above_the_floor(n in 2u32..12, a in -10.0f64..10.0, b in -10.0f64..10.0) {
        prop_assert!(-eigenvalue(n, (c(a, 0.0), c(b, 0.0))).re >= continuous_floor(n) - 1e-12);
    }
}
