use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bergman::algebra::{index_of, is_compact, AlgebraElement, GeneratorBasis, StructureConstants, DIM};
use bergman::fock::{
    a_mode, adjoint_action_check, apply_terms, apply_word, b_mode, compact_phase, exp_apply, inner,
    lowest_state, omega0_closed_form, sector_size, FockState, FockVector, Ladder, LinearOp, Rep, RepConfig,
    SparseOp, Term, TruncatedRep,
};
use bergman::group::{exp_generator, random_algebra_element, GroupElement};
use bergman::{c, C64};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Brute-force count over all occupation tuples with entries ≤ bound.
fn brute_force_count(charge: i64, p_max: u32, bound: u8) -> usize {
    let mut count = 0;
    let mut occ = [0u8; 8];
    loop {
        let s = FockState { occ };
        if s.pairs() <= p_max && s.charge() == charge {
            count += 1;
        }
        let mut i = 0;
        while i < 8 {
            if occ[i] < bound {
                occ[i] += 1;
                break;
            }
            occ[i] = 0;
            i += 1;
        }
        if i == 8 {
            return count;
        }
    }
}

fn commutator(a: &SparseOp, b: &SparseOp) -> SparseOp {
    a.matmul(b).sub(&b.matmul(a))
}

#[test]
fn sector_sizes_match_enumeration() {
    let rep = Rep::build(RepConfig::new(1, 0)).unwrap();
    assert_eq!(rep.sector.basis, vec![FockState::vacuum()]);
    let rep = Rep::build(RepConfig::new(2, 2)).unwrap();
    assert_eq!(rep.dim(), brute_force_count(2, 2, 4));
    assert_eq!(rep.dim(), 440);
    assert_eq!(sector_size(4, 1), brute_force_count(4, 1, 5));
}

#[test]
fn canonical_commutation_relations() {
    for mode in [a_mode(1, 0), b_mode(0, 1)] {
        for k in 0..4u8 {
            let mut s = FockState::vacuum();
            s.occ[mode] = k;
            let up = apply_word(&[Ladder::annihilate(mode), Ladder::create(mode)], s).unwrap().1;
            let down = apply_word(&[Ladder::create(mode), Ladder::annihilate(mode)], s).map_or(0.0, |x| x.1);
            assert!((up - down - 1.0).abs() < 1e-14);
        }
    }
    let s = FockState::new([1, 0, 0, 0], [0, 1, 0, 0]);
    let ab = apply_word(&[Ladder::annihilate(0), Ladder::create(5)], s).unwrap();
    let ba = apply_word(&[Ladder::create(5), Ladder::annihilate(0)], s).unwrap();
    assert_eq!(ab, ba);
}

#[test]
fn lowest_state_examples() {
    let v1 = lowest_state(1);
    assert_eq!(v1, FockVector::basis(FockState::vacuum()));
    let v2 = lowest_state(2);
    let w = 1.0 / 2f64.sqrt();
    assert_eq!(v2.amps.len(), 2);
    assert!((v2.amps[&FockState::new([0; 4], [1, 0, 0, 1])] - c(w, 0.0)).norm() < 1e-15);
    assert!((v2.amps[&FockState::new([0; 4], [0, 1, 1, 0])] - c(-w, 0.0)).norm() < 1e-15);
    for n in 1..6 {
        assert!((lowest_state(n).norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn lowest_state_is_annihilated_by_pair_lowering_and_compact_raising() {
    let rep = Rep::build(RepConfig::new(3, 2)).unwrap();
    let x0 = rep.lowest_state();
    let mut r = rng(1);
    let b = bergman::Mat2::from_fn(|_, _| c(r.random(), r.random()));
    let (minus, _) = rep.pair_ops(&b);
    assert!(minus.apply(&x0).iter().all(|a| a.norm() < 1e-14));
}

#[test]
fn casimir_is_n_minus_one_and_central() {
    let basis = GeneratorBasis::new();
    for n in [2, 3] {
        let rep = Rep::build(RepConfig::new(n, 3)).unwrap();
        let cas = rep.casimir();
        let x0 = rep.lowest_state();
        let y = cas.apply(&x0);
        for (a, b) in y.iter().zip(&x0) {
            assert!((a - b * (n as f64 - 1.0)).norm() < 1e-14);
        }
        for p in 0..DIM {
            let x = rep.generator(&basis, p).to_sparse();
            assert!(commutator(&cas, &x).max_abs_on_columns(|_| true) < 1e-14);
        }
    }
}

#[test]
fn generator_commutators_follow_the_structure_constants_on_the_interior() {
    let basis = GeneratorBasis::new();
    let sc = StructureConstants::from_formula();
    let rep = Rep::build(RepConfig::new(2, 3)).unwrap();
    let ops: Vec<SparseOp> = (0..DIM).map(|p| rep.generator(&basis, p).to_sparse()).collect();
    for p in 0..DIM {
        for q in (p + 1)..DIM {
            let lhs = commutator(&ops[p], &ops[q]);
            let rhs = sc
                .get(p, q)
                .iter()
                .enumerate()
                .filter(|(_, f)| **f != 0.0)
                .fold(SparseOp::diagonal(&vec![C64::default(); rep.dim()]), |acc, (r, f)| acc.add(&ops[r].scale(c(*f, 0.0))));
            let err = lhs.sub(&rhs).max_abs_on_columns(|j| rep.interior(j));
            assert!(err < 1e-12, "({p},{q}): {err:.3e}");
        }
    }
}

#[test]
fn pair_operator_examples() {
    let vac = Rep::with_charge(RepConfig::new(1, 2), 0, 2).unwrap();
    let b = bergman::Mat2::new(c(1.0, 0.0), c(0.0, 0.5), c(-0.3, 0.0), c(0.2, 0.1));
    let (minus, plus) = vac.pair_ops(&b);
    assert!(minus.apply(&vac.lowest_state()).iter().all(|a| a.norm() == 0.0));
    assert!(plus.adjoint().sub(&minus).max_abs_on_columns(|_| true) < 1e-15);

    let n = 3;
    let rep = Rep::build(RepConfig::new(n, 2)).unwrap();
    let unit = bergman::Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let (_, plus) = rep.pair_ops(&unit);
    let out = rep.sector.to_vector(&plus.apply(&rep.lowest_state()));
    assert!(out.norm() > 0.5);
    for (s, a) in &out.amps {
        if a.norm() > 1e-14 {
            assert_eq!(s.pairs(), 1);
            assert_eq!(s.n().iter().map(|&x| x as u32).sum::<u32>(), 2 * n - 1);
        }
    }
}

#[test]
fn generators_are_anti_hermitian() {
    let basis = GeneratorBasis::new();
    let rep = Rep::build(RepConfig::new(2, 2)).unwrap();
    for p in 0..DIM {
        let x = rep.generator(&basis, p).to_sparse();
        assert!(x.adjoint().add(&x).max_abs_on_columns(|_| true) < 1e-14);
    }
}

#[test]
fn det_b_dagger_conjugation_identity() {
    // exp(−tr b†Λb) det(b†)^N exp(tr b†Λb) = e^{−N tr Λ} det(b†)^N
    let det_terms = vec![
        Term { coef: c(1.0, 0.0), word: vec![Ladder::create(b_mode(0, 0)), Ladder::create(b_mode(1, 1))] },
        Term { coef: c(-1.0, 0.0), word: vec![Ladder::create(b_mode(0, 1)), Ladder::create(b_mode(1, 0))] },
    ];
    let lambda = [0.37, -0.21];
    let weight = |s: &FockState, sign: f64| {
        let n = s.n();
        let d = lambda[0] * (n[0] + n[1]) as f64 + lambda[1] * (n[2] + n[3]) as f64;
        c((sign * d).exp(), 0.0)
    };
    let mut v = FockVector::default();
    v.amps.insert(FockState::new([1, 0, 0, 0], [0, 2, 1, 0]), c(0.3, 0.1));
    v.amps.insert(FockState::new([0, 0, 0, 0], [1, 0, 0, 1]), c(-0.7, 0.0));
    v.amps.insert(FockState::new([0, 1, 0, 0], [0, 0, 0, 0]), c(0.0, 0.4));
    for n in [2, 3] {
        let power = |w: &FockVector| (0..n).fold(w.clone(), |acc, _| apply_terms(&det_terms, &acc));
        let lhs = power(&v.map_diagonal(|s| weight(s, 1.0))).map_diagonal(|s| weight(s, -1.0));
        let rhs = power(&v).scale(c((-(n as f64) * (lambda[0] + lambda[1])).exp(), 0.0));
        assert!(lhs.distance(&rhs) < 1e-12 * rhs.norm());
        assert!(rhs.norm() > 0.1);
    }
}

#[test]
fn boost_overlap_is_the_two_mode_squeezing_value() {
    let (l1, l2) = (0.2, 0.1);
    let rep = Rep::build(RepConfig::new(2, 8)).unwrap();
    let got = rep.boost_overlap((l1, l2));
    let exact = (l1.cosh() * l2.cosh()).powi(-3);
    assert!((got - c(exact, 0.0)).norm() < 1e-8);
    let printed = (l1.cosh() * l2.cosh()).powi(-2);
    assert!((got.re - printed).abs() > 1e-3);
}

#[test]
fn apply_boost_is_unitary_up_to_truncation() {
    let tr = TruncatedRep::build(RepConfig::new(2, 6)).unwrap();
    let x0 = lowest_state(2);
    let same = tr.apply_boost((0.0, 0.0), &x0).unwrap();
    assert!(same.state.distance(&x0) < 1e-14);
    let out = tr.apply_boost((0.15, 0.05), &x0).unwrap();
    assert!((out.state.norm() - 1.0).abs() < 1e-12);
    assert!(out.truncation_estimate < 1e-3, "{}", out.truncation_estimate);
    assert!(tr.apply_boost((0.9, 0.0), &x0).is_err());
}

#[test]
fn omega0_on_identity_and_compact_elements() {
    let basis = GeneratorBasis::new();
    let mut r = rng(2);
    for n in [2u32, 3] {
        let rep = Rep::build(RepConfig::new(n, 2)).unwrap();
        let x0 = rep.lowest_state();
        assert!((inner(&x0, &rep.exp_apply(&basis.matrix(&AlgebraElement::zero()), &x0)) - 1.0).norm() < 1e-14);
        for _ in 0..5 {
            let mut xi = random_algebra_element(&mut r, 2.0);
            (0..DIM).filter(|&p| !is_compact(p)).for_each(|p| xi.0[p] = 0.0);
            let k = exp_generator(&basis, &xi);
            let fock = inner(&x0, &rep.exp_apply(&basis.matrix(&xi), &x0));
            let phase = compact_phase(&k, n);
            assert!((fock - phase).norm() < 1e-12);
            assert!((phase - k.d().determinant().powi(n as i32 + 1)).norm() < 1e-12);
            assert!((fock - omega0_closed_form(&k, n)).norm() < 1e-12);
        }
    }
    let tr = TruncatedRep::build(RepConfig::new(2, 4)).unwrap();
    assert!((tr.omega0(&GroupElement::identity()).unwrap().value - 1.0).norm() < 1e-14);
}

#[test]
fn omega0_kak_route_matches_direct_exponential() {
    let basis = GeneratorBasis::new();
    let mut r = rng(3);
    let tr = TruncatedRep::build(RepConfig::new(2, 8)).unwrap();
    let x0 = tr.fine.lowest_state();
    for _ in 0..3 {
        let xi = random_algebra_element(&mut r, 0.4);
        let g = exp_generator(&basis, &xi);
        let direct = inner(&x0, &tr.fine.exp_apply(&basis.matrix(&xi), &x0));
        let kak = tr.omega0(&g).unwrap();
        assert!((direct - kak.value).norm() < 1e-6);
        assert!((direct - omega0_closed_form(&g, 2)).norm() < 1e-6);
        assert!(kak.truncation_estimate < 1e-4);
    }
}

#[test]
fn adjoint_action_runs_through_the_inverse() {
    let basis = GeneratorBasis::new();
    let cfg = RepConfig::new(2, 6);
    let zero = adjoint_action_check(cfg, &basis.matrix(&AlgebraElement::zero())).unwrap();
    assert!(zero.inverse_residual < 1e-14 && zero.forward_residual < 1e-14);

    let mut xi = AlgebraElement::zero();
    xi.0[index_of(1, 2).unwrap()] = 0.8;
    xi.0[index_of(0, 5).unwrap()] = -0.4;
    let rot = adjoint_action_check(cfg, &basis.matrix(&xi)).unwrap();
    assert!(rot.inverse_residual < 1e-10, "{rot:?}");
    assert!(rot.forward_residual > 1e-2);

    let b = adjoint_action_check(cfg, &bergman::fock::boost_generator((0.05, 0.02))).unwrap();
    assert!(b.inverse_residual < 1e-6, "{b:?}");
}

#[test]
fn krylov_exponential_matches_dense_reference() {
    let basis = GeneratorBasis::new();
    let rep = Rep::build(RepConfig::new(2, 1)).unwrap();
    let x = basis.matrix(&random_algebra_element(&mut rng(4), 3.0));
    let op = rep.hat(&x).to_sparse();
    let n = rep.dim();
    let dense = nalgebra::DMatrix::from_fn(n, n, |i, j| op.get(i, j)).exp();
    let v = rep.lowest_state();
    let reference = &dense * nalgebra::DVector::from_column_slice(&v);
    for got in [rep.exp_apply(&x, &v), exp_apply(&op, c(1.0, 0.0), &v)] {
        let err: f64 = got.iter().zip(reference.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-11, "{err:.3e}");
    }
}

#[test]
fn sector_cap_is_enforced() {
    assert!(Rep::build(RepConfig::new(4, 8)).is_err());
    assert!(Rep::build(RepConfig::new(2, 2).with_cap(100)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hat_is_linear_and_anti_hermitian(s in any::<u64>()) {
        let basis = GeneratorBasis::new();
        let rep = Rep::build(RepConfig::new(2, 2)).unwrap();
        let mut r = rng(s);
        let (a, b) = (random_algebra_element(&mut r, 1.0), random_algebra_element(&mut r, 1.0));
        let sum = rep.hat(&basis.matrix(&(a + b))).to_sparse();
        let parts = rep.hat(&basis.matrix(&a)).to_sparse().add(&rep.hat(&basis.matrix(&b)).to_sparse());
        prop_assert!(sum.sub(&parts).max_abs_on_columns(|_| true) < 1e-13);
        prop_assert!(sum.adjoint().add(&sum).max_abs_on_columns(|_| true) < 1e-13);
    }

    #[test]
    fn exponential_preserves_the_norm(s in any::<u64>()) {
        let basis = GeneratorBasis::new();
        let rep = Rep::build(RepConfig::new(3, 3)).unwrap();
        let x = basis.matrix(&random_algebra_element(&mut rng(s), 1.5));
        let out = rep.exp_apply(&x, &rep.lowest_state());
        let norm = inner(&out, &out).re.sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-10);
    }
}
