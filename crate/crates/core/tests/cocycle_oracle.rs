mod common;

use qenv_core::cocycle::{
    extract_nontrivial_cocycle, is_class_function_coboundary, pair_count, pair_index, symmetric_cocycle_system,
    symmetric_h2, verify_cocycle, CocycleCheck, Rational, SymmetricCochain,
};
use qenv_core::group::FiniteGroup;
use qenv_core::linalg::int::int;
use qenv_core::linalg::smith_normal_form;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn fixtures_below_order_64_have_trivial_symmetric_cohomology() {
    for r in common::references().iter().filter(|r| r.order < 64) {
        let g = common::load(&r.name);
        let h = symmetric_h2(&g).unwrap();
        assert!(h.is_trivial(), "{}: {:?}", r.name, h.invariant_factors);
        if r.order <= 16 {
            assert!(extract_nontrivial_cocycle(&g).unwrap().is_none(), "{}", r.name);
        }
    }
}

#[test]
fn coboundary_matrix_is_annihilated() {
    for name in ["c1", "c2", "s3", "q8", "g16_3"] {
        let g = common::load(name);
        let (m, b) = symmetric_cocycle_system(&g);
        let n = g.order();
        assert_eq!((m.rows(), m.cols()), (n * n * n, pair_count(n)));
        assert_eq!((b.rows(), b.cols()), (pair_count(n), g.conjugacy_classes().class_count()));
        assert!(m.mul(&b).unwrap().is_zero(), "{}", name);
    }
}

#[test]
fn s3_system_has_no_torsion() {
    let g = common::load("s3");
    let (m, _) = symmetric_cocycle_system(&g);
    let s = smith_normal_form(&m, false).unwrap();
    assert!(s.torsion().is_empty());
    assert_eq!(s.nullity, pair_count(6) - s.rank);
}

/// For every f: G -> Z/m, df is symmetric iff f is a class function.
#[test]
fn symmetric_coboundaries_come_from_class_functions() {
    for name in ["s3", "d8", "q8", "c4xc2"] {
        let g = common::load(name);
        let n = g.order();
        let cp = g.conjugacy_classes();
        let m: u64 = if n <= 6 { 3 } else { 2 };
        let total = m.pow(n as u32);
        for code in 0..total {
            let f: Vec<u64> = (0..n).map(|i| code / m.pow(i as u32) % m).collect();
            let df = |a: usize, b: usize| (f[a - 1] + f[b - 1] + m - f[g.mul(a, b) - 1]) % m;
            let symmetric = g.elements().all(|a| g.elements().all(|b| df(a, b) == df(b, a)));
            let class_fn = g.elements().all(|a| f[a - 1] == f[cp.representatives()[cp.class_of(a) - 1] - 1]);
            assert_eq!(symmetric, class_fn, "{} f={:?}", name, f);
        }
    }
}

fn random_class_function_coboundary(g: &FiniteGroup, rng: &mut ChaCha8Rng, den: i64) -> SymmetricCochain {
    let cp = g.conjugacy_classes();
    let f: Vec<i64> = (0..cp.class_count()).map(|_| rng.gen_range(0..den)).collect();
    let fv = |x: usize| f[cp.class_of(x) - 1];
    let mut alpha = SymmetricCochain::zero(g.order());
    for a in g.elements() {
        for b in g.elements().filter(|&b| b >= a) {
            let v = fv(a) + fv(b) - fv(g.mul(a, b));
            alpha.set(a, b, Rational::from_parts_signed(int(v), int(den)));
        }
    }
    alpha
}

#[test]
fn random_coboundaries_verify_and_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in ["s3", "q8", "d16", "g32_6"] {
        let g = common::load(name);
        for den in [2, 3, 8] {
            let alpha = random_class_function_coboundary(&g, &mut rng, den);
            assert_eq!(verify_cocycle(&g, &alpha).unwrap(), CocycleCheck::Cocycle);
            assert!(is_class_function_coboundary(&g, &alpha).unwrap(), "{}", name);
        }
    }
}

#[test]
fn a_lone_perturbation_is_detected() {
    let g = common::load("q8");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut alpha = random_class_function_coboundary(&g, &mut rng, 4);
    let old = alpha.get(3, 5).clone();
    alpha.set(3, 5, old + Rational::from_parts_signed(int(1), int(3)));
    assert!(matches!(verify_cocycle(&g, &alpha).unwrap(), CocycleCheck::NotCocycle { .. }));
}

#[test]
fn zero_cochain_is_a_cocycle() {
    for name in ["c1", "s3", "g16_13"] {
        let g = common::load(name);
        assert_eq!(verify_cocycle(&g, &SymmetricCochain::zero(g.order())).unwrap(), CocycleCheck::Cocycle);
    }
    assert_eq!(pair_index(3, 1), pair_index(1, 3));
}

#[test]
fn normalisation_vanishes_on_the_identity_and_keeps_the_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in ["s3", "d8", "g16_3"] {
        let g = common::load(name);
        let alpha = random_class_function_coboundary(&g, &mut rng, 6).normalized();
        assert!((1..=g.order()).all(|h| *alpha.get(1, h) == Rational::ZERO), "{}", name);
        assert_eq!(verify_cocycle(&g, &alpha).unwrap(), CocycleCheck::Cocycle);
        assert!(is_class_function_coboundary(&g, &alpha).unwrap());
        assert_eq!(alpha.normalized(), alpha);
    }
}
