use exactgeom::poly::{rat, var_names, MultiPoly};
use exactgeom::scroll::{
    build_instance, certify_not_square, double_conic_verify, factor_splitting_conic,
    fiber_restrict, hankel_generators, ideal_member, instance_from_seed, linear_form_from_roots,
    moduli_formulas, pull_to_curve, random_instance, root, roots_certified, smoothness_probe,
    splitting_point, verify_instance, z_vars, QuarticInstance,
};
use exactgeom::EngineError;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn z(n: usize, i: usize) -> MultiPoly {
    MultiPoly::var(&z_vars(n), i)
}

#[test]
fn linear_form_for_two_roots() {
    let f = linear_form_from_roots(4, &[root(1, 0), root(1, 1)]).unwrap();
    let expected = &z(4, 2) - &z(4, 1);
    assert!(f == expected || f == -&expected, "{f}");
}

#[test]
fn linear_form_vanishes_at_its_roots() {
    let roots = [root(1, 1), root(1, -1), root(1, 2)];
    let f = linear_form_from_roots(5, &roots).unwrap();
    let g = pull_to_curve(&f, 5).unwrap();
    for r in &roots {
        assert_eq!(g.evaluate(&[r[0].clone(), r[1].clone()]).unwrap(), rat(0));
    }
    let sp = splitting_point();
    assert_ne!(g.evaluate(&[sp[0].clone(), sp[1].clone()]).unwrap(), rat(0));
}

#[test]
fn linear_form_rejects_bad_roots() {
    assert!(matches!(
        linear_form_from_roots(5, &[root(1, 1), root(1, 1), root(1, 2)]),
        Err(EngineError::InvalidRoots(_))
    ));
    assert!(matches!(
        linear_form_from_roots(5, &[root(1, 1), root(0, 1), root(1, 2)]),
        Err(EngineError::InvalidRoots(_))
    ));
    assert!(linear_form_from_roots(5, &[root(1, 1)]).is_err());
}

#[test]
fn hankel_minors_at_five() {
    let gens = hankel_generators(5).unwrap();
    let expected = [
        &(&z(5, 0) * &z(5, 2)) - &(&z(5, 1) * &z(5, 1)),
        &(&z(5, 0) * &z(5, 3)) - &(&z(5, 1) * &z(5, 2)),
        &(&z(5, 1) * &z(5, 3)) - &(&z(5, 2) * &z(5, 2)),
    ];
    assert_eq!(gens.len(), 3);
    for e in &expected {
        assert!(gens.iter().any(|g| g == e || *g == -e), "missing {e}");
    }
}

#[test]
fn ideal_membership() {
    let m = &(&z(6, 1) * &z(6, 3)) - &(&z(6, 2) * &z(6, 2));
    assert!(ideal_member(&m, 6).unwrap());
    assert!(!ideal_member(&(&z(6, 0) * &z(6, 2)), 6).unwrap());
    for n in 4..=9 {
        for g in hankel_generators(n).unwrap() {
            assert!(ideal_member(&g, n).unwrap());
        }
    }
}

#[test]
fn quadric_validation() {
    let roots = [root(1, 1), root(1, 2)];
    let rank2 = &(&z(4, 3) * &z(4, 4)) + &(&z(4, 0) * &z(4, 1));
    assert!(build_instance(4, &roots, rank2).is_ok());
    let rank3 = &(&(&z(4, 3) * &z(4, 4)) + &(&z(4, 2) * &z(4, 2))) + &(&z(4, 0) * &z(4, 1));
    assert!(matches!(build_instance(4, &roots, rank3), Err(EngineError::InvalidQuadric(_))));
    let member = &(&z(4, 0) * &z(4, 2)) - &(&z(4, 1) * &z(4, 1));
    assert!(build_instance(4, &roots, member).is_err());
}

#[test]
fn splitting_conic_factors_into_distinct_lines() {
    let q = &(&z(5, 4) * &z(5, 4)) - &(&z(5, 5) * &z(5, 5).scale(&rat(2)));
    let c = factor_splitting_conic(&q, 5).unwrap();
    assert_eq!(c.rank, 2);
    assert!(c.verified());
}

#[test]
fn not_square_certificate() {
    let v = var_names("x", 3);
    let x = |i| MultiPoly::var(&v, i);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sq = (&x(0) + &x(1)).pow(2);
    assert!(!certify_not_square(&sq, &mut rng, 16).unwrap());
    let conic = &(&x(0) * &x(0)) - &(&x(1) * &x(2));
    assert!(certify_not_square(&conic, &mut rng, 16).unwrap());
}

#[test]
fn emitted_shape_at_four() {
    let inst = instance_from_seed(4, 1).unwrap();
    assert_eq!(inst.big_f.nvars(), 5);
    assert_eq!(inst.big_f.homogeneous_degree(), Some(4));
}

#[test]
fn json_round_trip() {
    let inst = instance_from_seed(6, 9).unwrap();
    let text = serde_json::to_string(&inst.to_json()).unwrap();
    let back = QuarticInstance::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.big_f, inst.big_f);
    assert_eq!(back.q, inst.q);
    assert_eq!(back.roots, inst.roots);
    let mut r1 = ChaCha8Rng::seed_from_u64(3);
    let mut r2 = ChaCha8Rng::seed_from_u64(3);
    let a = double_conic_verify(&inst, &mut r1).unwrap();
    let b = double_conic_verify(&back, &mut r2).unwrap();
    assert!(a.pass() && b.pass());
    assert_eq!(serde_json::to_value(&a).unwrap(), serde_json::to_value(&b).unwrap());
}

#[test]
fn smoothness_excludes_splitting_root() {
    let inst = instance_from_seed(6, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(matches!(smoothness_probe(&inst, 5, 4, &mut rng), Err(EngineError::OutOfRange(_))));
    assert!(smoothness_probe(&inst, 2, 4, &mut rng).unwrap().pass());
}

#[test]
fn moduli_identities() {
    for n in 4..=32 {
        for k in 2..=n {
            let m = moduli_formulas(n, k).unwrap();
            assert!(m.consistent(), "n={n} k={k}");
            let ni = n as i64;
            assert_eq!((m.h1_theta_z, m.h1_theta_s, m.h1_anticanonical), (7 * ni - 15, 4 * ni - 6, 2 * ni - 8));
            assert_eq!((m.dim_alpha_preimage, m.moduli_dim), (ni + 4, ni + 3));
        }
        assert_eq!(moduli_formulas(n, n).unwrap().dim_lb_k, n as i64 - 1);
    }
    assert!(moduli_formulas(6, 1).is_err());
    assert!(moduli_formulas(6, 7).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_instances_verify(n in 4usize..=7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(n, &mut rng).unwrap();
        prop_assert!(roots_certified(&inst).unwrap());
        let r = verify_instance(&inst, 3, &mut rng).unwrap();
        prop_assert!(r.pass());
    }

    #[test]
    fn adding_ideal_members_keeps_fibers(n in 4usize..=7, seed in any::<u64>(), k in 0usize..8, c in -5i64..=5) {
        let inst = instance_from_seed(n, seed).unwrap();
        let gens = hankel_generators(n).unwrap();
        let g = &gens[k % gens.len()];
        let h = &(g * &g.clone()).scale(&rat(c));
        let shifted = &inst.big_f + h;
        for lam in inst.special_fibers().iter().chain([root(1, 7), root(2, -3)].iter()) {
            prop_assert_eq!(
                fiber_restrict(&inst.big_f, n, lam).unwrap(),
                fiber_restrict(&shifted, n, lam).unwrap()
            );
        }
    }

    #[test]
    fn instances_are_deterministic(n in 4usize..=8, seed in any::<u64>()) {
        prop_assert_eq!(instance_from_seed(n, seed).unwrap().to_json(), instance_from_seed(n, seed).unwrap().to_json());
    }
}
