use exactgeom::lattice::{anticanonical_cycle_check, build_surface_s};
use exactgeom::surface::{
    cycle_components, half_cycle_chern_check, m_class, movable_invariants, riemann_roch,
    strip_fixed_components, strip_fixed_components_random,
};
use exactgeom::EngineError;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn profile_small_cases() {
    assert_eq!(build_surface_s(4).unwrap().self_intersection_profile(), vec![-3, -2, -1]);
    assert_eq!(
        build_surface_s(6).unwrap().self_intersection_profile(),
        vec![-5, -2, -2, -2, -1]
    );
}

#[test]
fn rejects_small_n() {
    assert!(matches!(build_surface_s(3), Err(EngineError::InvalidN { n: 3, min: 4 })));
}

#[test]
fn cycle_matrix_is_cyclic_adjacency() {
    for n in 4..=16 {
        let s = build_surface_s(n).unwrap();
        let m = s.cycle_matrix();
        let len = 2 * (n - 1);
        let mut diag: Vec<i64> = s.self_intersection_profile();
        diag.extend(s.self_intersection_profile());
        for a in 0..len {
            for b in 0..len {
                let expected = if a == b {
                    diag[a]
                } else if (a + 1) % len == b || (b + 1) % len == a {
                    1
                } else {
                    0
                };
                assert_eq!(m[a][b], expected, "n={n} ({a},{b})");
            }
        }
    }
}

#[test]
fn adjacent_components_meet_once() {
    for n in [4, 9, 16] {
        let s = build_surface_s(n).unwrap();
        assert_eq!(s.dot(&s.component(1, false), &s.component(2, false)), 1);
    }
}

#[test]
fn form_is_unimodular_and_cycle_is_anticanonical() {
    for n in 4..=16 {
        let s = build_surface_s(n).unwrap();
        assert!(s.lattice().is_unimodular(), "n={n}");
        assert!(anticanonical_cycle_check(&s), "n={n}");
    }
}

#[test]
fn last_exceptional_classes_are_last_components() {
    for n in 4..=12 {
        let s = build_surface_s(n).unwrap();
        assert_eq!(s.e(n), s.component(n - 1, true), "n={n}");
        assert_eq!(s.ebar(n), s.component(n - 1, false), "n={n}");
    }
}

#[test]
fn euler_characteristic_of_anticanonical() {
    // 1 + K^2 with K^2 = 8 - 2n
    let s = build_surface_s(5).unwrap();
    assert_eq!(riemann_roch(&s, &(-s.canonical())).unwrap(), -1);
}

#[test]
fn fixed_part_small_case() {
    let s = build_surface_s(6).unwrap();
    let l = 4 * &(-s.canonical());
    let r = strip_fixed_components(&s, &l, &cycle_components(&s)).unwrap();
    let mult: Vec<i64> = ["C1", "C2", "C3", "C4", "C5"].iter().map(|c| r.multiplicity(c)).collect();
    assert_eq!(mult, vec![3, 3, 2, 1, 0]);
    let conj: Vec<i64> = ["Cb1", "Cb2", "Cb3", "Cb4", "Cb5"].iter().map(|c| r.multiplicity(c)).collect();
    assert_eq!(conj, vec![3, 3, 2, 1, 0]);
}

#[test]
fn movable_part_invariants() {
    for n in 4..=12 {
        let m = movable_invariants(&build_surface_s(n).unwrap()).unwrap();
        assert_eq!((m.l_squared, m.l_dot_c2, m.arithmetic_genus, m.chi_l_prime), (2, 1, 1, 1));
    }
}

#[test]
fn doubled_m_class_is_divisible() {
    for n in 4..=16 {
        let s = build_surface_s(n).unwrap();
        let h = m_class(&s, 1).unwrap();
        assert_eq!(&h.half + &h.half, h.double, "n={n}");
    }
}

#[test]
fn half_cycle_classes_are_arcs() {
    assert!(half_cycle_chern_check(&build_surface_s(4).unwrap(), 3).unwrap());
    assert!(half_cycle_chern_check(&build_surface_s(5).unwrap(), 1).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stripping_is_confluent(n in 4usize..=12, seed in any::<u64>()) {
        let s = build_surface_s(n).unwrap();
        let l = (n as i64 - 2) * &(-s.canonical());
        let comps = cycle_components(&s);
        let base = strip_fixed_components(&s, &l, &comps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let other = strip_fixed_components_random(&s, &l, &comps, &mut rng).unwrap();
        prop_assert_eq!(base.fixed, other.fixed);
        prop_assert_eq!(base.movable, other.movable);
    }

    #[test]
    fn small_multiples_have_square_zero_movable_part(n in 4usize..=12, m in 0i64..10) {
        let s = build_surface_s(n).unwrap();
        prop_assume!(m < n as i64 - 2);
        let l = m * &(-s.canonical());
        let r = strip_fixed_components(&s, &l, &cycle_components(&s)).unwrap();
        prop_assert_eq!(s.dot(&r.movable, &r.movable), 0);
    }

    #[test]
    fn euler_characteristic_is_integral(n in 4usize..=10, coeffs in proptest::collection::vec(-6i64..=6, 22)) {
        let s = build_surface_s(n).unwrap();
        let class = s.lattice().from_coeffs(coeffs[..2 * n + 2].to_vec()).unwrap();
        prop_assert!(riemann_roch(&s, &class).is_ok());
    }
}
