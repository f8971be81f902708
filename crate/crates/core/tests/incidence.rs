use exactgeom::axioms::{self, AxiomRegistry};
use exactgeom::incidence::checks::{
    bundle_algebra_verify, cascade_precondition_check, cascade_schedule, irreducibility_guard,
    l1_pairing_verify, m1_tables_verify, nonvan_ledgers, restriction_iso_checks,
    restriction_ledger_h0, rr_threefold, strict_sum_e_part,
};
use exactgeom::incidence::{
    bundle, build_incidence, complete_pairings_shuffled, complete_pairings_with, AnchorMode,
    DivSym, Side, Sym, Threefold,
};
use exactgeom::EngineError;
use num_rational::Rational64;
use proptest::prelude::*;

#[test]
fn l1_tables_at_six() {
    let t = l1_pairing_verify(&Threefold::new(6).unwrap()).unwrap();
    assert_eq!(t.on_c_ii, vec![0, 0, -1, -1, 0]);
    assert_eq!(t.on_delta, vec![0, 1, 1, 1, 3]);
    assert_eq!(t.on_gamma, vec![3, 2, 1, 0, 0]);
    assert!(t.pass());
}

#[test]
fn l1_tables_all_n() {
    for n in 4..=16 {
        let t = l1_pairing_verify(&Threefold::new(n).unwrap()).unwrap();
        assert!(t.diffs.is_empty(), "n={n}: {:?}", t.diffs);
        assert!(t.identity_holds && t.forms_agree, "n={n}");
    }
}

#[test]
fn m1_tables_at_seven() {
    let m = m1_tables_verify(&Threefold::new(7).unwrap()).unwrap();
    assert_eq!(m.on_c_ii, vec![0, 0, -1, -1, -1, 0]);
    assert_eq!(m.on_cbar_ii, vec![0; 6]);
    assert_eq!(m.on_delta, vec![0, 1, 1, 1, 1, 0]);
    assert_eq!(m.on_deltabar, vec![0, 0, 0, 0, 0, 4]);
    assert_eq!(m.on_gamma, vec![4, 3, 2, 1, 0, 0]);
    assert_eq!(m.on_gammabar, vec![0; 6]);
    assert_eq!(m.trivial_components.len(), 7);
    assert!(m.pass());
}

#[test]
fn table_is_conjugation_invariant() {
    for n in 4..=12 {
        let tf = Threefold::new(n).unwrap();
        assert!(tf.table.conjugation_defects().is_empty(), "n={n}");
    }
}

#[test]
fn literal_anchor_reading_is_inconsistent() {
    let cx = build_incidence(7).unwrap();
    assert!(matches!(
        complete_pairings_with(&cx, AnchorMode::Literal),
        Err(EngineError::Inconsistent(_))
    ));
}

#[test]
fn l1_trivial_on_last_components_only() {
    let tf = Threefold::new(6).unwrap();
    let l1 = bundle::l1_expr(6);
    assert!(tf.is_trivial_on(&l1, DivSym::E(Side::Plain, 5)).unwrap());
    assert!(tf.is_trivial_on(&l1, DivSym::E(Side::Bar, 5)).unwrap());
    assert!(!tf.is_trivial_on(&l1, DivSym::E(Side::Plain, 2)).unwrap());
}

#[test]
fn cascade_at_five() {
    let tf = Threefold::new(5).unwrap();
    let c = cascade_precondition_check(&tf, &bundle::l1_prime_expr(5), &cascade_schedule(5)).unwrap();
    assert_eq!(c.steps_per_side(), 3);
    assert!(c.steps.iter().all(|s| s.ruling_degree == -1));
    assert!(c.pass());
}

#[test]
fn restriction_maps_are_isomorphisms() {
    for n in 4..=10 {
        let checks = restriction_iso_checks(&Threefold::new(n).unwrap()).unwrap();
        assert!(checks.iter().all(|c| c.pass()), "n={n}");
    }
}

#[test]
fn strict_sum_exceptional_profile() {
    let e = strict_sum_e_part(4);
    let got: Vec<Rational64> = (1..4).map(|i| e.coeff(Sym::E(Side::Plain, i))).collect();
    assert_eq!(got, [2, 1, 0].map(Rational64::from_integer).to_vec());
}

#[test]
fn bundle_identities_hold() {
    for n in 4..=16 {
        let b = bundle_algebra_verify(&Threefold::new(n).unwrap()).unwrap();
        for id in &b.identities {
            assert!(id.holds, "n={n} {}: {:?}", id.name, id.diff);
        }
        assert_eq!(b.identities.len(), 5);
    }
}

#[test]
fn ledger_dimensions() {
    let reg = AxiomRegistry::standard();
    for n in 4..=12 {
        let tf = Threefold::new(n).unwrap();
        let l = restriction_ledger_h0(&tf, n - 2, &reg).unwrap();
        assert_eq!((l.restriction_h0, l.total), (n as i64, n as i64 + 1), "n={n}");
        assert!(!l.axioms_used.is_empty());
    }
}

#[test]
fn euler_characteristic_from_axioms() {
    let r = rr_threefold(&AxiomRegistry::standard()).unwrap();
    assert_eq!(r.chi, 0);
    assert_eq!(r.axioms_used.len(), 4);
}

#[test]
fn non_integral_chi_is_rejected() {
    let reg = AxiomRegistry::standard().with_value(axioms::ALPHA_CUBED, 1);
    assert!(matches!(rr_threefold(&reg), Err(EngineError::NonIntegral(_))));
}

#[test]
fn restricted_ledgers_vanish() {
    let reg = AxiomRegistry::standard();
    for n in 4..=12 {
        assert!(nonvan_ledgers(&Threefold::new(n).unwrap(), &reg).unwrap().pass(), "n={n}");
    }
}

#[test]
fn guard_values() {
    for n in 4..=16 {
        let g = irreducibility_guard(n);
        assert!(g.pass());
        assert_eq!(g.phi_m_doubled, Rational64::from_integer(-2));
        assert_eq!(g.phi_m_prime_doubled, Rational64::from_integer(2));
    }
}

#[test]
fn every_axiom_is_required() {
    let tf = Threefold::new(6).unwrap();
    for a in AxiomRegistry::standard().all() {
        let reg = AxiomRegistry::standard().without(a.id);
        let missing = matches!(restriction_ledger_h0(&tf, 4, &reg), Err(EngineError::MissingAxiom(_)))
            || matches!(rr_threefold(&reg), Err(EngineError::MissingAxiom(_)))
            || matches!(nonvan_ledgers(&tf, &reg), Err(EngineError::MissingAxiom(_)));
        assert!(missing, "{} unused", a.id);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn completion_ignores_constraint_order(n in 4usize..=9, seed in any::<u64>()) {
        let tf = Threefold::new(n).unwrap();
        let t = complete_pairings_shuffled(&tf.complex, AnchorMode::Resolved, seed).unwrap();
        prop_assert!(t.same_values(&tf.table));
    }
}
