use exactgeom::axioms::{self, AxiomRegistry};
use exactgeom::report::{list_checks, run, RunConfig, Status};
use exactgeom::EngineError;
use std::collections::BTreeSet;

fn quick(n: usize, filter: &str) -> RunConfig {
    let mut c = RunConfig::single(n).with_filter(filter);
    c.instances = 3;
    c.samples = 2;
    c
}

#[test]
fn ids_are_unique() {
    let ids: BTreeSet<_> = list_checks().iter().map(|d| d.id).collect();
    assert_eq!(ids.len(), list_checks().len());
}

#[test]
fn usage_errors() {
    assert!(matches!(RunConfig::single(3).validate(), Err(EngineError::InvalidN { .. })));
    assert!(RunConfig::new(8, 6).validate().is_err());
    assert!(RunConfig::single(6).with_filter("[").validate().is_err());
    assert!(RunConfig::single(6).with_filter("nothing.*").validate().is_err());
    assert!(run(&RunConfig::single(3)).is_err());
}

#[test]
fn filter_accepts_glob_lists() {
    let sel = RunConfig::single(6).with_filter("surface.profile,moduli.*").selected().unwrap();
    let ids: Vec<_> = sel.iter().map(|d| d.id).collect();
    assert_eq!(ids, vec!["surface.profile", "moduli.identities", "moduli.values"]);
}

#[test]
fn full_run_at_seven_has_no_failures() {
    let mut c = RunConfig::single(7);
    c.instances = 3;
    c.samples = 2;
    let r = run(&c).unwrap();
    assert_eq!(r.summary.fail, 0, "{}", r.to_text());
    assert_eq!(r.checks.len(), list_checks().len());
    for rec in r.checks.iter().filter(|c| c.status == Status::Flagged) {
        assert!(rec.open_question.is_some(), "{}", rec.id);
    }
    assert!(r.ok());
}

#[test]
fn reports_are_byte_identical() {
    let c = quick(6, "scroll.*,surface.confluence,incidence.table-unique");
    assert_eq!(run(&c).unwrap().to_json(), run(&c).unwrap().to_json());
}

#[test]
fn seed_changes_instances_only() {
    let mut a = quick(5, "scroll.*");
    let mut b = a.clone();
    a.seed = 1;
    b.seed = 2;
    let (ra, rb) = (run(&a).unwrap(), run(&b).unwrap());
    assert_eq!(ra.summary, rb.summary);
    assert_ne!(ra.to_json(), rb.to_json());
}

#[test]
fn failures_carry_diffs() {
    let mut c = quick(6, "rr.*,ledger.*");
    c.registry = AxiomRegistry::standard().with_value(axioms::C1C2, 48);
    let r = run(&c).unwrap();
    let rec = r.find("rr.chi-alpha2", 6).unwrap();
    assert_eq!(rec.status, Status::Fail);
    assert!(!rec.diff.is_empty());
    assert!(!r.ok());
}

#[test]
fn stripped_registry_fails_ledgers() {
    let mut c = quick(6, "ledger.*,rr.*,nonvan.*");
    c.registry = AxiomRegistry::empty();
    let r = run(&c).unwrap();
    assert_eq!(r.summary.fail, r.checks.len());
    assert!(r.checks.iter().all(|c| c.diff.iter().any(|d| d.contains("axiom registry incomplete"))));
    assert!(r.axioms.is_empty());
}

#[test]
fn fail_fast_stops_early() {
    let mut c = RunConfig::new(5, 8).with_filter("rr.*");
    c.registry = AxiomRegistry::standard().with_value(axioms::C1C2, 48);
    c.fail_fast = true;
    let r = run(&c).unwrap();
    assert_eq!(r.checks.len(), 1);
}

#[test]
fn axiom_list_names_consumers() {
    let r = run(&quick(6, "ledger.*,rr.*")).unwrap();
    let rr = r.axioms.iter().find(|a| a.id == axioms::ALPHA_CUBED).unwrap();
    assert_eq!(rr.used_by, vec!["rr.chi-alpha2@6".to_string()]);
}
