use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::complex::{CurveSym, DivSym, IncidenceComplex, Pushforward, Side};
use crate::error::{EngineError, Result};
use crate::lattice::build_surface_s;
use crate::linsolve::{to_integer, Equation, LinearSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Anchored,
    Inferred,
    Derived,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub value: i64,
    pub provenance: Provenance,
}

/// Which reading of the anchor list is inserted into the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnchorMode {
    None,
    Resolved,
    Literal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Anchor {
    pub id: String,
    pub divisor: DivSym,
    pub curve: CurveSym,
    pub value: i64,
}

/// Comparison of a stated anchor with the solved table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnchorCheck {
    pub id: String,
    pub divisor: Option<DivSym>,
    pub curve: CurveSym,
    pub literal: i64,
    pub solved: Option<i64>,
    pub consistent: bool,
    /// Divisors whose pairing with `curve` equals the literal value.
    pub matching_divisors: Vec<DivSym>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingTable {
    pub n: usize,
    #[serde(serialize_with = "ser_entries")]
    entries: BTreeMap<(DivSym, CurveSym), Entry>,
    pub anchor_checks: Vec<AnchorCheck>,
    pub equation_count: usize,
}

fn ser_entries<S: serde::Serializer>(
    e: &BTreeMap<(DivSym, CurveSym), Entry>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(e.len()))?;
    for ((d, c), v) in e {
        m.serialize_entry(&format!("({d},{c})"), v)?;
    }
    m.end()
}

/// Anchors as literally stated, with the second face anchor of the last index left out.
pub fn literal_anchors(n: usize) -> Vec<Anchor> {
    anchors(n, true)
}

/// Anchors with the two misread cells replaced by their consistent readings.
pub fn resolved_anchors(n: usize) -> Vec<Anchor> {
    anchors(n, false)
}

fn anchors(n: usize, literal: bool) -> Vec<Anchor> {
    use CurveSym::*;
    use DivSym::*;
    let p = Side::Plain;
    let mut out = Vec::new();
    let mut push = |id: &str, d: DivSym, c: CurveSym, v: i64| {
        out.push(Anchor {
            id: id.to_string(),
            divisor: d,
            curve: c,
            value: v,
        })
    };
    for i in 1..n {
        push("anchor.transversal", T, C(p, i, i), 0);
        push("anchor.transversal", T, Delta(p, i), 0);
        push("anchor.transversal", T, Gamma(p, i), 1);
    }
    for i in 2..n - 1 {
        push("anchor.middle", E(p, i), Delta(p, i), -1);
        push("anchor.face", E(p, i), C(p, i, i), -1);
        if literal {
            push("anchor.face", E(p, i), Gamma(p, i), -1);
        } else {
            push("anchor.face", E(p, i + 1), Gamma(p, i), -1);
        }
    }
    let ni = n as i64;
    push("anchor.first", E(p, 1), C(p, 1, 1), if literal { 1 - ni } else { 2 - ni });
    push("anchor.first", E(p, 1), Delta(p, 1), -1);
    push("anchor.first", E(p, 1), Gamma(p, 1), 0);
    push("anchor.first", E(p, 1), Gamma(Side::Bar, n - 1), 0);
    push("anchor.last", E(p, n - 1), C(p, n - 1, n - 1), -1);
    if literal {
        push("anchor.last", E(p, n - 1), Gamma(p, n - 1), -1);
    }
    out
}

struct Builder<'a> {
    cx: &'a IncidenceComplex,
    sys: LinearSystem,
    index: HashMap<(DivSym, CurveSym), usize>,
    keys: Vec<(DivSym, CurveSym)>,
    inferred: Vec<bool>,
}

impl<'a> Builder<'a> {
    fn new(cx: &'a IncidenceComplex) -> Self {
        let mut sys = LinearSystem::new();
        let mut index = HashMap::new();
        let mut keys = Vec::new();
        for &c in cx.curves() {
            for d in cx.divisors() {
                let v = sys.add_unknown(format!("({d},{c})"));
                index.insert((d, c), v);
                keys.push((d, c));
            }
        }
        let inferred = vec![false; keys.len()];
        Self {
            cx,
            sys,
            index,
            keys,
            inferred,
        }
    }

    fn fix(&mut self, d: DivSym, c: CurveSym, v: i64, label: String) {
        let var = self.index[&(d, c)];
        self.inferred[var] = true;
        self.sys.push(Equation::fix(var, v, label));
    }

    fn rules(&mut self) -> Result<()> {
        let s = build_surface_s(self.cx.n())?;
        let minus_k = -s.canonical();
        for &c in self.cx.curves() {
            let cont: Vec<DivSym> = self.cx.containing(c).iter().map(|e| e.sym()).collect();
            for d in self.cx.divisors() {
                if let CurveSym::L(i) = c {
                    let v = match d {
                        DivSym::T => 0,
                        _ => i64::from(self.cx.line_meets(i, d)),
                    };
                    self.fix(d, c, v, format!("line({d},{c})"));
                    continue;
                }
                if d == DivSym::T {
                    for &host in &cont {
                        let e = self.cx.component_of(host).expect("E");
                        let v = e.meet(c, e.fiber())?;
                        self.fix(d, c, v, format!("fiber-class({d},{c}) in {host}"));
                    }
                } else if !cont.contains(&d) {
                    for &host in &cont {
                        let e = self.cx.component_of(host).expect("E");
                        let v = match self.cx.face(host, d) {
                            Some(f) => e.meet(c, f)?,
                            None => 0,
                        };
                        self.fix(d, c, v, format!("restrict({d},{c}) in {host}"));
                    }
                } else {
                    for &other in cont.iter().filter(|&&o| o != d) {
                        let e = self.cx.component_of(other).expect("E");
                        let v = e.meet(c, c)?;
                        self.fix(d, c, v, format!("normal({d},{c}) via {other}"));
                    }
                }
            }
            let rhs = match self.cx.pushforward(c) {
                Pushforward::Component(side, j) => {
                    s.dot(&minus_k, &s.component(j, side == Side::Bar))
                }
                Pushforward::Point => 0,
                Pushforward::Line => 2,
            };
            let vars: Vec<usize> = self
                .cx
                .divisors()
                .into_iter()
                .map(|d| self.index[&(d, c)])
                .collect();
            self.sys
                .push(Equation::sum(&vars, rhs, format!("projection({c}) = {rhs}")));
        }
        Ok(())
    }

    fn anchors(&mut self, list: &[Anchor]) {
        for a in list {
            let var = self.index[&(a.divisor, a.curve)];
            self.sys.push(Equation::fix(
                var,
                a.value,
                format!("{}({},{}) = {}", a.id, a.divisor, a.curve, a.value),
            ));
        }
    }
}

fn assemble(
    cx: &IncidenceComplex,
    mode: AnchorMode,
    shuffle: Option<u64>,
) -> Result<PairingTable> {
    let mut b = Builder::new(cx);
    b.rules()?;
    let inserted = match mode {
        AnchorMode::None => Vec::new(),
        AnchorMode::Resolved => resolved_anchors(cx.n()),
        AnchorMode::Literal => literal_anchors(cx.n()),
    };
    b.anchors(&inserted);
    if let Some(seed) = shuffle {
        let mut perm: Vec<usize> = (0..b.sys.equations().len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        b.sys.permute_equations(&perm);
    }
    let sol = b.sys.solve()?;
    let mut entries = BTreeMap::new();
    for (v, key) in b.keys.iter().enumerate() {
        let value = int_entry(&sol[v], &b.sys, v)?;
        let anchored = inserted
            .iter()
            .any(|a| (a.divisor, a.curve) == *key);
        let provenance = if anchored {
            Provenance::Anchored
        } else if b.inferred[v] {
            Provenance::Inferred
        } else {
            Provenance::Derived
        };
        entries.insert(*key, Entry { value, provenance });
    }
    let mut table = PairingTable {
        n: cx.n(),
        entries,
        anchor_checks: Vec::new(),
        equation_count: b.sys.equations().len(),
    };
    table.anchor_checks = check_anchors(&table, cx);
    Ok(table)
}

fn int_entry(q: &BigRational, sys: &LinearSystem, v: usize) -> Result<i64> {
    to_integer(q).ok_or_else(|| EngineError::NonIntegral(format!("{} = {q}", sys.name(v))))
}

fn check_anchors(table: &PairingTable, cx: &IncidenceComplex) -> Vec<AnchorCheck> {
    let n = cx.n();
    let mut out = Vec::new();
    for a in literal_anchors(n) {
        let solved = table.get(a.divisor, a.curve).ok();
        let matching = cx
            .divisors()
            .into_iter()
            .filter(|&d| table.get(d, a.curve).ok() == Some(a.value))
            .collect();
        out.push(AnchorCheck {
            id: a.id,
            divisor: Some(a.divisor),
            curve: a.curve,
            literal: a.value,
            solved,
            consistent: solved == Some(a.value),
            matching_divisors: matching,
        });
    }
    out
}

/// Completes the pairing table from incidence rules, projection constraints and the resolved anchors.
pub fn complete_pairings(cx: &IncidenceComplex) -> Result<PairingTable> {
    assemble(cx, AnchorMode::Resolved, None)
}

pub fn complete_pairings_with(cx: &IncidenceComplex, mode: AnchorMode) -> Result<PairingTable> {
    assemble(cx, mode, None)
}

/// Same completion with the constraint list shuffled by `seed`.
pub fn complete_pairings_shuffled(
    cx: &IncidenceComplex,
    mode: AnchorMode,
    seed: u64,
) -> Result<PairingTable> {
    assemble(cx, mode, Some(seed))
}

impl PairingTable {
    pub fn get(&self, d: DivSym, c: CurveSym) -> Result<i64> {
        self.entries
            .get(&(d, c))
            .map(|e| e.value)
            .ok_or_else(|| EngineError::OutOfRange(format!("no pairing ({d},{c})")))
    }

    pub fn entry(&self, d: DivSym, c: CurveSym) -> Option<&Entry> {
        self.entries.get(&(d, c))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(DivSym, CurveSym), &Entry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Cells that differ from their conjugate cell.
    pub fn conjugation_defects(&self) -> Vec<(DivSym, CurveSym)> {
        self.entries
            .iter()
            .filter(|((d, c), e)| {
                self.entries.get(&(d.conj(), c.conj())).map(|x| x.value) != Some(e.value)
            })
            .map(|(k, _)| *k)
            .collect()
    }

    /// Same values everywhere, ignoring provenance.
    pub fn same_values(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .all(|(k, e)| other.entries.get(k).map(|x| x.value) == Some(e.value))
    }

    /// Second face anchor of the last index: divisors realising the stated value.
    pub fn last_face_resolution(&self) -> Option<&AnchorCheck> {
        self.anchor_checks
            .iter()
            .rev()
            .find(|a| a.id == "anchor.last" && matches!(a.curve, CurveSym::Gamma(..)))
    }
}
