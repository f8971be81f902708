use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::Zero;
use serde::Serialize;

use super::bundle::{self, q, BundleExpression, Sym};
use super::complex::{build_incidence, CurveSym, DivSym, IncidenceComplex, Pushforward, Side};
use super::pairing::{complete_pairings, PairingTable};
use crate::axioms::{self, AxiomRegistry, AxiomTrail};
use crate::error::{EngineError, Result};
use crate::lattice::{build_surface_s, DivisorClass, SurfaceS};
use crate::linsolve::{to_integer, Equation, LinearSystem};
use crate::surface::{chern_signs, half_cycle_arc, m_restriction_table, riemann_roch};

/// Completed threefold data for one `n`.
#[derive(Clone, Debug)]
pub struct Threefold {
    pub complex: IncidenceComplex,
    pub table: PairingTable,
    pub surface: SurfaceS,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellDiff {
    pub cell: String,
    pub expected: i64,
    pub computed: i64,
}

fn diff_cells(out: &mut Vec<CellDiff>, cell: String, expected: i64, computed: i64) {
    if expected != computed {
        out.push(CellDiff {
            cell,
            expected,
            computed,
        });
    }
}

impl Threefold {
    pub fn new(n: usize) -> Result<Self> {
        let complex = build_incidence(n)?;
        let table = complete_pairings(&complex)?;
        let surface = build_surface_s(n)?;
        Ok(Self {
            complex,
            table,
            surface,
        })
    }

    pub fn n(&self) -> usize {
        self.complex.n()
    }

    fn surface_pairing(&self, cls: &DivisorClass, c: CurveSym) -> i64 {
        match self.complex.pushforward(c) {
            Pushforward::Component(side, j) => {
                self.surface.dot(cls, &self.surface.component(j, side == Side::Bar))
            }
            _ => 0,
        }
    }

    /// Degree of a formal expression on a curve of the first blowup.
    pub fn degree(&self, e: &BundleExpression, c: CurveSym) -> Result<Rational64> {
        let mut total = Rational64::zero();
        for (s, k) in e.terms() {
            let d = match *s {
                Sym::T | Sym::E(..) => {
                    self.table.get(bundle::table_symbol(*s).expect("table symbol"), c)?
                }
                Sym::PullF => match self.complex.pushforward(c) {
                    Pushforward::Line => 2,
                    _ => self.surface_pairing(&-self.surface.canonical(), c),
                },
                Sym::PullAlpha(j) => self.surface_pairing(&self.surface.alpha(j), c),
                other => {
                    return Err(EngineError::OutOfRange(format!(
                        "symbol {other} has no pairing on the first blowup"
                    )))
                }
            };
            total += *k * q(d);
        }
        Ok(total)
    }

    pub fn degree_int(&self, e: &BundleExpression, c: CurveSym) -> Result<i64> {
        let d = self.degree(e, c)?;
        if d.is_integer() {
            Ok(d.to_integer())
        } else {
            Err(EngineError::NonIntegral(format!("degree of {e} on {c} is {d}")))
        }
    }

    /// Degrees on every curve contained in a component.
    pub fn degrees_on(&self, e: &BundleExpression, d: DivSym) -> Result<Vec<(CurveSym, i64)>> {
        let comp = self
            .complex
            .component_of(d)
            .ok_or_else(|| EngineError::OutOfRange(format!("{d} is not a component")))?;
        comp.curves
            .iter()
            .map(|&c| Ok((c, self.degree_int(e, c)?)))
            .collect()
    }

    pub fn is_trivial_on(&self, e: &BundleExpression, d: DivSym) -> Result<bool> {
        Ok(self.degrees_on(e, d)?.iter().all(|(_, v)| *v == 0))
    }

    /// The class on a component whose pairings with its curves match the expression.
    pub fn restricted_class(&self, e: &BundleExpression, d: DivSym) -> Result<DivisorClass> {
        let comp = self
            .complex
            .component_of(d)
            .ok_or_else(|| EngineError::OutOfRange(format!("{d} is not a component")))?;
        let lat = comp.tower.lattice();
        let r = lat.rank();
        let mut sys = LinearSystem::new();
        for name in lat.names() {
            sys.add_unknown(name.clone());
        }
        for &c in &comp.curves {
            let cls = comp.class(c)?;
            let mut terms = Vec::new();
            for k in 0..r {
                let mut v = 0;
                for (i, &ci) in cls.coeffs().iter().enumerate() {
                    v += ci * lat.form()[i][k];
                }
                if v != 0 {
                    terms.push((k, BigRational::from_integer(BigInt::from(v))));
                }
            }
            let deg = self.degree_int(e, c)?;
            sys.push(Equation {
                terms,
                rhs: BigRational::from_integer(BigInt::from(deg)),
                label: format!("deg on {c}"),
            });
        }
        let sol = sys.solve()?;
        let coeffs = sol
            .iter()
            .map(|x| to_integer(x).ok_or_else(|| EngineError::NonIntegral(format!("{x}"))))
            .collect::<Result<Vec<_>>>()?;
        lat.from_coeffs(coeffs)
    }
}

pub fn l1_on_c_ii_expected(n: usize, i: usize) -> i64 {
    if i == 1 || i == 2 || i == n - 1 {
        0
    } else {
        -1
    }
}

pub fn l1_on_delta_expected(n: usize, i: usize) -> i64 {
    if i == 1 {
        0
    } else if i < n - 1 {
        1
    } else {
        n as i64 - 3
    }
}

pub fn l1_on_gamma_expected(n: usize, i: usize) -> i64 {
    if i <= n - 2 {
        n as i64 - 2 - i as i64
    } else {
        0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct L1Table {
    pub n: usize,
    pub on_c_ii: Vec<i64>,
    pub on_delta: Vec<i64>,
    pub on_gamma: Vec<i64>,
    /// Same cells evaluated through the pullback of F instead of T.
    pub forms_agree: bool,
    pub identity_holds: bool,
    pub diffs: Vec<CellDiff>,
}

impl L1Table {
    pub fn pass(&self) -> bool {
        self.diffs.is_empty() && self.forms_agree && self.identity_holds
    }
}

/// Degrees of the first line bundle on the curves over the blown points and faces.
pub fn l1_pairing_verify(tf: &Threefold) -> Result<L1Table> {
    let n = tf.n();
    let l1 = bundle::l1_expr(n);
    let via_t = bundle::eliminate_pull_f(&l1, n);
    let identity_holds = via_t == bundle::l1_via_t_expected(n);
    let p = Side::Plain;
    let mut t = L1Table {
        n,
        on_c_ii: Vec::new(),
        on_delta: Vec::new(),
        on_gamma: Vec::new(),
        forms_agree: true,
        identity_holds,
        diffs: Vec::new(),
    };
    for i in 1..n {
        for (curve, store, expected, tag) in [
            (CurveSym::C(p, i, i), 0, l1_on_c_ii_expected(n, i), "(L1,C_ii)"),
            (CurveSym::Delta(p, i), 1, l1_on_delta_expected(n, i), "(L1,Delta_i)"),
            (CurveSym::Gamma(p, i), 2, l1_on_gamma_expected(n, i), "(L1,Gamma_i)"),
        ] {
            let v = tf.degree_int(&via_t, curve)?;
            let w = tf.degree_int(&l1, curve)?;
            t.forms_agree &= v == w;
            match store {
                0 => t.on_c_ii.push(v),
                1 => t.on_delta.push(v),
                _ => t.on_gamma.push(v),
            }
            diff_cells(&mut t.diffs, format!("{tag}(L1,{curve})"), expected, v);
        }
    }
    Ok(t)
}

/// The first line bundle is trivial on the last component and its conjugate.
pub fn triviality_check(tf: &Threefold) -> Result<bool> {
    let n = tf.n();
    let l1 = bundle::l1_expr(n);
    Ok(tf.is_trivial_on(&l1, DivSym::E(Side::Plain, n - 1))?
        && tf.is_trivial_on(&l1, DivSym::E(Side::Bar, n - 1))?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CascadeStep {
    pub round: usize,
    pub component: usize,
    pub side: Side,
    pub ruling_degree: i64,
    pub blown_degree: Option<i64>,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CascadeReport {
    pub identity_holds: bool,
    pub steps: Vec<CascadeStep>,
}

impl CascadeReport {
    pub fn pass(&self) -> bool {
        self.identity_holds && self.steps.iter().all(|s| s.ok)
    }

    pub fn steps_per_side(&self) -> usize {
        self.steps.iter().filter(|s| s.side == Side::Plain).count()
    }
}

/// Triangular subtraction schedule as (round, component) pairs.
pub fn cascade_schedule(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 1..=n.saturating_sub(3) {
        for j in n - r..n {
            out.push((r, j));
        }
    }
    out
}

/// Replays the subtraction schedule, testing degree -1 on the ruling and 0 on blown curves.
pub fn cascade_precondition_check(
    tf: &Threefold,
    expr: &BundleExpression,
    schedule: &[(usize, usize)],
) -> Result<CascadeReport> {
    let n = tf.n();
    let identity_holds = bundle::l1_prime_expr(n) == bundle::l1_prime_expected(n);
    let mut current = expr.clone();
    let mut steps = Vec::new();
    for &(round, j) in schedule {
        for side in Side::both() {
            let probes = bundle::cascade_probes(side, j, n);
            let ruling = tf.degree_int(&current, probes[0])?;
            let blown = match probes.get(1) {
                Some(&c) => Some(tf.degree_int(&current, c)?),
                None => None,
            };
            steps.push(CascadeStep {
                round,
                component: j,
                side,
                ruling_degree: ruling,
                blown_degree: blown,
                ok: ruling == -1 && blown.unwrap_or(0) == 0,
            });
        }
        current = current.minus(&bundle::pair("Z1", j, q(1)));
    }
    Ok(CascadeReport {
        identity_holds,
        steps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsoKind {
    /// The kernel restricts to degree -1 on the ruling and 0 on blown curves.
    AcyclicKernel,
    /// The restriction is a multiple of a (-1)-curve disjoint from the targets.
    RigidFixed,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoCheck {
    pub map: usize,
    pub component: DivSym,
    pub targets: Vec<CurveSym>,
    pub restricted: String,
    pub kind: Option<IsoKind>,
}

impl IsoCheck {
    pub fn pass(&self) -> bool {
        self.kind.is_some()
    }
}

fn iso_check(tf: &Threefold, map: usize, d: DivSym, targets: Vec<CurveSym>) -> Result<IsoCheck> {
    let n = tf.n();
    let l1 = bundle::l1_expr(n);
    let comp = tf.complex.component_of(d).expect("component");
    let lat = comp.tower.lattice();
    let m = tf.restricted_class(&l1, d)?;
    let mut kernel = m.clone();
    for &t in &targets {
        kernel = &kernel - &comp.class(t)?;
    }
    let blown: Vec<CurveSym> = comp
        .curves
        .iter()
        .copied()
        .filter(|c| matches!(c, CurveSym::Delta(..)))
        .collect();
    let fiber = comp.class(comp.fiber())?;
    let mut acyclic = lat.intersect(&kernel, &fiber)? == -1;
    for &b in &blown {
        acyclic &= lat.intersect(&kernel, &comp.class(b)?)? == 0;
    }
    let mut kind = acyclic.then_some(IsoKind::AcyclicKernel);
    if kind.is_none() {
        for &c in &comp.curves {
            let cls = comp.class(c)?;
            if lat.square(&cls)? != -1 {
                continue;
            }
            let k = lat.intersect(&m, &cls)?;
            if k > 0 || -k * &cls != m {
                continue;
            }
            let mut disjoint = true;
            for &t in &targets {
                let tc = comp.class(t)?;
                disjoint &= lat.intersect(&cls, &tc)? == 0 && lat.intersect(&m, &tc)? == 0;
            }
            if disjoint {
                kind = Some(IsoKind::RigidFixed);
                break;
            }
        }
    }
    Ok(IsoCheck {
        map,
        component: d,
        targets,
        restricted: m.to_string(),
        kind,
    })
}

/// Degree conditions behind the three restriction isomorphisms on the cylinder.
pub fn restriction_iso_checks(tf: &Threefold) -> Result<Vec<IsoCheck>> {
    let n = tf.n();
    let mut out = Vec::new();
    for side in Side::both() {
        for i in 3..=n - 2 {
            out.push(iso_check(tf, 1, DivSym::E(side, i), vec![CurveSym::Gamma(side, i)])?);
        }
        out.push(iso_check(
            tf,
            2,
            DivSym::E(side, 1),
            vec![CurveSym::Gamma(side.conj(), n - 1)],
        )?);
        out.push(iso_check(
            tf,
            3,
            DivSym::E(side, 2),
            vec![CurveSym::Gamma(side, 1), CurveSym::Gamma(side, 2)],
        )?);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerResult {
    pub n: usize,
    pub fibers: usize,
    pub h0_e: i64,
    pub h0_fiber: i64,
    pub overlap: i64,
    pub restriction_h0: i64,
    pub kernel_h0: i64,
    pub total: i64,
    pub iso_checks: Vec<IsoCheck>,
    pub cascade_steps: usize,
    pub axioms_used: Vec<String>,
}

/// Dimension ledger for the restriction to E and `fibers` smooth fibers.
pub fn restriction_ledger_h0(
    tf: &Threefold,
    fibers: usize,
    registry: &AxiomRegistry,
) -> Result<LedgerResult> {
    let n = tf.n();
    let mut trail = AxiomTrail::new(registry);
    if !triviality_check(tf)? {
        return Err(EngineError::Inconsistent(
            "L1 is not trivial on the last components".into(),
        ));
    }
    let iso_checks = restriction_iso_checks(tf)?;
    if let Some(bad) = iso_checks.iter().find(|c| !c.pass()) {
        return Err(EngineError::Inconsistent(format!(
            "restriction map ({}) on {} fails its degree condition",
            bad.map, bad.component
        )));
    }
    let h0_e = trail.take(axioms::H0_E_L1)?;
    let h0_fiber = trail.take(axioms::H0_SK_L1)?;
    trail.take(axioms::H1_LPRIME)?;
    let l1 = bundle::l1_expr(n);
    let mut overlap = 0;
    for side in Side::both() {
        for j in 1..n {
            let d = tf.degree_int(&l1, CurveSym::G(side, j))?;
            if d < 0 {
                return Err(EngineError::Inconsistent(format!("negative cycle degree on {}", CurveSym::G(side, j))));
            }
            overlap += d;
        }
    }
    let adjoint = &surface_movable(tf)? + &tf.surface.canonical();
    let kernel_on_fiber = riemann_roch(&tf.surface, &adjoint)?;
    if h0_fiber - kernel_on_fiber != overlap {
        return Err(EngineError::Inconsistent(format!(
            "fiber restriction count {h0_fiber} - {kernel_on_fiber} != {overlap}"
        )));
    }
    trail.take(axioms::REST_SURJECTIVE)?;
    trail.take(axioms::DIFF_SURJECTIVE)?;
    let f = fibers as i64;
    let restriction_h0 = h0_e + f * h0_fiber - f * overlap;
    let schedule = cascade_schedule(n);
    let cascade = cascade_precondition_check(tf, &bundle::l1_prime_expr(n), &schedule)?;
    if !cascade.pass() {
        return Err(EngineError::Inconsistent("vanishing cascade fails".into()));
    }
    let kernel_h0 = trail.take(axioms::KERNEL_CHAIN)?;
    trail.take(axioms::H1_OZ)?;
    Ok(LedgerResult {
        n,
        fibers,
        h0_e,
        h0_fiber,
        overlap,
        restriction_h0,
        kernel_h0,
        total: restriction_h0 + kernel_h0,
        iso_checks,
        cascade_steps: cascade.steps_per_side(),
        axioms_used: trail.finish(),
    })
}

fn surface_movable(tf: &Threefold) -> Result<DivisorClass> {
    let s = &tf.surface;
    let n = s.n() as i64;
    let comps = crate::surface::cycle_components(s);
    Ok(crate::surface::strip_fixed_components(s, &((n - 2) * &(-s.canonical())), &comps)?.movable)
}

pub fn m1_on_c_ii_expected(n: usize, i: usize, conj: bool) -> i64 {
    if conj || i == 1 || i == 2 || i == n - 1 {
        0
    } else {
        -1
    }
}

pub fn m1_on_delta_expected(n: usize, i: usize, conj: bool) -> i64 {
    match (conj, i == 1 || i == n - 1) {
        (false, true) => 0,
        (false, false) => 1,
        (true, _) if i == n - 1 => n as i64 - 3,
        (true, _) => 0,
    }
}

pub fn m1_on_gamma_expected(n: usize, i: usize, conj: bool) -> i64 {
    if conj || i == n - 1 {
        0
    } else {
        n as i64 - i as i64 - 2
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct M1Tables {
    pub n: usize,
    pub pullback_on_c: Vec<i64>,
    pub pullback_on_cbar: Vec<i64>,
    pub surface_table_agrees: bool,
    pub on_c_ii: Vec<i64>,
    pub on_cbar_ii: Vec<i64>,
    pub on_delta: Vec<i64>,
    pub on_deltabar: Vec<i64>,
    pub on_gamma: Vec<i64>,
    pub on_gammabar: Vec<i64>,
    pub trivial_components: Vec<DivSym>,
    pub diffs: Vec<CellDiff>,
}

impl M1Tables {
    pub fn pass(&self) -> bool {
        self.diffs.is_empty() && self.surface_table_agrees && self.trivial_components.len() == self.n
    }
}

pub fn m1_tables_verify(tf: &Threefold) -> Result<M1Tables> {
    let n = tf.n();
    let pm = bundle::m_expr(n, 1).pullback("Z1");
    let m1 = bundle::m1_expr(n);
    let surf = m_restriction_table(&tf.surface, 1)?;
    let mut t = M1Tables {
        n,
        pullback_on_c: Vec::new(),
        pullback_on_cbar: Vec::new(),
        surface_table_agrees: true,
        on_c_ii: Vec::new(),
        on_cbar_ii: Vec::new(),
        on_delta: Vec::new(),
        on_deltabar: Vec::new(),
        on_gamma: Vec::new(),
        on_gammabar: Vec::new(),
        trivial_components: Vec::new(),
        diffs: Vec::new(),
    };
    for i in 1..n {
        let pc = tf.degree_int(&pm, CurveSym::C(Side::Plain, i, i))?;
        let pcb = tf.degree_int(&pm, CurveSym::C(Side::Bar, i, i))?;
        t.surface_table_agrees &= pc == surf.on_c[i - 1] && pcb == surf.on_cbar[i - 1];
        t.pullback_on_c.push(pc);
        t.pullback_on_cbar.push(pcb);
        for (conj, side) in [(false, Side::Plain), (true, Side::Bar)] {
            let c = tf.degree_int(&m1, CurveSym::C(side, i, i))?;
            let d = tf.degree_int(&m1, CurveSym::Delta(side, i))?;
            let g = tf.degree_int(&m1, CurveSym::Gamma(side, i))?;
            let mark = if conj { "b" } else { "" };
            diff_cells(&mut t.diffs, format!("(M1,C{mark}{i},{i})"), m1_on_c_ii_expected(n, i, conj), c);
            diff_cells(&mut t.diffs, format!("(M1,Delta{mark}{i})"), m1_on_delta_expected(n, i, conj), d);
            diff_cells(&mut t.diffs, format!("(M1,Gamma{mark}{i})"), m1_on_gamma_expected(n, i, conj), g);
            if conj {
                t.on_cbar_ii.push(c);
                t.on_deltabar.push(d);
                t.on_gammabar.push(g);
            } else {
                t.on_c_ii.push(c);
                t.on_delta.push(d);
                t.on_gamma.push(g);
            }
        }
    }
    let mut candidates = vec![DivSym::E(Side::Plain, n - 1)];
    candidates.extend((1..n).map(|j| DivSym::E(Side::Bar, j)));
    for d in candidates {
        if tf.is_trivial_on(&m1, d)? {
            t.trivial_components.push(d);
        }
    }
    Ok(t)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub holds: bool,
    pub computed: BundleExpression,
    pub expected: BundleExpression,
    pub diff: Vec<String>,
}

fn identity(name: &'static str, computed: BundleExpression, expected: BundleExpression) -> IdentityCheck {
    let diff = computed
        .diff(&expected)
        .into_iter()
        .map(|(s, a, b)| format!("{s}: computed {a}, expected {b}"))
        .collect::<Vec<_>>();
    IdentityCheck {
        name,
        holds: diff.is_empty(),
        computed,
        expected,
        diff,
    }
}

fn arc_divisor(label: &str) -> Result<Sym> {
    let (side, rest) = match label.strip_prefix("Cb") {
        Some(r) => (Side::Bar, r),
        None => (
            Side::Plain,
            label
                .strip_prefix('C')
                .ok_or_else(|| EngineError::Parse(label.to_string()))?,
        ),
    };
    let j = rest
        .parse()
        .map_err(|_| EngineError::Parse(label.to_string()))?;
    Ok(Sym::E(side, j))
}

/// Strict transform of a degree-one divisor with sign vector `eps`, using its searched arc.
fn strict_transform(tf: &Threefold, eps: &[i64]) -> Result<BundleExpression> {
    let arc = half_cycle_arc(&tf.surface, eps)?;
    let mut e = bundle::s_minus_from_signs(eps).pullback("Z1");
    for l in &arc.labels {
        e.add_term(arc_divisor(l)?, q(-1));
    }
    Ok(e)
}

pub fn half_cycle_sum_expected(n: usize) -> BundleExpression {
    let ni = n as i64;
    let mut e = BundleExpression::single("Z", Sym::F).scaled(bundle::half(ni - 2));
    for j in 1..=n {
        let w = if j <= 2 { ni - 2 } else { ni - 4 };
        e.add_term(Sym::Alpha(j), bundle::half(-w));
    }
    e
}

pub fn strict_sum_e_part(n: usize) -> BundleExpression {
    let mut e = BundleExpression::zero("Z1");
    for i in 1..n {
        e.add_term(Sym::E(Side::Plain, i), q(n as i64 - 1 - i as i64));
        e.add_term(Sym::E(Side::Bar, i), q(i as i64 - 1));
    }
    e
}

pub fn cancel_expected(n: usize) -> BundleExpression {
    let mut e = BundleExpression::single("Z1", Sym::PullAlpha(2));
    for i in 2..n {
        e.add_term(Sym::E(Side::Plain, i), q(-1));
    }
    for i in 1..n {
        e.add_term(Sym::E(Side::Bar, i), q(i as i64 - 2));
    }
    e
}

#[derive(Clone, Debug, Serialize)]
pub struct BundleAlgebraReport {
    pub chern_arcs: Vec<Vec<String>>,
    pub identities: Vec<IdentityCheck>,
}

impl BundleAlgebraReport {
    pub fn pass(&self) -> bool {
        self.identities.iter().all(|i| i.holds)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.identities.iter().find(|i| i.name == name)
    }
}

pub fn bundle_algebra_verify(tf: &Threefold) -> Result<BundleAlgebraReport> {
    let n = tf.n();
    let mut arcs = Vec::new();
    let mut half_sum = BundleExpression::zero("Z");
    let mut strict_sum = BundleExpression::zero("Z1");
    for i in 1..=n - 2 {
        let eps = chern_signs(n, i);
        arcs.push(half_cycle_arc(&tf.surface, &eps)?.labels);
        half_sum = half_sum.plus(&bundle::s_minus_from_signs(&eps));
        strict_sum = strict_sum.plus(&strict_transform(tf, &eps)?);
    }
    arcs.push(half_cycle_arc(&tf.surface, &chern_signs(n, n - 1))?.labels);
    let strict_sum_expected = half_cycle_sum_expected(n).pullback("Z1").minus(&strict_sum_e_part(n));
    let cancel = bundle::m1_expr(n).minus(&bundle::total_e(n)).minus(&strict_sum);
    Ok(BundleAlgebraReport {
        chern_arcs: arcs,
        identities: vec![
            identity(
                "l1-via-t",
                bundle::eliminate_pull_f(&bundle::l1_expr(n), n),
                bundle::l1_via_t_expected(n),
            ),
            identity("kernel", bundle::l1_prime_expr(n), bundle::l1_prime_expected(n)),
            identity("half-cycle-sum", half_sum, half_cycle_sum_expected(n)),
            identity("strict-transform-sum", strict_sum, strict_sum_expected),
            identity("cancellation", cancel, cancel_expected(n)),
        ],
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RrResult {
    pub chi: i64,
    pub axioms_used: Vec<String>,
}

/// Riemann-Roch for the bundle of alpha_2 from the tagged intersection axioms.
pub fn rr_threefold(registry: &AxiomRegistry) -> Result<RrResult> {
    let mut trail = AxiomTrail::new(registry);
    let a3 = trail.take(axioms::ALPHA_CUBED)?;
    let a2c1 = trail.take(axioms::ALPHA_SQ_C1)?;
    let a_c = trail.take(axioms::ALPHA_C1SQ_C2)?;
    let c1c2 = trail.take(axioms::C1C2)?;
    let chi = Rational64::new(a3, 6)
        + Rational64::new(a2c1, 4)
        + Rational64::new(a_c, 12)
        + Rational64::new(c1c2, 24);
    if !chi.is_integer() {
        return Err(EngineError::NonIntegral(format!("chi = {chi}")));
    }
    Ok(RrResult {
        chi: chi.to_integer(),
        axioms_used: trail.finish(),
    })
}

/// Formal combination of curves on a degree-one divisor, keyed by label.
pub type LocalClass = BTreeMap<String, i64>;

#[derive(Clone, Debug, Serialize)]
pub struct NonvanRow {
    pub i: usize,
    pub local_class: LocalClass,
    pub corrected_class: LocalClass,
    /// Curves where the local class and the table disagree.
    pub mismatches: Vec<CellDiff>,
    /// Self-intersection, neighbour term and e'1 term of the displayed ledger.
    pub ledger_terms: (i64, i64, i64),
    pub ledger_value: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonvanReport {
    pub tec: IdentityCheck,
    #[serde(serialize_with = "bundle::ser_ratio")]
    pub tec_s_coefficient: Rational64,
    pub rows: Vec<NonvanRow>,
    pub axioms_used: Vec<String>,
}

impl NonvanReport {
    pub fn pass(&self) -> bool {
        self.tec.holds
            && self
                .rows
                .iter()
                .all(|r| r.mismatches.is_empty() && r.ledger_value == 0)
    }
}

const E1P: &str = "e'1";

pub fn nonvan_ledgers(tf: &Threefold, registry: &AxiomRegistry) -> Result<NonvanReport> {
    let n = tf.n();
    let ni = n as i64;
    let mut trail = AxiomTrail::new(registry);
    let e1_meets = trail.take(axioms::E1PRIME_MEETS)?;
    let db_meets = trail.take(axioms::DELTA_BAR_MEETS)?;
    let last = bundle::s_minus_from_signs(&chern_signs(n, n - 1));
    let mut tec_rhs = BundleExpression::single("Z", Sym::F).plus(&last.scaled(q(ni - 4)));
    tec_rhs.add_term(Sym::Alpha(1), q(-1));
    let tec = identity("tec", bundle::m_expr(n, 1), tec_rhs);
    let m1 = bundle::m1_expr(n);
    let mut rows = Vec::new();
    for i in 1..=n - 2 {
        let host = tf.complex.s_host(super::complex::Sign::Minus, i);
        let last_host = tf.complex.s_host(super::complex::Sign::Minus, n - 1);
        let on_cycle = |c: &CurveSym| matches!(c, CurveSym::C(..));
        let label = |c: &CurveSym| match c {
            CurveSym::C(s, _, j) => format!("C{}{j}", if *s == Side::Bar { "b" } else { "" }),
            other => other.to_string(),
        };
        let mut local_class = LocalClass::new();
        for c in host.curves.iter().filter(|c| on_cycle(c)) {
            *local_class.entry(label(c)).or_default() += 1;
        }
        for c in last_host.curves.iter().filter(|c| on_cycle(c)) {
            if local_class.contains_key(&label(c)) {
                *local_class.entry(label(c)).or_default() += ni - 4;
            }
        }
        local_class.insert(E1P.into(), -1);
        let mut table_class = LocalClass::new();
        for c in host.curves.iter().filter(|c| on_cycle(c)) {
            table_class.insert(c.to_string(), local_class[&label(c)]);
        }
        table_class.insert(CurveSym::Delta(Side::Bar, i).to_string(), 1);
        table_class.insert(E1P.into(), -1);
        let mut corrected_class = table_class.clone();
        *corrected_class.get_mut(&CurveSym::C(Side::Plain, i, 1).to_string()).expect("C_i,1") -= ni - 3;
        for j in 2..=i {
            *corrected_class.get_mut(&CurveSym::C(Side::Plain, i, j).to_string()).expect("C_i,j") -=
                ni - 1 - j as i64;
        }
        corrected_class.retain(|_, v| *v != 0);

        let self_int = |c: CurveSym| -> Result<i64> {
            match c {
                CurveSym::L(_) => Ok(0),
                _ => {
                    let e = tf.complex.containing(c);
                    let d = e
                        .iter()
                        .find(|e| e.contains(c))
                        .ok_or_else(|| EngineError::OutOfRange(format!("{c} lies on no component")))?;
                    tf.table.get(d.sym(), c)
                }
            }
        };
        let local = |a: CurveSym, b: &str| -> Result<i64> {
            if b == E1P {
                return Ok(if a == CurveSym::C(Side::Plain, i, 1) { e1_meets } else { 0 });
            }
            let other = host
                .curves
                .iter()
                .copied()
                .find(|c| c.to_string() == b)
                .ok_or_else(|| EngineError::OutOfRange(b.to_string()))?;
            if other == a {
                self_int(a)
            } else if matches!(a, CurveSym::Delta(..)) || matches!(other, CurveSym::Delta(..)) {
                Ok(host.meet(a, other) * db_meets)
            } else {
                Ok(host.meet(a, other))
            }
        };
        let mut mismatches = Vec::new();
        for &c in &host.curves {
            let mut v = 0;
            for (k, coef) in &corrected_class {
                v += coef * local(c, k)?;
            }
            let t = tf.degree_int(&m1, c)?;
            diff_cells(&mut mismatches, format!("corrected(M1,{c}) on {}", host.name()), t, v);
        }
        let target = CurveSym::C(Side::Bar, i, n - 1);
        let mut pencil: Vec<String> = (i + 1..n).map(|j| CurveSym::C(Side::Bar, i, j).to_string()).collect();
        pencil.push(CurveSym::Delta(Side::Bar, i).to_string());
        let s = self_int(target)?;
        let mut nb = 0;
        for k in &pencil {
            if *k != target.to_string() {
                nb += local(target, k)?;
            }
        }
        let e = local(target, E1P)?;
        rows.push(NonvanRow {
            i,
            local_class,
            corrected_class,
            mismatches,
            ledger_terms: (s, nb, e),
            ledger_value: s + nb - e,
        });
    }
    Ok(NonvanReport {
        tec_s_coefficient: q(ni - 4),
        tec,
        rows,
        axioms_used: trail.finish(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GuardResult {
    #[serde(serialize_with = "bundle::ser_ratio")]
    pub phi_f: Rational64,
    #[serde(serialize_with = "bundle::ser_ratios")]
    pub phi_s: Vec<Rational64>,
    #[serde(serialize_with = "bundle::ser_ratio")]
    pub phi_m_doubled: Rational64,
    #[serde(serialize_with = "bundle::ser_ratio")]
    pub phi_m_prime_doubled: Rational64,
}

impl GuardResult {
    pub fn pass(&self) -> bool {
        self.phi_f.is_zero()
            && self.phi_s.iter().all(|x| x.is_zero())
            && !self.phi_m_doubled.is_zero()
            && !self.phi_m_prime_doubled.is_zero()
    }
}

/// Difference of the first two alpha coefficients.
pub fn phi(e: &BundleExpression) -> Rational64 {
    e.coeff(Sym::Alpha(1)) - e.coeff(Sym::Alpha(2))
}

pub fn irreducibility_guard(n: usize) -> GuardResult {
    let f = BundleExpression::single("Z", Sym::F);
    let mut phi_s = Vec::new();
    for i in 1..n {
        let minus = bundle::s_minus_from_signs(&chern_signs(n, i));
        let plus = f.minus(&minus);
        phi_s.push(phi(&minus));
        phi_s.push(phi(&plus));
    }
    let two = q(2);
    GuardResult {
        phi_f: phi(&f),
        phi_s,
        phi_m_doubled: phi(&bundle::m_expr(n, 1)) * two,
        phi_m_prime_doubled: phi(&bundle::m_expr(n, 2)) * two,
    }
}
