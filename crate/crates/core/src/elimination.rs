//! Base-locus elimination as a blowup state machine over host surfaces.
//!
//! Every tracked curve lies on exactly two host surfaces. Each host carries the
//! intersection numbers of the tracked curves it contains. A stage scans every host
//! for curves forced into the fixed part of the restricted bundle, blows those curves
//! up, and updates degrees with the local rules below.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{EngineError, Result};
use crate::incidence::bundle;
use crate::incidence::checks::Threefold;
use crate::incidence::complex::{CurveSym, Side, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HostKind {
    S,
    E,
    D,
}

#[derive(Clone, Debug, Serialize)]
pub struct Host {
    pub name: String,
    pub kind: HostKind,
    curves: Vec<usize>,
    #[serde(skip)]
    form: BTreeMap<(usize, usize), i64>,
}

impl Host {
    fn new(name: String, kind: HostKind) -> Self {
        Self {
            name,
            kind,
            curves: Vec::new(),
            form: BTreeMap::new(),
        }
    }

    fn key(a: usize, b: usize) -> (usize, usize) {
        (a.min(b), a.max(b))
    }

    pub fn pairing(&self, a: usize, b: usize) -> i64 {
        self.form.get(&Self::key(a, b)).copied().unwrap_or(0)
    }

    fn set(&mut self, a: usize, b: usize, v: i64) {
        if v == 0 {
            self.form.remove(&Self::key(a, b));
        } else {
            self.form.insert(Self::key(a, b), v);
        }
    }

    pub fn contains(&self, c: usize) -> bool {
        self.curves.contains(&c)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrackedCurve {
    pub name: String,
    /// The curve on the first blowup this one descends from.
    pub origin: CurveSym,
    /// Stage at which this copy appeared.
    pub generation: usize,
    pub hosts: [usize; 2],
    pub degree: i64,
    pub alive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExceptionalDivisor {
    pub name: String,
    pub stage: usize,
    pub center: String,
    pub origin: CurveSym,
    /// Degree of the ruled surface, from the normal bundle of the center.
    pub ruled_degree: i64,
    /// Sections cut by the two former hosts of the center.
    pub sections: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OdpRecord {
    pub stage: usize,
    pub curves: (String, String),
    pub divisors: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    /// Connected components of the scanned base curves.
    pub scan: Vec<Vec<String>>,
    pub new_divisors: Vec<ExceptionalDivisor>,
    pub new_odps: Vec<OdpRecord>,
}

#[derive(Clone, Debug)]
pub struct BlowupState {
    pub n: usize,
    pub stage: usize,
    hosts: Vec<Host>,
    curves: Vec<TrackedCurve>,
    pub divisors: Vec<ExceptionalDivisor>,
    pub odps: Vec<OdpRecord>,
    pub initial_odps: usize,
}

const STRIP_CAP: usize = 10_000;

fn s_name(sign: Sign, i: usize) -> String {
    match sign {
        Sign::Plus => format!("S{i}+"),
        Sign::Minus => format!("S{i}-"),
    }
}

impl BlowupState {
    /// State on the first blowup with degrees of the first line bundle.
    pub fn initial(tf: &Threefold) -> Result<Self> {
        let n = tf.n();
        let cx = &tf.complex;
        let l1 = bundle::l1_expr(n);
        let mut hosts = Vec::new();
        let mut host_of = BTreeMap::new();
        for comp in cx.components() {
            host_of.insert(comp.sym().to_string(), hosts.len());
            hosts.push(Host::new(comp.sym().to_string(), HostKind::E));
        }
        let mut s_hosts = Vec::new();
        for i in 1..n {
            for sign in [Sign::Minus, Sign::Plus] {
                let h = cx.s_host(sign, i);
                host_of.insert(h.name(), hosts.len());
                hosts.push(Host::new(h.name(), HostKind::S));
                s_hosts.push(h);
            }
        }
        let mut curves = Vec::new();
        let mut index = BTreeMap::new();
        for &c in cx.curves() {
            if matches!(c, CurveSym::G(..)) {
                continue;
            }
            let mut hs: Vec<usize> = cx
                .containing(c)
                .iter()
                .map(|e| host_of[&e.sym().to_string()])
                .collect();
            for h in &s_hosts {
                if h.curves.contains(&c) {
                    hs.push(host_of[&h.name()]);
                }
            }
            if hs.len() != 2 {
                return Err(EngineError::Inconsistent(format!(
                    "{c} lies on {} hosts instead of 2",
                    hs.len()
                )));
            }
            let id = curves.len();
            index.insert(c, id);
            for &h in &hs {
                hosts[h].curves.push(id);
            }
            curves.push(TrackedCurve {
                name: c.to_string(),
                origin: c,
                generation: 1,
                hosts: [hs[0], hs[1]],
                degree: tf.degree_int(&l1, c)?,
                alive: true,
            });
        }
        for comp in cx.components() {
            let h = host_of[&comp.sym().to_string()];
            let members: Vec<CurveSym> = comp
                .curves
                .iter()
                .copied()
                .filter(|c| !matches!(c, CurveSym::G(..)))
                .collect();
            for (x, &a) in members.iter().enumerate() {
                for &b in &members[x..] {
                    let v = comp.meet(a, b)?;
                    hosts[h].set(index[&a], index[&b], v);
                }
            }
        }
        for sh in &s_hosts {
            let h = host_of[&sh.name()];
            for (x, &a) in sh.curves.iter().enumerate() {
                let self_int = match a {
                    CurveSym::L(_) => 0,
                    _ => {
                        let e = cx
                            .containing(a)
                            .first()
                            .map(|e| e.sym())
                            .ok_or_else(|| EngineError::OutOfRange(a.to_string()))?;
                        tf.table.get(e, a)?
                    }
                };
                hosts[h].set(index[&a], index[&a], self_int);
                for &b in &sh.curves[x + 1..] {
                    hosts[h].set(index[&a], index[&b], sh.meet(a, b));
                }
            }
        }
        Ok(Self {
            n,
            stage: 1,
            hosts,
            curves,
            divisors: Vec::new(),
            odps: Vec::new(),
            initial_odps: cx.odps().len(),
        })
    }

    pub fn hosts(&self) -> &[Host] {
        &self.hosts
    }

    pub fn curves(&self) -> impl Iterator<Item = (usize, &TrackedCurve)> {
        self.curves.iter().enumerate().filter(|(_, c)| c.alive)
    }

    pub fn curve(&self, id: usize) -> &TrackedCurve {
        &self.curves[id]
    }

    pub fn host_index(&self, name: &str) -> Option<usize> {
        self.hosts.iter().position(|h| h.name == name)
    }

    /// Live copy of `origin` lying on the named host.
    pub fn find(&self, origin: CurveSym, host: &str) -> Option<usize> {
        let h = self.host_index(host)?;
        self.curves()
            .find(|(_, c)| c.origin == origin && c.hosts.contains(&h))
            .map(|(i, _)| i)
    }

    pub fn degree(&self, origin: CurveSym, host: &str) -> Option<i64> {
        self.find(origin, host).map(|i| self.curves[i].degree)
    }

    fn meets(&self, a: usize, b: usize) -> Vec<(usize, i64)> {
        let ha = self.curves[a].hosts;
        ha.iter()
            .filter(|h| self.curves[b].hosts.contains(h))
            .map(|&h| (h, self.hosts[h].pairing(a, b)))
            .filter(|(_, v)| *v != 0)
            .collect()
    }

    fn meet_count(&self, a: usize, b: usize) -> i64 {
        self.meets(a, b).iter().map(|(_, v)| v).sum()
    }

    /// Fixed curves of the restricted bundle on one host, with multiplicities.
    pub fn strip_host(&self, h: usize) -> Result<BTreeMap<usize, i64>> {
        let host = &self.hosts[h];
        let live: Vec<usize> = host
            .curves
            .iter()
            .copied()
            .filter(|&c| self.curves[c].alive)
            .collect();
        let mut deg: Vec<i64> = live.iter().map(|&c| self.curves[c].degree).collect();
        let mut mult = BTreeMap::new();
        let mut rigid = vec![false; live.len()];
        for _ in 0..STRIP_CAP {
            let Some(k) = (0..live.len()).find(|&k| deg[k] < 0 && !rigid[k]) else {
                return Ok(mult);
            };
            *mult.entry(live[k]).or_insert(0) += 1;
            if host.pairing(live[k], live[k]) >= 0 {
                rigid[k] = true;
                continue;
            }
            for (x, &c) in live.iter().enumerate() {
                deg[x] -= host.pairing(live[k], c);
            }
        }
        Err(EngineError::StrippingDiverged { cap: STRIP_CAP as i64 })
    }

    /// Base curves grouped into connected components.
    pub fn base_curve_scan(&self) -> Result<Vec<Vec<usize>>> {
        let mut found = BTreeSet::new();
        for h in 0..self.hosts.len() {
            found.extend(self.strip_host(h)?.into_keys());
        }
        let list: Vec<usize> = found.into_iter().collect();
        let mut comp: Vec<usize> = (0..list.len()).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for x in 0..list.len() {
            for y in x + 1..list.len() {
                if self.meet_count(list[x], list[y]) > 0 {
                    let (a, b) = (root(&mut comp, x), root(&mut comp, y));
                    comp[a] = b;
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..list.len() {
            let r = root(&mut comp, x);
            groups.entry(r).or_default().push(list[x]);
        }
        Ok(groups.into_values().collect())
    }

    fn copy_name(&self, c: usize, host: usize, stage: usize) -> String {
        format!("{}^({stage})[{}]", self.curves[c].origin, self.hosts[host].name)
    }

    /// Blows up the given curves and passes to the next stage.
    pub fn blow_up_curves(&mut self, centers: &[usize]) -> Result<(Vec<ExceptionalDivisor>, Vec<OdpRecord>)> {
        let stage = self.stage + 1;
        let blown: BTreeSet<usize> = centers.iter().copied().collect();
        let mut new_divisors = Vec::new();
        let mut new_odps = Vec::new();

        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (x, &a) in centers.iter().enumerate() {
            for &b in &centers[x + 1..] {
                if self.meet_count(a, b) > 0 {
                    pairs.push((a, b));
                }
            }
        }

        let mut updates: Vec<(usize, i64)> = Vec::new();
        for (g, curve) in self.curves() {
            if blown.contains(&g) {
                continue;
            }
            let touched: Vec<(usize, usize)> = blown
                .iter()
                .flat_map(|&c| self.meets(g, c).into_iter().map(move |(h, _)| (c, h)))
                .collect();
            if touched.is_empty() {
                continue;
            }
            let mut drop: i64 = blown.iter().map(|&c| self.meet_count(g, c)).sum();
            for &(a, b) in &pairs {
                let ha = touched.iter().find(|t| t.0 == a).map(|t| t.1);
                let hb = touched.iter().find(|t| t.0 == b).map(|t| t.1);
                if let (Some(ha), Some(hb)) = (ha, hb) {
                    let hab: Vec<usize> = self.meets(a, b).into_iter().map(|(h, _)| h).collect();
                    if ha != hb && !hab.contains(&ha) && !hab.contains(&hb) {
                        drop -= 1;
                    }
                }
            }
            updates.push((g, curve.degree - drop));
        }

        let mut copies: Vec<(usize, usize, usize, i64)> = Vec::new();
        for &c in centers {
            let [h1, h2] = self.curves[c].hosts;
            let a = self.hosts[h1].pairing(c, c);
            let b = self.hosts[h2].pairing(c, c);
            let d_name = format!("D({stage})[{}]", self.curves[c].name);
            let d = self.hosts.len();
            self.hosts.push(Host::new(d_name.clone(), HostKind::D));
            let mut sections = Vec::new();
            for (h, self_here, self_other) in [(h1, a, b), (h2, b, a)] {
                let nb: i64 = blown
                    .iter()
                    .filter(|&&o| o != c && self.hosts[h].contains(o))
                    .map(|&o| self.hosts[h].pairing(c, o))
                    .sum();
                let deg = self.curves[c].degree - self_here - nb;
                let id = self.curves.len();
                self.curves.push(TrackedCurve {
                    name: self.copy_name(c, h, stage),
                    origin: self.curves[c].origin,
                    generation: stage,
                    hosts: [h, d],
                    degree: deg,
                    alive: true,
                });
                sections.push(self.curves[id].name.clone());
                copies.push((c, h, id, self_other - self_here - nb));
            }
            new_divisors.push(ExceptionalDivisor {
                name: d_name,
                stage,
                center: self.curves[c].name.clone(),
                origin: self.curves[c].origin,
                ruled_degree: (a - b).abs(),
                sections: [sections[0].clone(), sections[1].clone()],
            });
        }

        for &(a, b) in &pairs {
            let shared: Vec<usize> = self.meets(a, b).into_iter().map(|(h, _)| h).collect();
            if shared.len() == 1 {
                let mut divisors: Vec<String> = Vec::new();
                for x in [a, b] {
                    for h in self.curves[x].hosts {
                        if h != shared[0] {
                            divisors.push(self.hosts[h].name.clone());
                        }
                    }
                }
                for nd in &new_divisors {
                    if nd.center == self.curves[a].name || nd.center == self.curves[b].name {
                        divisors.push(nd.name.clone());
                    }
                }
                new_odps.push(OdpRecord {
                    stage,
                    curves: (self.curves[a].name.clone(), self.curves[b].name.clone()),
                    divisors,
                });
            }
        }

        for &(c, h, id, self_in_d) in &copies {
            let host = &self.hosts[h];
            let row: Vec<(usize, i64)> = host
                .curves
                .iter()
                .map(|&x| (x, host.pairing(c, x)))
                .collect();
            let host = &mut self.hosts[h];
            for (x, v) in row.into_iter().filter(|&(_, v)| v != 0) {
                let target = if x == c {
                    id
                } else {
                    copies
                        .iter()
                        .find(|t| t.0 == x && t.1 == h)
                        .map_or(x, |t| t.2)
                };
                host.set(id, target, v);
            }
            host.curves.push(id);
            let d = self.curves[id].hosts[1];
            self.hosts[d].curves.push(id);
            self.hosts[d].set(id, id, self_in_d);
        }
        for &c in centers {
            self.curves[c].alive = false;
            for h in self.curves[c].hosts {
                self.hosts[h].curves.retain(|&x| x != c);
            }
        }
        for (g, deg) in updates {
            self.curves[g].degree = deg;
        }
        self.stage = stage;
        self.divisors.extend(new_divisors.iter().cloned());
        self.odps.extend(new_odps.iter().cloned());
        Ok((new_divisors, new_odps))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderProfile {
    pub side: Side,
    pub components: Vec<String>,
    pub ruled_degrees: Vec<i64>,
    /// Sections shared by consecutive components.
    pub adjacent_sections: Vec<String>,
    pub curve_degrees: Vec<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistorLineTrace {
    pub i: usize,
    pub initial: i64,
    pub per_stage: Vec<i64>,
    pub decrement_stages: Vec<usize>,
    pub final_degree: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EliminationTrace {
    pub n: usize,
    pub terminal_stage: usize,
    pub stages: Vec<StageRecord>,
    pub ladders: Vec<LadderProfile>,
    pub twistor_lines: Vec<TwistorLineTrace>,
    /// (stage, values of C^(2)_{i,j} on S_i^-) for 3 <= j <= i <= n-2.
    pub stage2_fiber_degrees: Vec<(usize, usize, i64)>,
    pub stage2_ladder_degree: Option<i64>,
    /// Base curves on S_i^- per stage, for 3 <= i <= n-2.
    pub base_curves_on_s: Vec<Vec<usize>>,
    pub initial_odps: usize,
    pub odps_per_stage: Vec<usize>,
    /// Stages in which the fiber-curve family and the ladder family were blown up.
    pub fiber_family_blowups: usize,
    pub ladder_family_blowups: usize,
}

fn ladder_origin(side: Side, n: usize) -> CurveSym {
    CurveSym::C(side, n - 1, 1)
}

fn is_ladder(c: &TrackedCurve, n: usize) -> bool {
    matches!(c.origin, CurveSym::C(_, i, 1) if i == n - 1)
}

/// Runs the elimination until a scan comes back empty.
pub fn run_elimination(n: usize) -> Result<EliminationTrace> {
    let tf = Threefold::new(n)?;
    run_elimination_on(&tf)
}

pub fn run_elimination_on(tf: &Threefold) -> Result<EliminationTrace> {
    let n = tf.n();
    let mut st = BlowupState::initial(tf)?;
    let mut stages = Vec::new();
    let mut line_degrees: Vec<Vec<i64>> = (1..n)
        .map(|i| vec![st.degree(CurveSym::L(i), &s_name(Sign::Minus, i)).unwrap_or(0)])
        .collect();
    let mut base_on_s = Vec::new();
    let mut stage2_fiber = Vec::new();
    let mut stage2_ladder = None;
    let (mut fiber_blowups, mut ladder_blowups) = (0, 0);
    loop {
        let scan = st.base_curve_scan()?;
        let mut per_s = Vec::new();
        for i in 3..=n.saturating_sub(2) {
            let h = st.host_index(&s_name(Sign::Minus, i)).expect("S host");
            per_s.push(scan.iter().flatten().filter(|&&c| st.curve(c).hosts.contains(&h)).count());
        }
        base_on_s.push(per_s);
        let names = scan
            .iter()
            .map(|g| g.iter().map(|&c| st.curve(c).name.clone()).collect())
            .collect();
        if scan.is_empty() {
            stages.push(StageRecord {
                stage: st.stage,
                scan: names,
                new_divisors: Vec::new(),
                new_odps: Vec::new(),
            });
            break;
        }
        if st.stage >= n - 2 {
            return Err(EngineError::NonTermination(st.stage));
        }
        let centers: Vec<usize> = scan.iter().flatten().copied().collect();
        if centers.iter().any(|&c| is_ladder(st.curve(c), n)) {
            ladder_blowups += 1;
        }
        if centers.iter().any(|&c| !is_ladder(st.curve(c), n)) {
            fiber_blowups += 1;
        }
        let (divs, odps) = st.blow_up_curves(&centers)?;
        stages.push(StageRecord {
            stage: st.stage - 1,
            scan: names,
            new_divisors: divs,
            new_odps: odps,
        });
        for i in 1..n {
            line_degrees[i - 1].push(st.degree(CurveSym::L(i), &s_name(Sign::Minus, i)).unwrap_or(0));
        }
        if st.stage == 2 {
            for i in 3..=n - 2 {
                for j in 3..=i {
                    let c = CurveSym::C(Side::Plain, i, j);
                    let d = st.degree(c, &s_name(Sign::Minus, i)).ok_or_else(|| {
                        EngineError::Inconsistent(format!("no stage-2 copy of {c}"))
                    })?;
                    stage2_fiber.push((i, j, d));
                }
            }
            stage2_ladder = st.degree(ladder_origin(Side::Plain, n), "E1");
        }
    }
    let mut ladders = Vec::new();
    for side in Side::both() {
        let origin = ladder_origin(side, n);
        let e1 = crate::incidence::complex::DivSym::E(side, 1).to_string();
        let divs: Vec<&ExceptionalDivisor> =
            st.divisors.iter().filter(|d| d.origin == origin).collect();
        let mut adjacent = Vec::new();
        for w in divs.windows(2) {
            let shared = w[0]
                .sections
                .iter()
                .find(|s| *s == &w[1].center)
                .cloned()
                .unwrap_or_default();
            adjacent.push(shared);
        }
        let curve_degrees = st
            .curves
            .iter()
            .filter(|c| c.origin == origin && c.generation >= 2 && c.name.ends_with(&format!("[{e1}]")))
            .map(|c| c.degree)
            .collect();
        ladders.push(LadderProfile {
            side,
            components: divs.iter().map(|d| d.name.clone()).collect(),
            ruled_degrees: divs.iter().map(|d| d.ruled_degree).collect(),
            adjacent_sections: adjacent,
            curve_degrees,
        });
    }
    let twistor_lines = line_degrees
        .into_iter()
        .enumerate()
        .map(|(k, seq)| {
            let decrement_stages = seq
                .windows(2)
                .enumerate()
                .filter(|(_, w)| w[1] < w[0])
                .map(|(m, _)| m + 2)
                .collect();
            TwistorLineTrace {
                i: k + 1,
                initial: seq[0],
                final_degree: *seq.last().expect("nonempty"),
                per_stage: seq,
                decrement_stages,
            }
        })
        .collect();
    let mut odps_per_stage = vec![0; st.stage + 1];
    for o in &st.odps {
        odps_per_stage[o.stage] += 1;
    }
    Ok(EliminationTrace {
        n,
        terminal_stage: st.stage,
        stages,
        ladders,
        twistor_lines,
        stage2_fiber_degrees: stage2_fiber,
        stage2_ladder_degree: stage2_ladder,
        base_curves_on_s: base_on_s,
        initial_odps: st.initial_odps,
        odps_per_stage,
        fiber_family_blowups: fiber_blowups,
        ladder_family_blowups: ladder_blowups,
    })
}

pub fn stage2_fiber_expected(i: usize, j: usize) -> i64 {
    if j == 3 {
        1
    } else if j < i {
        0
    } else {
        -1
    }
}

/// Degree of the first bundle on the i-th twistor line along the elimination.
pub fn twistor_line_degree(trace: &EliminationTrace, i: usize) -> Result<&TwistorLineTrace> {
    if i == 0 || i >= trace.n - 1 {
        return Err(EngineError::OutOfRange(format!(
            "twistor line index {i} must lie in 1..{}",
            trace.n - 1
        )));
    }
    Ok(&trace.twistor_lines[i - 1])
}

/// New ODPs at a stage, per real half, from the index ranges of the reducible centers.
pub fn odp_threshold_count(n: usize, stage: usize) -> usize {
    (stage + 2..=n.saturating_sub(2)).map(|i| i - stage - 1).sum()
}

pub fn double_curve_degree_ladder(n: usize) -> i64 {
    2 * (n as i64 - 2)
}
