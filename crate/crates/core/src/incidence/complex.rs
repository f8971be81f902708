use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{EngineError, Result};
use crate::lattice::{BlowupTower, DivisorClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Side {
    Plain,
    Bar,
}

impl Side {
    pub fn conj(self) -> Self {
        match self {
            Side::Plain => Side::Bar,
            Side::Bar => Side::Plain,
        }
    }

    fn mark(self) -> &'static str {
        match self {
            Side::Plain => "",
            Side::Bar => "b",
        }
    }

    pub fn both() -> [Side; 2] {
        [Side::Plain, Side::Bar]
    }
}

/// Divisor symbols carrying a class in the pairing table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DivSym {
    T,
    E(Side, usize),
}

impl DivSym {
    pub fn conj(self) -> Self {
        match self {
            DivSym::T => DivSym::T,
            DivSym::E(s, j) => DivSym::E(s.conj(), j),
        }
    }
}

impl fmt::Display for DivSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivSym::T => write!(f, "T"),
            DivSym::E(s, j) => write!(f, "E{}{j}", s.mark()),
        }
    }
}

/// Curve symbols of the incidence complex.
///
/// `C(s, i, j)` is the fiber curve over the point `t_i` inside `E_j`,
/// `G(s, j)` a generic fiber of `E_j`, `Gamma(s, i)` the face `E_i cap E_(i+1)`,
/// `Delta(s, i)` the small-resolution curve over `p_i`, and `L(i)` the twistor line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CurveSym {
    C(Side, usize, usize),
    G(Side, usize),
    Gamma(Side, usize),
    Delta(Side, usize),
    L(usize),
}

impl CurveSym {
    pub fn conj(self) -> Self {
        match self {
            CurveSym::C(s, i, j) => CurveSym::C(s.conj(), i, j),
            CurveSym::G(s, j) => CurveSym::G(s.conj(), j),
            CurveSym::Gamma(s, i) => CurveSym::Gamma(s.conj(), i),
            CurveSym::Delta(s, i) => CurveSym::Delta(s.conj(), i),
            CurveSym::L(i) => CurveSym::L(i),
        }
    }
}

impl fmt::Display for CurveSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSym::C(s, i, j) => write!(f, "C{}{i},{j}", s.mark()),
            CurveSym::G(s, j) => write!(f, "G{}{j}", s.mark()),
            CurveSym::Gamma(s, i) => write!(f, "Gamma{}{i}", s.mark()),
            CurveSym::Delta(s, i) => write!(f, "Delta{}{i}", s.mark()),
            CurveSym::L(i) => write!(f, "L{i}"),
        }
    }
}

impl Serialize for DivSym {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for CurveSym {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Image of a curve under the contraction to Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pushforward {
    /// Maps isomorphically onto the cycle component `(side, j)` of a fiber.
    Component(Side, usize),
    /// Contracted to a point.
    Point,
    /// A twistor line.
    Line,
}

/// Degree-one divisors `S_i^+` / `S_i^-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn conj(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Ordinary double point of the contracted threefold and its small resolution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Odp {
    pub name: String,
    pub side: Side,
    pub index: usize,
    /// The four divisors through the point.
    pub divisors: Vec<String>,
    /// The pair blown up by the small resolution.
    pub blown_pair: (String, String),
    pub curve: CurveSym,
}

/// One component `E_j` of the cylinder with its Picard lattice.
#[derive(Clone, Debug)]
pub struct EComponent {
    pub side: Side,
    pub j: usize,
    pub tower: BlowupTower,
    pub curves: Vec<CurveSym>,
    pub left: CurveSym,
    pub right: CurveSym,
}

impl EComponent {
    pub fn sym(&self) -> DivSym {
        DivSym::E(self.side, self.j)
    }

    pub fn class(&self, c: CurveSym) -> Result<DivisorClass> {
        self.tower.class(&c.to_string())
    }

    pub fn meet(&self, a: CurveSym, b: CurveSym) -> Result<i64> {
        self.tower.meet(&a.to_string(), &b.to_string())
    }

    pub fn contains(&self, c: CurveSym) -> bool {
        self.curves.contains(&c)
    }

    /// Class of a generic fiber of the projection to the base curve.
    pub fn fiber(&self) -> CurveSym {
        CurveSym::G(self.side, self.j)
    }

    pub fn picard_rank(&self) -> usize {
        self.tower.lattice().rank()
    }
}

#[derive(Clone, Debug)]
pub struct IncidenceComplex {
    n: usize,
    components: Vec<EComponent>,
    curves: Vec<CurveSym>,
    odps: Vec<Odp>,
}

fn face_right(n: usize, s: Side, j: usize) -> CurveSym {
    let _ = n;
    CurveSym::Gamma(s, j)
}

fn face_left(n: usize, s: Side, j: usize) -> CurveSym {
    if j == 1 {
        CurveSym::Gamma(s.conj(), n - 1)
    } else {
        CurveSym::Gamma(s, j - 1)
    }
}

fn build_component(n: usize, s: Side, j: usize) -> Result<EComponent> {
    let left = face_left(n, s, j);
    let right = face_right(n, s, j);
    let mut curves: Vec<CurveSym> = (1..n).map(|k| CurveSym::C(s, k, j)).collect();
    curves.push(CurveSym::G(s, j));
    curves.push(left);
    curves.push(right);
    let names: Vec<String> = curves.iter().map(|c| c.to_string()).collect();
    let mut quadric_curves: Vec<(&str, i64, i64)> = Vec::new();
    for (c, name) in curves.iter().zip(&names) {
        let (a, b) = match c {
            CurveSym::Gamma(..) => (0, 1),
            _ => (1, 0),
        };
        quadric_curves.push((name.as_str(), a, b));
    }
    let mut tower = BlowupTower::on_quadric(&quadric_curves);
    if j <= n - 2 {
        let d = CurveSym::Delta(s, j);
        let fiber = CurveSym::C(s, j, j).to_string();
        tower.blow_up(&format!("d{j}"), &d.to_string(), &[&fiber, &right.to_string()])?;
        curves.push(d);
    }
    if j == 1 {
        let d = CurveSym::Delta(s.conj(), n - 1);
        let fiber = CurveSym::C(s, n - 1, 1).to_string();
        tower.blow_up(&format!("d{}'", n - 1), &d.to_string(), &[&fiber, &left.to_string()])?;
        curves.push(d);
    }
    Ok(EComponent {
        side: s,
        j,
        tower,
        curves,
        left,
        right,
    })
}

/// Builds the incidence complex of the small resolution for a given `n`.
pub fn build_incidence(n: usize) -> Result<IncidenceComplex> {
    if n < 4 {
        return Err(EngineError::InvalidN { n, min: 4 });
    }
    let mut components = Vec::new();
    for s in Side::both() {
        for j in 1..n {
            components.push(build_component(n, s, j)?);
        }
    }
    let mut curves = Vec::new();
    for s in Side::both() {
        for i in 1..n {
            for j in 1..n {
                curves.push(CurveSym::C(s, i, j));
            }
        }
        for j in 1..n {
            curves.push(CurveSym::G(s, j));
            curves.push(CurveSym::Gamma(s, j));
            curves.push(CurveSym::Delta(s, j));
        }
    }
    for i in 1..n {
        curves.push(CurveSym::L(i));
    }
    let mut odps = Vec::new();
    for s in Side::both() {
        for i in 1..n {
            let (plus, minus) = match s {
                Side::Plain => (format!("S{i}+"), format!("S{i}-")),
                Side::Bar => (format!("S{i}-"), format!("S{i}+")),
            };
            let (e_here, e_next) = if i <= n - 2 {
                (DivSym::E(s, i), DivSym::E(s, i + 1))
            } else {
                (DivSym::E(s, n - 1), DivSym::E(s.conj(), 1))
            };
            let blown_pair = if i <= n - 2 {
                (plus.clone(), e_here.to_string())
            } else {
                (minus.clone(), e_next.to_string())
            };
            odps.push(Odp {
                name: format!("p{}{i}", s.mark()),
                side: s,
                index: i,
                divisors: vec![plus, minus, e_here.to_string(), e_next.to_string()],
                blown_pair,
                curve: CurveSym::Delta(s, i),
            });
        }
    }
    Ok(IncidenceComplex {
        n,
        components,
        curves,
        odps,
    })
}

impl IncidenceComplex {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[EComponent] {
        &self.components
    }

    pub fn component(&self, s: Side, j: usize) -> &EComponent {
        let idx = match s {
            Side::Plain => j - 1,
            Side::Bar => self.n - 1 + j - 1,
        };
        &self.components[idx]
    }

    pub fn component_of(&self, d: DivSym) -> Option<&EComponent> {
        match d {
            DivSym::T => None,
            DivSym::E(s, j) => Some(self.component(s, j)),
        }
    }

    pub fn divisors(&self) -> Vec<DivSym> {
        let mut out = vec![DivSym::T];
        for s in Side::both() {
            for j in 1..self.n {
                out.push(DivSym::E(s, j));
            }
        }
        out
    }

    pub fn curves(&self) -> &[CurveSym] {
        &self.curves
    }

    pub fn odps(&self) -> &[Odp] {
        &self.odps
    }

    /// Components of the cylinder containing `c`.
    pub fn containing(&self, c: CurveSym) -> Vec<&EComponent> {
        self.components.iter().filter(|e| e.contains(c)).collect()
    }

    /// The face shared by two components, if adjacent.
    pub fn face(&self, a: DivSym, b: DivSym) -> Option<CurveSym> {
        let (ea, eb) = (self.component_of(a)?, self.component_of(b)?);
        if a == b {
            return None;
        }
        [ea.left, ea.right]
            .into_iter()
            .find(|f| *f == eb.left || *f == eb.right)
    }

    pub fn pushforward(&self, c: CurveSym) -> Pushforward {
        match c {
            CurveSym::C(s, _, j) | CurveSym::G(s, j) => Pushforward::Component(s, j),
            CurveSym::Gamma(..) | CurveSym::Delta(..) => Pushforward::Point,
            CurveSym::L(_) => Pushforward::Line,
        }
    }

    /// Components containing a small-resolution curve through the twistor line `L_i`.
    pub fn line_meets(&self, i: usize, d: DivSym) -> bool {
        match d {
            DivSym::T => false,
            DivSym::E(..) => {
                let e = self.component_of(d).expect("E symbol");
                Side::both()
                    .into_iter()
                    .any(|s| e.contains(CurveSym::Delta(s, i)))
            }
        }
    }

    /// Degree-one divisor containing the fiber curve `C(s, i, j)`.
    pub fn s_host_of(&self, c: CurveSym) -> Option<(Sign, usize)> {
        match c {
            CurveSym::C(s, i, j) => {
                let plain = if j <= i { Sign::Minus } else { Sign::Plus };
                Some((if s == Side::Plain { plain } else { plain.conj() }, i))
            }
            CurveSym::Delta(s, i) => {
                let plain = if i <= self.n - 2 { Sign::Plus } else { Sign::Minus };
                Some((if s == Side::Plain { plain } else { plain.conj() }, i))
            }
            _ => None,
        }
    }

    /// Curves on the degree-one divisor `S_i^sign` and their adjacencies.
    pub fn s_host(&self, sign: Sign, i: usize) -> SHost {
        let n = self.n;
        if sign == Sign::Plus {
            let m = self.s_host(Sign::Minus, i);
            return SHost {
                sign,
                i,
                curves: m.curves.iter().map(|c| c.conj()).collect(),
                adjacent: m.adjacent.iter().map(|(a, b)| (a.conj(), b.conj())).collect(),
            };
        }
        let mut chain = Vec::new();
        let mut adjacent = Vec::new();
        let extra;
        if i <= n - 2 {
            for j in i + 1..n {
                chain.push(CurveSym::C(Side::Bar, i, j));
            }
            for j in 1..=i {
                chain.push(CurveSym::C(Side::Plain, i, j));
            }
            let d = CurveSym::Delta(Side::Bar, i);
            adjacent.push((d, CurveSym::C(Side::Bar, i, i + 1)));
            adjacent.push((CurveSym::L(i), CurveSym::C(Side::Plain, i, i)));
            adjacent.push((CurveSym::L(i), d));
            extra = d;
        } else {
            for j in 1..n {
                chain.push(CurveSym::C(Side::Plain, i, j));
            }
            let d = CurveSym::Delta(Side::Plain, i);
            adjacent.push((d, CurveSym::C(Side::Plain, i, n - 1)));
            adjacent.push((CurveSym::L(i), CurveSym::C(Side::Plain, i, 1)));
            adjacent.push((CurveSym::L(i), d));
            extra = d;
        }
        for w in chain.windows(2) {
            adjacent.push((w[0], w[1]));
        }
        let mut curves = chain;
        curves.push(extra);
        curves.push(CurveSym::L(i));
        SHost {
            sign,
            i,
            curves,
            adjacent,
        }
    }
}

/// Local incidence data of a degree-one divisor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SHost {
    pub sign: Sign,
    pub i: usize,
    pub curves: Vec<CurveSym>,
    pub adjacent: Vec<(CurveSym, CurveSym)>,
}

impl SHost {
    pub fn name(&self) -> String {
        match self.sign {
            Sign::Plus => format!("S{}+", self.i),
            Sign::Minus => format!("S{}-", self.i),
        }
    }

    pub fn meet(&self, a: CurveSym, b: CurveSym) -> i64 {
        self.adjacent
            .iter()
            .filter(|(x, y)| (*x == a && *y == b) || (*x == b && *y == a))
            .count() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_resolution_layout() {
        let c = build_incidence(5).unwrap();
        assert_eq!(c.component(Side::Plain, 1).tower.steps().len(), 2);
        assert_eq!(c.component(Side::Plain, 2).tower.steps().len(), 1);
        assert_eq!(c.component(Side::Plain, 4).tower.steps().len(), 0);
        assert_eq!(c.odps().len(), 8);
        let e1 = c.component(Side::Plain, 1);
        assert!(e1.contains(CurveSym::Delta(Side::Bar, 4)));
        assert_eq!(
            c.face(DivSym::E(Side::Plain, 4), DivSym::E(Side::Bar, 1)),
            Some(CurveSym::Gamma(Side::Plain, 4))
        );
        assert_eq!(c.face(DivSym::E(Side::Bar, 3), DivSym::E(Side::Plain, 2)), None);
    }

    #[test]
    fn host_conjugation() {
        let c = build_incidence(6).unwrap();
        let plus = c.s_host(Sign::Plus, 2);
        assert!(plus.curves.contains(&CurveSym::Delta(Side::Plain, 2)));
        assert_eq!(c.s_host_of(CurveSym::Delta(Side::Plain, 2)), Some((Sign::Plus, 2)));
        assert_eq!(c.s_host_of(CurveSym::C(Side::Bar, 2, 2)), Some((Sign::Plus, 2)));
        assert_eq!(plus.meet(CurveSym::Delta(Side::Plain, 2), CurveSym::C(Side::Plain, 2, 3)), 1);
    }
}
