//! Picard-lattice arithmetic for iterated point blowups of the quadric surface.
//!
//! Classes are integer vectors over an ordered basis; the bilinear form is an
//! explicit symmetric integer matrix. Blown points are described only by the
//! list of tracked curves passing through them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{EngineError, Result};

/// Ordered basis symbols together with a symmetric integer form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    names: Arc<Vec<String>>,
    form: Vec<Vec<i64>>,
}

impl LatticeBasis {
    pub fn new(names: Vec<String>, form: Vec<Vec<i64>>) -> Result<Self> {
        let r = names.len();
        if form.len() != r || form.iter().any(|row| row.len() != r) {
            return Err(EngineError::Lattice(format!(
                "form must be {r}x{r} for {r} basis symbols"
            )));
        }
        for i in 0..r {
            for j in 0..i {
                if form[i][j] != form[j][i] {
                    return Err(EngineError::Lattice(format!(
                        "form is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self {
            names: Arc::new(names),
            form,
        })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn form(&self) -> &[Vec<i64>] {
        &self.form
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Basis vector for `name`.
    pub fn generator(&self, name: &str) -> Result<DivisorClass> {
        let i = self
            .index_of(name)
            .ok_or_else(|| EngineError::Lattice(format!("unknown basis symbol {name}")))?;
        let mut c = self.zero();
        c.coeffs[i] = 1;
        Ok(c)
    }

    pub fn zero(&self) -> DivisorClass {
        DivisorClass {
            names: Arc::clone(&self.names),
            coeffs: vec![0; self.rank()],
        }
    }

    /// Builds a class from `(symbol, coefficient)` pairs.
    pub fn class_of(&self, terms: &[(&str, i64)]) -> Result<DivisorClass> {
        let mut c = self.zero();
        for (name, k) in terms {
            let i = self
                .index_of(name)
                .ok_or_else(|| EngineError::Lattice(format!("unknown basis symbol {name}")))?;
            c.coeffs[i] += k;
        }
        Ok(c)
    }

    pub fn from_coeffs(&self, coeffs: Vec<i64>) -> Result<DivisorClass> {
        if coeffs.len() != self.rank() {
            return Err(EngineError::Lattice(format!(
                "expected {} coefficients, got {}",
                self.rank(),
                coeffs.len()
            )));
        }
        Ok(DivisorClass {
            names: Arc::clone(&self.names),
            coeffs,
        })
    }

    /// Evaluates the form on two classes of this lattice.
    pub fn intersect(&self, a: &DivisorClass, b: &DivisorClass) -> Result<i64> {
        if !self.owns(a) || !self.owns(b) {
            return Err(EngineError::BasisMismatch);
        }
        let mut total = 0i64;
        for (i, ai) in a.coeffs.iter().enumerate() {
            if *ai == 0 {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                total += ai * self.form[i][j] * bj;
            }
        }
        Ok(total)
    }

    pub fn square(&self, a: &DivisorClass) -> Result<i64> {
        self.intersect(a, a)
    }

    fn owns(&self, c: &DivisorClass) -> bool {
        Arc::ptr_eq(&self.names, &c.names) || *self.names == *c.names
    }

    /// Exact determinant of the form (Bareiss elimination).
    pub fn determinant(&self) -> i128 {
        let r = self.rank();
        if r == 0 {
            return 1;
        }
        let mut m: Vec<Vec<i128>> = self
            .form
            .iter()
            .map(|row| row.iter().map(|&x| x as i128).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..r - 1 {
            if m[k][k] == 0 {
                match (k + 1..r).find(|&i| m[i][k] != 0) {
                    Some(p) => {
                        m.swap(k, p);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..r {
                for j in k + 1..r {
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
                }
            }
            prev = m[k][k];
        }
        sign * m[r - 1][r - 1]
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs() == 1
    }

    /// Returns a copy with one extra symbol `name` of square -1, orthogonal to the rest.
    fn extended(&self, name: &str) -> Self {
        let mut names = (*self.names).clone();
        names.push(name.to_string());
        let r = names.len();
        let mut form: Vec<Vec<i64>> = self
            .form
            .iter()
            .map(|row| {
                let mut row = row.clone();
                row.push(0);
                row
            })
            .collect();
        let mut last = vec![0; r];
        last[r - 1] = -1;
        form.push(last);
        Self {
            names: Arc::new(names),
            form,
        }
    }

    /// Permutes the basis into `order`, which must list every symbol once.
    pub fn reordered(&self, order: &[String]) -> Result<(Self, Vec<usize>)> {
        if order.len() != self.rank() {
            return Err(EngineError::Lattice("reorder length mismatch".into()));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|n| {
                self.index_of(n)
                    .ok_or_else(|| EngineError::Lattice(format!("unknown basis symbol {n}")))
            })
            .collect::<Result<_>>()?;
        let form = perm
            .iter()
            .map(|&i| perm.iter().map(|&j| self.form[i][j]).collect())
            .collect();
        Ok((Self::new(order.to_vec(), form)?, perm))
    }
}

/// The rank-2 lattice of the quadric surface with the hyperbolic form.
pub fn new_quadric_lattice() -> LatticeBasis {
    LatticeBasis::new(
        vec!["H1".to_string(), "H2".to_string()],
        vec![vec![0, 1], vec![1, 0]],
    )
    .expect("hyperbolic plane is a valid form")
}

/// Integer vector over a [`LatticeBasis`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DivisorClass {
    names: Arc<Vec<String>>,
    coeffs: Vec<i64>,
}

impl DivisorClass {
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, name: &str) -> Option<i64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coeffs[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn same_basis(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.names, &other.names) || *self.names == *other.names
    }

    /// Exact division by `k`, if every coefficient is divisible.
    pub fn div_exact(&self, k: i64) -> Option<Self> {
        if k == 0 || self.coeffs.iter().any(|c| c % k != 0) {
            return None;
        }
        Some(Self {
            names: Arc::clone(&self.names),
            coeffs: self.coeffs.iter().map(|c| c / k).collect(),
        })
    }

    fn zip(&self, other: &Self, f: impl Fn(i64, i64) -> i64) -> Self {
        assert!(self.same_basis(other), "divisor classes over different bases");
        Self {
            names: Arc::clone(&self.names),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Add for &DivisorClass {
    type Output = DivisorClass;
    fn add(self, rhs: Self) -> DivisorClass {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Add for DivisorClass {
    type Output = DivisorClass;
    fn add(self, rhs: Self) -> DivisorClass {
        &self + &rhs
    }
}

impl Sub for &DivisorClass {
    type Output = DivisorClass;
    fn sub(self, rhs: Self) -> DivisorClass {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Sub for DivisorClass {
    type Output = DivisorClass;
    fn sub(self, rhs: Self) -> DivisorClass {
        &self - &rhs
    }
}

impl Neg for &DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        DivisorClass {
            names: Arc::clone(&self.names),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        -&self
    }
}

impl Mul<&DivisorClass> for i64 {
    type Output = DivisorClass;
    fn mul(self, rhs: &DivisorClass) -> DivisorClass {
        DivisorClass {
            names: Arc::clone(&rhs.names),
            coeffs: rhs.coeffs.iter().map(|c| self * c).collect(),
        }
    }
}

impl Mul<DivisorClass> for i64 {
    type Output = DivisorClass;
    fn mul(self, rhs: DivisorClass) -> DivisorClass {
        self * &rhs
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, &c) in self.names.iter().zip(&self.coeffs) {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            if mag == 1 {
                write!(f, "{sign}{name}")?;
            } else {
                write!(f, "{sign}{mag}{name}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Serializes as a map from basis symbol to integer coefficient.
impl Serialize for DivisorClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.coeffs.len()))?;
        for (name, c) in self.names.iter().zip(&self.coeffs) {
            m.serialize_entry(name, c)?;
        }
        m.end()
    }
}

/// One point blowup: the new exceptional symbol and the tracked curves through the point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlowupStep {
    pub exceptional: String,
    pub incident: Vec<String>,
}

/// An iterated point blowup of the quadric with tracked curve classes.
#[derive(Clone, Debug)]
pub struct BlowupTower {
    lattice: LatticeBasis,
    steps: Vec<BlowupStep>,
    tracked: BTreeMap<String, Vec<i64>>,
}

impl BlowupTower {
    /// Starts from the quadric with the given tracked curves of bidegree `(a, b)`.
    pub fn on_quadric(curves: &[(&str, i64, i64)]) -> Self {
        let mut tracked = BTreeMap::new();
        for (name, a, b) in curves {
            tracked.insert(name.to_string(), vec![*a, *b]);
        }
        Self {
            lattice: new_quadric_lattice(),
            steps: Vec::new(),
            tracked,
        }
    }

    /// Blows up a point lying on exactly the listed tracked curves.
    ///
    /// The exceptional curve is tracked under `curve_name` with class `symbol`.
    pub fn blow_up(&mut self, symbol: &str, curve_name: &str, incident: &[&str]) -> Result<()> {
        if self.lattice.index_of(symbol).is_some() {
            return Err(EngineError::Lattice(format!("symbol {symbol} already used")));
        }
        if self.tracked.contains_key(curve_name) {
            return Err(EngineError::Lattice(format!(
                "curve {curve_name} already tracked"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in incident {
            if !self.tracked.contains_key(*c) {
                return Err(EngineError::Lattice(format!("untracked curve {c}")));
            }
            if !seen.insert(*c) {
                return Err(EngineError::Lattice(format!("curve {c} listed twice")));
            }
        }
        self.lattice = self.lattice.extended(symbol);
        for v in self.tracked.values_mut() {
            v.push(0);
        }
        let last = self.lattice.rank() - 1;
        for c in incident {
            self.tracked.get_mut(*c).expect("checked above")[last] -= 1;
        }
        let mut cls = vec![0; self.lattice.rank()];
        cls[last] = 1;
        self.tracked.insert(curve_name.to_string(), cls);
        self.steps.push(BlowupStep {
            exceptional: symbol.to_string(),
            incident: incident.iter().map(|s| s.to_string()).collect(),
        });
        Ok(())
    }

    pub fn lattice(&self) -> &LatticeBasis {
        &self.lattice
    }

    pub fn steps(&self) -> &[BlowupStep] {
        &self.steps
    }

    pub fn tracked_names(&self) -> impl Iterator<Item = &str> {
        self.tracked.keys().map(String::as_str)
    }

    pub fn class(&self, curve: &str) -> Result<DivisorClass> {
        let v = self
            .tracked
            .get(curve)
            .ok_or_else(|| EngineError::Lattice(format!("untracked curve {curve}")))?;
        self.lattice.from_coeffs(v.clone())
    }

    /// Intersection number of two tracked curves.
    pub fn meet(&self, a: &str, b: &str) -> Result<i64> {
        self.lattice.intersect(&self.class(a)?, &self.class(b)?)
    }

    /// Rewrites the basis into the given order.
    pub fn reorder_basis(&mut self, order: &[String]) -> Result<()> {
        let (lat, perm) = self.lattice.reordered(order)?;
        for v in self.tracked.values_mut() {
            *v = perm.iter().map(|&i| v[i]).collect();
        }
        self.lattice = lat;
        Ok(())
    }
}

/// The surface S: quadric blown up 2n times along a reducible (2,2)-cycle.
#[derive(Clone, Debug)]
pub struct SurfaceS {
    n: usize,
    tower: BlowupTower,
}

/// Name of the tracked exceptional curve created with symbol `sym`.
fn ex(sym: &str) -> String {
    format!("X:{sym}")
}

/// Builds the tower for S with cycle components C1..C(n-1), Cb1..Cb(n-1).
pub fn build_surface_s(n: usize) -> Result<SurfaceS> {
    if n < 4 {
        return Err(EngineError::InvalidN { n, min: 4 });
    }
    let mut t = BlowupTower::on_quadric(&[("C1", 1, 0), ("C2", 0, 1), ("Cb1", 1, 0), ("Cb2", 0, 1)]);
    for (sym, on) in [
        ("e1", "C1"),
        ("e2", "C1"),
        ("e3", "C2"),
        ("eb1", "Cb1"),
        ("eb2", "Cb1"),
        ("eb3", "Cb2"),
    ] {
        t.blow_up(sym, &ex(sym), &[on])?;
    }
    t.blow_up("e4", &ex("e4"), &["C1", "Cb2"])?;
    t.blow_up("eb4", &ex("eb4"), &["Cb1", "C2"])?;
    for k in 5..=n {
        let prev = ex(&format!("e{}", k - 1));
        t.blow_up(&format!("e{k}"), &ex(&format!("e{k}")), &["C1", &prev])?;
        let prevb = ex(&format!("eb{}", k - 1));
        t.blow_up(&format!("eb{k}"), &ex(&format!("eb{k}")), &["Cb1", &prevb])?;
    }
    let mut order = vec!["H1".to_string(), "H2".to_string()];
    order.extend((1..=n).map(|j| format!("e{j}")));
    order.extend((1..=n).map(|j| format!("eb{j}")));
    t.reorder_basis(&order)?;
    Ok(SurfaceS { n, tower: t })
}

impl SurfaceS {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tower(&self) -> &BlowupTower {
        &self.tower
    }

    pub fn lattice(&self) -> &LatticeBasis {
        self.tower.lattice()
    }

    /// Tracked-curve name of the cycle component C_i (or its conjugate).
    pub fn component_name(&self, i: usize, conj: bool) -> String {
        assert!((1..self.n).contains(&i), "component index out of range");
        match (i, conj) {
            (1, false) => "C1".into(),
            (2, false) => "C2".into(),
            (1, true) => "Cb1".into(),
            (2, true) => "Cb2".into(),
            // the chain between C2 and Cb1 comes from the eb-blowups, and vice versa
            (k, false) => ex(&format!("eb{}", k + 1)),
            (k, true) => ex(&format!("e{}", k + 1)),
        }
    }

    pub fn component(&self, i: usize, conj: bool) -> DivisorClass {
        self.tower
            .class(&self.component_name(i, conj))
            .expect("cycle components are tracked")
    }

    /// Cycle components in cyclic order C1..C(n-1), Cb1..Cb(n-1).
    pub fn cycle(&self) -> Vec<DivisorClass> {
        let mut v: Vec<_> = (1..self.n).map(|i| self.component(i, false)).collect();
        v.extend((1..self.n).map(|i| self.component(i, true)));
        v
    }

    /// Labels matching [`Self::cycle`].
    pub fn cycle_labels(&self) -> Vec<String> {
        let mut v: Vec<_> = (1..self.n).map(|i| format!("C{i}")).collect();
        v.extend((1..self.n).map(|i| format!("Cb{i}")));
        v
    }

    pub fn e(&self, j: usize) -> DivisorClass {
        self.lattice().generator(&format!("e{j}")).expect("e_j in basis")
    }

    pub fn ebar(&self, j: usize) -> DivisorClass {
        self.lattice().generator(&format!("eb{j}")).expect("eb_j in basis")
    }

    pub fn h(&self, k: usize) -> DivisorClass {
        self.lattice().generator(&format!("H{k}")).expect("H_k in basis")
    }

    /// K_S = -2H1 - 2H2 + sum e + sum eb.
    pub fn canonical(&self) -> DivisorClass {
        let mut k = -2 * &(&self.h(1) + &self.h(2));
        for j in 1..=self.n {
            k = &k + &(&self.e(j) + &self.ebar(j));
        }
        k
    }

    /// alpha_j restricted to S, i.e. e_j - eb_j.
    pub fn alpha(&self, j: usize) -> DivisorClass {
        &self.e(j) - &self.ebar(j)
    }

    pub fn dot(&self, a: &DivisorClass, b: &DivisorClass) -> i64 {
        self.lattice().intersect(a, b).expect("classes built on S")
    }

    /// Self-intersections of C1..C(n-1).
    pub fn self_intersection_profile(&self) -> Vec<i64> {
        (1..self.n)
            .map(|i| {
                let c = self.component(i, false);
                self.dot(&c, &c)
            })
            .collect()
    }

    /// Full intersection matrix of the 2(n-1) cycle components.
    pub fn cycle_matrix(&self) -> Vec<Vec<i64>> {
        let cyc = self.cycle();
        cyc.iter()
            .map(|a| cyc.iter().map(|b| self.dot(a, b)).collect())
            .collect()
    }
}

/// Pairing of two classes over a lattice.
pub fn intersect(lattice: &LatticeBasis, a: &DivisorClass, b: &DivisorClass) -> Result<i64> {
    lattice.intersect(a, b)
}

/// True iff the cycle components sum to -K_S.
pub fn anticanonical_cycle_check(s: &SurfaceS) -> bool {
    cycle_sum_is_anticanonical(s, &s.cycle())
}

/// Same test for an arbitrary list of components.
pub fn cycle_sum_is_anticanonical(s: &SurfaceS, components: &[DivisorClass]) -> bool {
    let sum = components
        .iter()
        .fold(s.lattice().zero(), |acc, c| &acc + c);
    sum == -s.canonical()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadric_form() {
        let q = new_quadric_lattice();
        assert_eq!(q.form(), &[vec![0, 1], vec![1, 0]]);
        let h1 = q.generator("H1").unwrap();
        let h = &h1 + &q.generator("H2").unwrap();
        assert_eq!(q.square(&h1).unwrap(), 0);
        assert_eq!(q.square(&h).unwrap(), 2);
        assert_eq!(q.determinant(), -1);
    }

    #[test]
    fn small_n_rejected() {
        assert!(matches!(build_surface_s(3), Err(EngineError::InvalidN { .. })));
    }

    #[test]
    fn tower_steps_and_display() {
        let s = build_surface_s(5).unwrap();
        assert_eq!(s.tower().steps().len(), 10);
        assert_eq!(s.component(1, false).to_string(), "H1-e1-e2-e4-e5");
    }

    #[test]
    fn blowup_rejects_bad_incidence() {
        let mut t = BlowupTower::on_quadric(&[("A", 1, 0)]);
        assert!(t.blow_up("x", "X", &["B"]).is_err());
        assert!(t.blow_up("x", "X", &["A", "A"]).is_err());
        t.blow_up("x", "X", &["A"]).unwrap();
        assert!(t.blow_up("x", "Y", &["A"]).is_err());
    }

    #[test]
    fn mismatched_basis_is_an_error() {
        let q = new_quadric_lattice();
        let s = build_surface_s(4).unwrap();
        assert!(matches!(
            q.intersect(&q.generator("H1").unwrap(), &s.e(1)),
            Err(EngineError::BasisMismatch)
        ));
    }
}
