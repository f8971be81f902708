use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use super::complex::{CurveSym, DivSym, Side};

/// Symbols a formal bundle expression may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    /// Half-anticanonical class on Z.
    F,
    /// The class alpha_j on Z.
    Alpha(usize),
    /// Pullback of F to the first blowup.
    PullF,
    PullAlpha(usize),
    /// Pullback of the base hyperplane class along the pencil map.
    T,
    E(Side, usize),
    /// Degree-one divisor on Z.
    SMinusZ(usize),
    /// Strict transform of a degree-one divisor on the first blowup.
    SMinus(usize),
    /// Strict transform of a smooth fiber on the first blowup.
    Fiber(usize),
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::F => write!(f, "F"),
            Sym::Alpha(j) => write!(f, "a{j}"),
            Sym::PullF => write!(f, "mu*F"),
            Sym::PullAlpha(j) => write!(f, "mu*a{j}"),
            Sym::T => write!(f, "T"),
            Sym::E(s, j) => write!(f, "{}", DivSym::E(*s, *j)),
            Sym::SMinusZ(i) => write!(f, "S{i}-[Z]"),
            Sym::SMinus(i) => write!(f, "S{i}-"),
            Sym::Fiber(k) => write!(f, "S_{k}"),
        }
    }
}

impl From<DivSym> for Sym {
    fn from(d: DivSym) -> Self {
        match d {
            DivSym::T => Sym::T,
            DivSym::E(s, j) => Sym::E(s, j),
        }
    }
}

/// Formal rational combination of divisor symbols on a named stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleExpression {
    pub stage: String,
    terms: BTreeMap<Sym, Rational64>,
}

pub fn q(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

pub fn half(n: i64) -> Rational64 {
    Rational64::new(n, 2)
}

impl BundleExpression {
    pub fn zero(stage: &str) -> Self {
        Self {
            stage: stage.to_string(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(stage: &str, terms: impl IntoIterator<Item = (Sym, Rational64)>) -> Self {
        let mut e = Self::zero(stage);
        for (s, c) in terms {
            e.add_term(s, c);
        }
        e
    }

    pub fn single(stage: &str, s: Sym) -> Self {
        Self::from_terms(stage, [(s, Rational64::one())])
    }

    pub fn add_term(&mut self, s: Sym, c: Rational64) {
        let v = self.terms.entry(s).or_insert_with(Rational64::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&s);
        }
    }

    pub fn coeff(&self, s: Sym) -> Rational64 {
        self.terms.get(&s).copied().unwrap_or_else(Rational64::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Sym, &Rational64)> {
        self.terms.iter()
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(*s, *c);
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(q(-1)))
    }

    pub fn scaled(&self, k: Rational64) -> Self {
        let mut out = Self::zero(&self.stage);
        for (s, c) in &self.terms {
            out.add_term(*s, *c * k);
        }
        out
    }

    pub fn on_stage(mut self, stage: &str) -> Self {
        self.stage = stage.to_string();
        self
    }

    /// Replaces every occurrence of `s` by `by`.
    pub fn substitute(&self, s: Sym, by: &Self) -> Self {
        let c = self.coeff(s);
        let mut rest = self.clone();
        rest.terms.remove(&s);
        rest.plus(&by.scaled(c))
    }

    /// Rewrites symbols of Z into their pullbacks.
    pub fn pullback(&self, stage: &str) -> Self {
        let mut out = Self::zero(stage);
        for (s, c) in &self.terms {
            let t = match s {
                Sym::F => Sym::PullF,
                Sym::Alpha(j) => Sym::PullAlpha(*j),
                other => *other,
            };
            out.add_term(t, *c);
        }
        out
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Symbols whose coefficients differ, with both values.
    pub fn diff(&self, other: &Self) -> Vec<(Sym, Rational64, Rational64)> {
        let mut keys: Vec<Sym> = self.terms.keys().chain(other.terms.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter(|k| self.coeff(*k) != other.coeff(*k))
            .map(|k| (k, self.coeff(k), other.coeff(k)))
            .collect()
    }
}

impl fmt::Display for BundleExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (s, c) in &self.terms {
            let neg = *c < Rational64::zero();
            let a = if neg { -*c } else { *c };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            if a != Rational64::one() {
                write!(f, "{a}*")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl Serialize for BundleExpression {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn ser_ratio<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

pub fn ser_ratios<S: Serializer>(v: &[Rational64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

/// Total exceptional divisor of the first blowup.
pub fn total_e(n: usize) -> BundleExpression {
    let mut e = BundleExpression::zero("Z1");
    for s in Side::both() {
        for j in 1..n {
            e.add_term(Sym::E(s, j), q(1));
        }
    }
    e
}

/// Both conjugate components with a common coefficient.
pub fn pair(stage: &str, j: usize, c: Rational64) -> BundleExpression {
    BundleExpression::from_terms(stage, [(Sym::E(Side::Plain, j), c), (Sym::E(Side::Bar, j), c)])
}

/// Fixed-part subtraction of the pulled-back pluri-half-anticanonical system.
pub fn fixed_part_e(n: usize) -> BundleExpression {
    let ni = n as i64;
    let mut e = pair("Z1", 1, q(ni - 3));
    for i in 2..=n - 2 {
        e = e.plus(&pair("Z1", i, q(ni - 1 - i as i64)));
    }
    e
}

/// The first line bundle on the blowup, in terms of the pullback of F.
pub fn l1_expr(n: usize) -> BundleExpression {
    BundleExpression::single("Z1", Sym::PullF)
        .scaled(q(n as i64 - 2))
        .minus(&fixed_part_e(n))
}

/// Rewrites the pullback of F via the pencil map and the exceptional divisors.
pub fn eliminate_pull_f(e: &BundleExpression, n: usize) -> BundleExpression {
    let by = BundleExpression::single("Z1", Sym::T).plus(&total_e(n));
    e.substitute(Sym::PullF, &by)
}

/// Expected shape of the first line bundle after eliminating the pullback of F.
pub fn l1_via_t_expected(n: usize) -> BundleExpression {
    let mut e = BundleExpression::single("Z1", Sym::T).scaled(q(n as i64 - 2));
    e = e.plus(&pair("Z1", 1, q(1)));
    for j in 2..n {
        e = e.plus(&pair("Z1", j, q(j as i64 - 1)));
    }
    e
}

/// Kernel bundle: the first line bundle minus all smooth fibers and E.
pub fn l1_prime_expr(n: usize) -> BundleExpression {
    let mut e = l1_expr(n);
    let fiber = BundleExpression::single("Z1", Sym::PullF).minus(&total_e(n));
    for _ in 1..=n - 2 {
        e = e.minus(&fiber);
    }
    e.minus(&total_e(n))
}

pub fn l1_prime_expected(n: usize) -> BundleExpression {
    let mut e = BundleExpression::zero("Z1");
    for i in 3..n {
        e = e.plus(&pair("Z1", i, q(i as i64 - 2)));
    }
    e
}

/// Half-integral bundle on Z with leading alpha index `first` (1 or 2).
pub fn m_expr(n: usize, first: usize) -> BundleExpression {
    let ni = n as i64;
    let mut e = BundleExpression::single("Z", Sym::F).scaled(half(ni - 2));
    for j in 1..=n {
        let w = if j == first { ni - 2 } else { ni - 4 };
        e.add_term(Sym::Alpha(j), half(-w));
    }
    e
}

/// Class of a degree-one divisor on Z from a sign vector over alpha_1..alpha_n.
pub fn s_minus_from_signs(eps: &[i64]) -> BundleExpression {
    let mut e = BundleExpression::single("Z", Sym::F).scaled(half(1));
    for (j, &s) in eps.iter().enumerate() {
        e.add_term(Sym::Alpha(j + 1), half(-s));
    }
    e
}

/// Bundle on the first blowup with unbarred subtraction only.
pub fn m1_expr(n: usize) -> BundleExpression {
    let ni = n as i64;
    let mut e = m_expr(n, 1).pullback("Z1");
    e.add_term(Sym::E(Side::Plain, 1), q(3 - ni));
    for i in 2..=n - 2 {
        e.add_term(Sym::E(Side::Plain, i), q(i as i64 + 1 - ni));
    }
    e
}

/// Symbols with pairing-table values.
pub fn table_symbol(s: Sym) -> Option<DivSym> {
    match s {
        Sym::T => Some(DivSym::T),
        Sym::E(side, j) => Some(DivSym::E(side, j)),
        _ => None,
    }
}

/// Curves the cascade tests on each component: generic fiber and blown curve.
pub fn cascade_probes(side: Side, j: usize, n: usize) -> Vec<CurveSym> {
    let mut v = vec![CurveSym::G(side, j)];
    if j <= n - 2 {
        v.push(CurveSym::Delta(side, j));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_and_display() {
        let e = BundleExpression::from_terms("Z1", [(Sym::PullF, q(2)), (Sym::T, q(-1))]);
        let r = e.substitute(Sym::PullF, &BundleExpression::single("Z1", Sym::T));
        assert_eq!(r.coeff(Sym::T), q(1));
        assert_eq!(r.to_string(), "T");
        assert_eq!(m_expr(4, 1).coeff(Sym::Alpha(1)), q(-1));
    }
}
