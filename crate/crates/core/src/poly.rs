//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

pub type Exponent = Vec<u32>;

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_frac(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Formats as "num/den" with den > 0, always including the denominator.
pub fn rat_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rat_from_str(s: &str) -> Result<BigRational> {
    let parse = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| EngineError::Parse(format!("bad rational {s:?}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse(q)?;
            if q.is_zero() {
                return Err(EngineError::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(parse(p)?, q))
        }
        None => Ok(BigRational::from_integer(parse(s)?)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Exponent, BigRational>,
}

impl MultiPoly {
    pub fn zero(vars: &[String]) -> Self {
        Self {
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[String], c: BigRational) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars.len()], c);
        p
    }

    pub fn var(vars: &[String], i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, BigRational::one());
        p
    }

    pub fn monomial(vars: &[String], exp: Exponent, c: BigRational) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(exp, c);
        p
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exp: Exponent, c: BigRational) {
        debug_assert_eq!(exp.len(), self.vars.len());
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn coeff(&self, exp: &[u32]) -> BigRational {
        self.terms.get(exp).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut p = Self::zero(&self.vars);
        if c.is_zero() {
            return p;
        }
        for (e, k) in &self.terms {
            p.terms.insert(e.clone(), k * c);
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(&self.vars, BigRational::one());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Common degree of every term, or None for zero or mixed degrees.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.homogeneous_degree().is_some()
    }

    /// Substitutes polynomial `images[i]` (over a common variable set) for variable i.
    pub fn compose(&self, images: &[MultiPoly]) -> Result<MultiPoly> {
        if images.len() != self.vars.len() {
            return Err(EngineError::Poly(format!(
                "compose needs {} images, got {}",
                self.vars.len(),
                images.len()
            )));
        }
        let target = images
            .first()
            .map(|p| p.vars.clone())
            .unwrap_or_default();
        if images.iter().any(|p| p.vars != target) {
            return Err(EngineError::Poly("images use different variable sets".into()));
        }
        if images.iter().all(|p| p.terms.len() <= 1) {
            return Ok(self.compose_monomial(images, &target));
        }
        let maxdeg: Vec<u32> = (0..self.vars.len())
            .map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
            .collect();
        let mut powers: Vec<Vec<MultiPoly>> = Vec::new();
        for (i, img) in images.iter().enumerate() {
            let mut v = vec![MultiPoly::constant(&target, BigRational::one())];
            for k in 1..=maxdeg[i] as usize {
                let next = &v[k - 1] * img;
                v.push(next);
            }
            powers.push(v);
        }
        let mut out = MultiPoly::zero(&target);
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(&target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &powers[i][k as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    fn compose_monomial(&self, images: &[MultiPoly], target: &[String]) -> MultiPoly {
        let imgs: Vec<Option<(&Exponent, &BigRational)>> =
            images.iter().map(|p| p.terms.iter().next()).collect();
        let mut out = MultiPoly::zero(target);
        'terms: for (e, c) in &self.terms {
            let mut exp = vec![0u32; target.len()];
            let mut coeff = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let Some((ie, ic)) = imgs[i] else {
                    continue 'terms;
                };
                for (slot, &x) in exp.iter_mut().zip(ie) {
                    *slot += x * k;
                }
                if !ic.is_one() {
                    for _ in 0..k {
                        coeff *= ic;
                    }
                }
            }
            out.add_term(exp, coeff);
        }
        out
    }

    /// Sets variable i to a rational value, keeping the variable list.
    pub fn substitute_value(&self, i: usize, v: &BigRational) -> Self {
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[i];
            e2[i] = 0;
            let mut factor = BigRational::one();
            for _ in 0..k {
                factor *= v;
            }
            out.add_term(e2, c * factor);
        }
        out
    }

    pub fn evaluate(&self, point: &[BigRational]) -> Result<BigRational> {
        if point.len() != self.vars.len() {
            return Err(EngineError::Poly("evaluation point has wrong length".into()));
        }
        let mut total = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            total += t;
        }
        Ok(total)
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * rat(e[i] as i64));
        }
        out
    }

    /// Univariate polynomial in variable i, requiring every other exponent to vanish.
    pub fn to_univariate(&self, i: usize) -> Result<UniPoly> {
        let mut coeffs = Vec::new();
        for (e, c) in &self.terms {
            if e.iter().enumerate().any(|(j, &k)| j != i && k != 0) {
                return Err(EngineError::Poly("polynomial is not univariate".into()));
            }
            let d = e[i] as usize;
            if coeffs.len() <= d {
                coeffs.resize(d + 1, BigRational::zero());
            }
            coeffs[d] = c.clone();
        }
        Ok(UniPoly::new(coeffs))
    }

    fn check_vars(&self, other: &Self) {
        assert_eq!(self.vars, other.vars, "polynomials over different variables");
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, o: &MultiPoly) -> MultiPoly {
        self.check_vars(o);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, o: &MultiPoly) -> MultiPoly {
        self + &(-o)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&rat(-1))
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: &MultiPoly) -> MultiPoly {
        self.check_vars(o);
        let mut out = MultiPoly::zero(&self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        self.vars[i].clone()
                    } else {
                        format!("{}^{k}", self.vars[i])
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{a}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Wire form: variables plus a map from comma-joined exponents to "num/den".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub vars: Vec<String>,
    pub terms: BTreeMap<String, String>,
}

impl From<&MultiPoly> for PolyJson {
    fn from(p: &MultiPoly) -> Self {
        PolyJson {
            vars: p.vars.clone(),
            terms: p
                .terms
                .iter()
                .map(|(e, c)| {
                    let key = e.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
                    (key, rat_to_string(c))
                })
                .collect(),
        }
    }
}

impl TryFrom<&PolyJson> for MultiPoly {
    type Error = EngineError;
    fn try_from(j: &PolyJson) -> Result<Self> {
        let mut p = MultiPoly::zero(&j.vars);
        for (k, v) in &j.terms {
            let e: Exponent = k
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<u32>()
                        .map_err(|_| EngineError::Parse(format!("bad exponent {k:?}")))
                })
                .collect::<Result<_>>()?;
            if e.len() != j.vars.len() {
                return Err(EngineError::Parse(format!("exponent {k:?} has wrong length")));
            }
            p.add_term(e, rat_from_str(v)?);
        }
        Ok(p)
    }
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PolyJson::deserialize(d)?;
        MultiPoly::try_from(&j).map_err(serde::de::Error::custom)
    }
}

/// Dense univariate polynomial, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<BigRational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn lead(&self) -> &BigRational {
        self.coeffs.last().expect("nonzero polynomial")
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat(i as i64))
                .collect(),
        )
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead().clone();
        Self::new(self.coeffs.iter().map(|c| c / &l).collect())
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.coeffs.clone();
        let dd = d.degree().expect("nonzero");
        if r.len() <= dd {
            return (Self::new(Vec::new()), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        let l = d.lead().clone();
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / &l;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Squarefree factors by multiplicity (Yun).
    pub fn squarefree_decomposition(&self) -> Vec<(usize, UniPoly)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let mut a = f.gcd(&fp);
        let mut b = f.div_rem(&a).0;
        let mut c = fp.div_rem(&a).0;
        let mut d = &c - &b.derivative();
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((i, a.clone()));
            }
            b = b.div_rem(&a).0;
            c = d.div_rem(&a).0;
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    /// True iff the polynomial is a constant times a square over an algebraic closure.
    pub fn is_square_up_to_constant(&self) -> bool {
        self.squarefree_decomposition()
            .iter()
            .all(|(m, _)| m % 2 == 0)
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, o: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = BigRational::zero();
        UniPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) - o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }
}

/// Variable names x0..x(k-1) with a prefix.
pub fn var_names(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_composition() {
        let v = var_names("x", 2);
        let x = MultiPoly::var(&v, 0);
        let y = MultiPoly::var(&v, 1);
        let p = &(&x + &y) * &(&x - &y);
        assert_eq!(p, &x.pow(2) - &y.pow(2));
        let w = var_names("t", 1);
        let t = MultiPoly::var(&w, 0);
        let one = MultiPoly::constant(&w, rat(1));
        let q = p.compose(&[t.clone(), one]).unwrap();
        assert_eq!(q, &t.pow(2) - &MultiPoly::constant(&w, rat(1)));
    }

    #[test]
    fn yun_detects_squares() {
        let u = UniPoly::new(vec![rat(1), rat(2), rat(1)]);
        assert!(u.is_square_up_to_constant());
        let v = UniPoly::new(vec![rat(-1), rat(0), rat(1)]);
        assert!(!v.is_square_up_to_constant());
    }

    #[test]
    fn rational_strings_round_trip() {
        let r = rat_frac(-6, 4);
        assert_eq!(rat_to_string(&r), "-3/2");
        assert_eq!(rat_from_str("-3/2").unwrap(), r);
        assert_eq!(rat_from_str("5").unwrap(), rat(5));
    }
}
