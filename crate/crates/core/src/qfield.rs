//! Arithmetic in Q(sqrt d) for a fixed integer d.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::MultiPoly;

/// x + y*sqrt(d).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QElem {
    pub d: BigInt,
    pub x: BigRational,
    pub y: BigRational,
}

/// True when d is the square of an integer.
pub fn is_perfect_square(d: &BigInt) -> bool {
    if d.is_negative() {
        return false;
    }
    let r = d.sqrt();
    &r * &r == *d
}

impl QElem {
    pub fn rational(d: &BigInt, x: BigRational) -> Self {
        Self {
            d: d.clone(),
            x,
            y: BigRational::zero(),
        }
    }

    pub fn new(d: &BigInt, x: BigRational, y: BigRational) -> Self {
        Self { d: d.clone(), x, y }
    }

    /// Square root of a rational r in the field of d = num*den, so sqrt(r) = sqrt(d)/den.
    pub fn sqrt_of(r: &BigRational) -> Self {
        let d = r.numer() * r.denom();
        let y = BigRational::new(BigInt::one(), r.denom().clone());
        Self {
            d,
            x: BigRational::zero(),
            y,
        }
    }

    pub fn zero(d: &BigInt) -> Self {
        Self::rational(d, BigRational::zero())
    }

    pub fn one(d: &BigInt) -> Self {
        Self::rational(d, BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        if is_perfect_square(&self.d) {
            let r = BigRational::from_integer(self.d.sqrt());
            return (&self.x + &self.y * r).is_zero();
        }
        self.x.is_zero() && self.y.is_zero()
    }

    fn same_field(&self, o: &Self) {
        assert_eq!(self.d, o.d, "elements of different quadratic fields");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.same_field(o);
        Self::new(&self.d, &self.x + &o.x, &self.y + &o.y)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.same_field(o);
        Self::new(&self.d, &self.x - &o.x, &self.y - &o.y)
    }

    pub fn neg(&self) -> Self {
        Self::new(&self.d, -&self.x, -&self.y)
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.same_field(o);
        let d = BigRational::from_integer(self.d.clone());
        Self::new(
            &self.d,
            &self.x * &o.x + &self.y * &o.y * d,
            &self.x * &o.y + &self.y * &o.x,
        )
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(&self.d, &self.x * c, &self.y * c)
    }

    pub fn conj(&self) -> Self {
        Self::new(&self.d, self.x.clone(), -&self.y)
    }

    /// Field norm x^2 - d y^2.
    pub fn norm(&self) -> BigRational {
        let d = BigRational::from_integer(self.d.clone());
        &self.x * &self.x - &self.y * &self.y * d
    }

    /// Inverse, or None for zero (or a zero divisor when d is a square).
    pub fn inv(&self) -> Option<Self> {
        let nm = self.norm();
        if nm.is_zero() {
            return None;
        }
        let c = self.conj();
        Some(Self::new(&self.d, &c.x / &nm, &c.y / &nm))
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }
}

impl fmt::Display for QElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            write!(f, "{}", self.x)
        } else {
            write!(f, "{} + {}*sqrt({})", self.x, self.y, self.d)
        }
    }
}

/// Evaluates a rational polynomial at a point with coordinates in Q(sqrt d).
pub fn eval_poly(p: &MultiPoly, point: &[QElem], d: &BigInt) -> QElem {
    assert_eq!(point.len(), p.nvars(), "evaluation point has wrong length");
    let maxdeg: Vec<u32> = (0..p.nvars())
        .map(|i| p.terms().map(|(e, _)| e[i]).max().unwrap_or(0))
        .collect();
    let powers: Vec<Vec<QElem>> = point
        .iter()
        .zip(&maxdeg)
        .map(|(x, &m)| {
            let mut v = vec![QElem::one(d)];
            for k in 1..=m as usize {
                let next = v[k - 1].mul(x);
                v.push(next);
            }
            v
        })
        .collect();
    let mut total = QElem::zero(d);
    for (e, c) in p.terms() {
        let mut t = QElem::rational(d, c.clone());
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                t = t.mul(&powers[i][k as usize]);
            }
        }
        total = total.add(&t);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_frac};

    #[test]
    fn sqrt_squares_back() {
        let r = rat_frac(3, 5);
        let s = QElem::sqrt_of(&r);
        let sq = s.mul(&s);
        assert_eq!(sq, QElem::rational(&s.d, r));
    }

    #[test]
    fn inverse_multiplies_to_one() {
        let d = BigInt::from(7);
        let a = QElem::new(&d, rat(2), rat(-3));
        assert!(a.mul(&a.inv().unwrap()).sub(&QElem::one(&d)).is_zero());
    }
}
