//! Exact sparse linear solve over the rationals, block by block.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{EngineError, Result};

#[derive(Clone, Debug)]
pub struct Equation {
    pub terms: Vec<(usize, BigRational)>,
    pub rhs: BigRational,
    pub label: String,
}

impl Equation {
    /// `x_var = value`.
    pub fn fix(var: usize, value: i64, label: impl Into<String>) -> Self {
        Self {
            terms: vec![(var, BigRational::one())],
            rhs: BigRational::from_integer(BigInt::from(value)),
            label: label.into(),
        }
    }

    /// `sum x_vars = value`.
    pub fn sum(vars: &[usize], value: i64, label: impl Into<String>) -> Self {
        Self {
            terms: vars.iter().map(|&v| (v, BigRational::one())).collect(),
            rhs: BigRational::from_integer(BigInt::from(value)),
            label: label.into(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    names: Vec<String>,
    equations: Vec<Equation>,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl LinearSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_unknown(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn unknowns(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn push(&mut self, eq: Equation) {
        self.equations.push(eq);
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    /// Reorders equations by `perm` (a permutation of their indices).
    pub fn permute_equations(&mut self, perm: &[usize]) {
        let old = std::mem::take(&mut self.equations);
        self.equations = perm.iter().map(|&i| old[i].clone()).collect();
    }

    /// Unique solution, or the conflicting/free data.
    pub fn solve(&self) -> Result<Vec<BigRational>> {
        let n = self.names.len();
        let mut dsu = Dsu((0..n).collect());
        for eq in &self.equations {
            if let Some(&(first, _)) = eq.terms.first() {
                for &(v, _) in &eq.terms[1..] {
                    dsu.union(first, v);
                }
            }
        }
        let mut blocks: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for v in 0..n {
            let r = dsu.find(v);
            blocks.entry(r).or_default().0.push(v);
        }
        for (ei, eq) in self.equations.iter().enumerate() {
            match eq.terms.first() {
                Some(&(v, _)) => {
                    let r = dsu.find(v);
                    blocks.get_mut(&r).expect("block exists").1.push(ei);
                }
                None if !eq.rhs.is_zero() => {
                    return Err(EngineError::Inconsistent(eq.label.clone()));
                }
                None => {}
            }
        }
        let mut solution = vec![BigRational::zero(); n];
        let mut free = Vec::new();
        for (vars, eqs) in blocks.values() {
            self.solve_block(vars, eqs, &mut solution, &mut free)?;
        }
        if !free.is_empty() {
            free.sort();
            return Err(EngineError::Underdetermined(free));
        }
        Ok(solution)
    }

    fn solve_block(
        &self,
        vars: &[usize],
        eqs: &[usize],
        solution: &mut [BigRational],
        free: &mut Vec<String>,
    ) -> Result<()> {
        let col: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(c, &v)| (v, c)).collect();
        let w = vars.len();
        let mut rows: Vec<(Vec<BigRational>, BigRational, Vec<usize>)> = eqs
            .iter()
            .map(|&ei| {
                let eq = &self.equations[ei];
                let mut row = vec![BigRational::zero(); w];
                for (v, c) in &eq.terms {
                    row[col[v]] += c;
                }
                (row, eq.rhs.clone(), vec![ei])
            })
            .collect();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut r = 0;
        for c in 0..w {
            let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[c].is_zero()) else {
                continue;
            };
            rows.swap(r, p);
            let inv = rows[r].0[c].recip();
            for x in rows[r].0.iter_mut() {
                *x *= &inv;
            }
            rows[r].1 *= &inv;
            for i in 0..rows.len() {
                if i == r || rows[i].0[c].is_zero() {
                    continue;
                }
                let f = rows[i].0[c].clone();
                let (pr, pv, pl) = rows[r].clone();
                for (x, y) in rows[i].0.iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
                rows[i].1 -= &f * &pv;
                for l in pl {
                    if !rows[i].2.contains(&l) {
                        rows[i].2.push(l);
                    }
                }
            }
            pivots.push((r, c));
            r += 1;
        }
        for row in &rows[r..] {
            if !row.1.is_zero() {
                let mut labels: Vec<&str> =
                    row.2.iter().map(|&e| self.equations[e].label.as_str()).collect();
                labels.sort();
                labels.dedup();
                return Err(EngineError::Inconsistent(labels.join("; ")));
            }
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        for (c, &v) in vars.iter().enumerate() {
            if !pivot_cols.contains(&c) {
                free.push(self.names[v].clone());
            }
        }
        for (pr, pc) in pivots {
            solution[vars[pc]] = rows[pr].1.clone();
        }
        Ok(())
    }
}

/// Converts a rational to an integer when exact.
pub fn to_integer(q: &BigRational) -> Option<i64> {
    if !q.is_integer() {
        return None;
    }
    let t = q.to_integer();
    let bits = t.bits();
    if bits > 62 {
        return None;
    }
    let mag: i64 = t
        .abs()
        .to_u64_digits()
        .1
        .first()
        .copied()
        .unwrap_or(0)
        .try_into()
        .ok()?;
    Some(if t.is_negative() { -mag } else { mag })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_block() {
        let mut s = LinearSystem::new();
        let x = s.add_unknown("x");
        let y = s.add_unknown("y");
        s.push(Equation::sum(&[x, y], 3, "a"));
        s.push(Equation::fix(x, 1, "b"));
        let sol = s.solve().unwrap();
        assert_eq!(to_integer(&sol[y]), Some(2));
    }

    #[test]
    fn detects_conflict_and_freedom() {
        let mut s = LinearSystem::new();
        let x = s.add_unknown("x");
        s.push(Equation::fix(x, 1, "one"));
        s.push(Equation::fix(x, 2, "two"));
        let err = s.solve().unwrap_err();
        assert!(matches!(err, EngineError::Inconsistent(ref m) if m.contains("one") && m.contains("two")));

        let mut s = LinearSystem::new();
        let x = s.add_unknown("x");
        let y = s.add_unknown("y");
        s.push(Equation::sum(&[x, y], 0, "only"));
        assert!(matches!(s.solve(), Err(EngineError::Underdetermined(_))));
    }

    #[test]
    fn integer_conversion() {
        let q = BigRational::new(BigInt::from(-6), BigInt::from(2));
        assert_eq!(to_integer(&q), Some(-3));
        let h = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(to_integer(&h), None);
    }
}
