//! Linear systems on S: Riemann-Roch, fixed-component stripping and restricted-class tables.

use rand::Rng;
use serde::Serialize;

use crate::error::{EngineError, Result};
use crate::lattice::{DivisorClass, SurfaceS};

/// A labelled curve class used as a candidate fixed component.
#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub label: String,
    pub class: DivisorClass,
}

/// The cycle components of S in cyclic order, labelled `C1..`, `Cb1..`.
pub fn cycle_components(s: &SurfaceS) -> Vec<Component> {
    s.cycle_labels()
        .into_iter()
        .zip(s.cycle())
        .map(|(label, class)| Component { label, class })
        .collect()
}

/// Euler characteristic of a line bundle on the rational surface S.
pub fn riemann_roch(s: &SurfaceS, l: &DivisorClass) -> Result<i64> {
    let k = s.canonical();
    let num = s.lattice().square(l)? - s.lattice().intersect(l, &k)?;
    if num % 2 != 0 {
        return Err(EngineError::NonIntegral(format!(
            "L^2 - L.K = {num} is odd for {l}"
        )));
    }
    Ok(1 + num / 2)
}

/// Arithmetic genus of a curve class.
pub fn arithmetic_genus(s: &SurfaceS, l: &DivisorClass) -> Result<i64> {
    let k = s.canonical();
    let num = s.lattice().square(l)? + s.lattice().intersect(l, &k)?;
    if num % 2 != 0 {
        return Err(EngineError::NonIntegral(format!("L^2 + L.K = {num} is odd")));
    }
    Ok(1 + num / 2)
}

#[derive(Clone, Debug, Serialize)]
pub struct StrippingResult {
    /// Multiplicity per input component, in input order.
    pub fixed: Vec<(String, i64)>,
    pub movable: DivisorClass,
}

impl StrippingResult {
    pub fn multiplicity(&self, label: &str) -> i64 {
        self.fixed
            .iter()
            .find(|(l, _)| l == label)
            .map_or(0, |(_, m)| *m)
    }
}

/// Greedy negative-pairing fixpoint, always removing the first negative component.
pub fn strip_fixed_components(
    s: &SurfaceS,
    l: &DivisorClass,
    components: &[Component],
) -> Result<StrippingResult> {
    strip_with(s, l, components, |negatives| negatives[0])
}

/// Same fixpoint, picking the next negative component uniformly at random.
pub fn strip_fixed_components_random<R: Rng>(
    s: &SurfaceS,
    l: &DivisorClass,
    components: &[Component],
    rng: &mut R,
) -> Result<StrippingResult> {
    strip_with(s, l, components, |negatives| {
        negatives[rng.random_range(0..negatives.len())]
    })
}

fn strip_with(
    s: &SurfaceS,
    l: &DivisorClass,
    components: &[Component],
    mut pick: impl FnMut(&[usize]) -> usize,
) -> Result<StrippingResult> {
    let cap = 4 * s.n() as i64;
    let mut current = l.clone();
    let mut mult = vec![0i64; components.len()];
    loop {
        let mut negatives = Vec::new();
        for (idx, c) in components.iter().enumerate() {
            if s.lattice().intersect(&current, &c.class)? < 0 {
                negatives.push(idx);
            }
        }
        if negatives.is_empty() {
            break;
        }
        let idx = pick(&negatives);
        mult[idx] += 1;
        if mult[idx] > cap {
            return Err(EngineError::StrippingDiverged { cap });
        }
        current = &current - &components[idx].class;
    }
    Ok(StrippingResult {
        fixed: components
            .iter()
            .zip(mult)
            .map(|(c, m)| (c.label.clone(), m))
            .collect(),
        movable: current,
    })
}

/// A class together with an exact half.
#[derive(Clone, Debug, Serialize)]
pub struct HalfClass {
    pub double: DivisorClass,
    pub half: DivisorClass,
}

impl HalfClass {
    pub fn new(double: DivisorClass) -> Result<Self> {
        let half = double
            .div_exact(2)
            .ok_or_else(|| EngineError::NonIntegral(format!("{double} is not divisible by 2")))?;
        Ok(Self { double, half })
    }
}

/// Restriction to S of the alpha-combination with weight `lead` on alpha_`first`
/// and `n - 4` on every other alpha_j.
pub fn alpha_combination(s: &SurfaceS, first: usize) -> DivisorClass {
    let n = s.n() as i64;
    let mut a = s.lattice().zero();
    for j in 1..=s.n() {
        let w = if j == first { n - 2 } else { n - 4 };
        a = &a + &(w * &s.alpha(j));
    }
    a
}

/// Restriction of the half-integral bundle with leading alpha index `first` (1 or 2).
pub fn m_class(s: &SurfaceS, first: usize) -> Result<HalfClass> {
    let n = s.n() as i64;
    let double = &((n - 2) * &(-s.canonical())) - &alpha_combination(s, first);
    HalfClass::new(double)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MovableInvariants {
    pub l_squared: i64,
    pub l_dot_c2: i64,
    pub arithmetic_genus: i64,
    /// Degrees of L on C1..C(n-1).
    pub component_degrees: Vec<i64>,
    /// Degrees of L on Cb1..Cb(n-1).
    pub conjugate_degrees: Vec<i64>,
    /// Euler characteristic of L minus the cycle without C2 and Cb2.
    pub chi_l_prime: i64,
}

/// Movable part of (n-2)(-K_S) and its invariants.
pub fn movable_invariants(s: &SurfaceS) -> Result<MovableInvariants> {
    let n = s.n() as i64;
    let comps = cycle_components(s);
    let strip = strip_fixed_components(s, &((n - 2) * &(-s.canonical())), &comps)?;
    let l = strip.movable;
    let dot = |c: &DivisorClass| s.dot(&l, c);
    let mut rest = s.lattice().zero();
    for (i, c) in comps.iter().enumerate() {
        let skip = i == 1 || i == s.n(); // C2 and Cb2
        if !skip {
            rest = &rest + &c.class;
        }
    }
    Ok(MovableInvariants {
        l_squared: s.dot(&l, &l),
        l_dot_c2: dot(&s.component(2, false)),
        arithmetic_genus: arithmetic_genus(s, &l)?,
        component_degrees: (1..s.n()).map(|i| dot(&s.component(i, false))).collect(),
        conjugate_degrees: (1..s.n()).map(|i| dot(&s.component(i, true))).collect(),
        chi_l_prime: riemann_roch(s, &(&l - &rest))?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MRestrictionTable {
    /// (M, C_i) for i = 1..n-1.
    pub on_c: Vec<i64>,
    /// (M, Cb_i) for i = 1..n-1.
    pub on_cbar: Vec<i64>,
}

/// Degrees of the restricted half-integral bundle on every cycle component.
pub fn m_restriction_table(s: &SurfaceS, first: usize) -> Result<MRestrictionTable> {
    let m = m_class(s, first)?.half;
    Ok(MRestrictionTable {
        on_c: (1..s.n()).map(|i| s.dot(&m, &s.component(i, false))).collect(),
        on_cbar: (1..s.n()).map(|i| s.dot(&m, &s.component(i, true))).collect(),
    })
}

/// Sign vector for the half-cycle class of index `i` (1-based over j = 1..n).
pub fn chern_signs(n: usize, i: usize) -> Vec<i64> {
    (1..=n)
        .map(|j| if i < n - 1 && j == n - i + 1 { -1 } else { 1 })
        .collect()
}

/// Half of `-K_S - sum_j eps_j (e_j - eb_j)`.
pub fn half_cycle_class(s: &SurfaceS, eps: &[i64]) -> Result<HalfClass> {
    let mut d = -s.canonical();
    for (j, &e) in eps.iter().enumerate() {
        d = &d - &(e * &s.alpha(j + 1));
    }
    HalfClass::new(d)
}

/// A contiguous arc of the cycle: `len` components starting at cyclic position `start`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub start: usize,
    pub len: usize,
    pub labels: Vec<String>,
}

/// All proper contiguous arcs whose class equals `target`.
pub fn matching_arcs(s: &SurfaceS, target: &DivisorClass) -> Vec<Arc> {
    let comps = cycle_components(s);
    let m = comps.len();
    let mut out = Vec::new();
    for start in 0..m {
        let mut sum = s.lattice().zero();
        for len in 1..m {
            sum = &sum + &comps[(start + len - 1) % m].class;
            if &sum == target {
                out.push(Arc {
                    start,
                    len,
                    labels: (0..len)
                        .map(|k| comps[(start + k) % m].label.clone())
                        .collect(),
                });
            }
        }
    }
    out
}

/// Searches for the arc represented by the sign vector `eps`.
pub fn half_cycle_arc(s: &SurfaceS, eps: &[i64]) -> Result<Arc> {
    let h = half_cycle_class(s, eps)?;
    matching_arcs(s, &h.half)
        .into_iter()
        .next()
        .ok_or_else(|| EngineError::NoArcMatch(h.half.to_string()))
}

/// True iff the half-cycle class of index `i` is a contiguous arc of the cycle.
pub fn half_cycle_chern_check(s: &SurfaceS, i: usize) -> Result<bool> {
    if i == 0 || i >= s.n() {
        return Err(EngineError::OutOfRange(format!("i = {i}")));
    }
    Ok(half_cycle_arc(s, &chern_signs(s.n(), i)).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_surface_s;

    #[test]
    fn rr_of_trivial_bundle() {
        let s = build_surface_s(6).unwrap();
        assert_eq!(riemann_roch(&s, &s.lattice().zero()).unwrap(), 1);
    }

    #[test]
    fn half_class_rejects_odd() {
        let s = build_surface_s(4).unwrap();
        assert!(HalfClass::new(s.e(1)).is_err());
    }

    #[test]
    fn chern_signs_shape() {
        assert_eq!(chern_signs(5, 1), vec![1, 1, 1, 1, -1]);
        assert_eq!(chern_signs(5, 3), vec![1, 1, -1, 1, 1]);
        assert_eq!(chern_signs(5, 4), vec![1; 5]);
    }
}
