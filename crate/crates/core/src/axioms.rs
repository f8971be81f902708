//! Registry of facts taken as input rather than computed.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{EngineError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomKind {
    /// A dimension or surjectivity statement coming from a cohomology argument.
    Rank,
    /// An intersection number on the threefold that the engine cannot derive.
    Intersection,
    /// A local incidence fact on a degree-one divisor.
    Anchor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Axiom {
    pub id: &'static str,
    pub kind: AxiomKind,
    pub statement: &'static str,
    pub value: i64,
}

pub const H1_LPRIME: &str = "rank.h1-lprime-vanishes";
pub const H0_SK_L1: &str = "rank.h0-sk-l1";
pub const H0_E_L1: &str = "rank.h0-e-l1";
pub const REST_SURJECTIVE: &str = "rank.restriction-surjective";
pub const DIFF_SURJECTIVE: &str = "rank.difference-surjective";
pub const KERNEL_CHAIN: &str = "rank.kernel-cohomology-chain";
pub const H1_OZ: &str = "rank.h1-oz-vanishes";
pub const ALPHA_CUBED: &str = "int.alpha-cubed";
pub const ALPHA_SQ_C1: &str = "int.alpha-sq-c1";
pub const ALPHA_C1SQ_C2: &str = "int.alpha-c1sq-plus-c2";
pub const C1C2: &str = "int.c1c2";
pub const E1PRIME_MEETS: &str = "anchor.e1prime-meets-first-fiber";
pub const DELTA_BAR_MEETS: &str = "anchor.deltabar-meets-next-fiber";

const STANDARD: &[Axiom] = &[
    Axiom {
        id: H1_LPRIME,
        kind: AxiomKind::Rank,
        statement: "H^1(S, L') = 0, so h^0(S, (n-2)K^-1) = 3",
        value: 0,
    },
    Axiom {
        id: H0_SK_L1,
        kind: AxiomKind::Rank,
        statement: "h^0(S_k, L1) = 3 for every smooth fiber S_k",
        value: 3,
    },
    Axiom {
        id: H0_E_L1,
        kind: AxiomKind::Rank,
        statement: "h^0(E, L1) = 2 on the cylinder E",
        value: 2,
    },
    Axiom {
        id: REST_SURJECTIVE,
        kind: AxiomKind::Rank,
        statement: "H^0(L1) -> H^0(L1 on E + S_1 + ... + S_count) is surjective",
        value: 1,
    },
    Axiom {
        id: DIFF_SURJECTIVE,
        kind: AxiomKind::Rank,
        statement: "the difference map onto the sum over S_k cap E is surjective",
        value: 1,
    },
    Axiom {
        id: KERNEL_CHAIN,
        kind: AxiomKind::Rank,
        statement: "H^q(L1') = H^q(O) along the vanishing cascade, so h^0(L1') = 1",
        value: 1,
    },
    Axiom {
        id: H1_OZ,
        kind: AxiomKind::Rank,
        statement: "H^1(O_Z) = 0",
        value: 0,
    },
    Axiom {
        id: ALPHA_CUBED,
        kind: AxiomKind::Intersection,
        statement: "alpha^3 = 0",
        value: 0,
    },
    Axiom {
        id: ALPHA_SQ_C1,
        kind: AxiomKind::Intersection,
        statement: "alpha^2 c1 = -4",
        value: -4,
    },
    Axiom {
        id: ALPHA_C1SQ_C2,
        kind: AxiomKind::Intersection,
        statement: "alpha (c1^2 + c2) = 0",
        value: 0,
    },
    Axiom {
        id: C1C2,
        kind: AxiomKind::Intersection,
        statement: "c1 c2 = 24",
        value: 24,
    },
    Axiom {
        id: E1PRIME_MEETS,
        kind: AxiomKind::Anchor,
        statement: "e'1 meets only the first fiber curve on S_i^-",
        value: 1,
    },
    Axiom {
        id: DELTA_BAR_MEETS,
        kind: AxiomKind::Anchor,
        statement: "Deltab_i meets the fiber curve over Eb_(i+1) on S_i^-",
        value: 1,
    },
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomRegistry {
    entries: BTreeMap<&'static str, Axiom>,
}

impl Default for AxiomRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl AxiomRegistry {
    pub fn standard() -> Self {
        Self {
            entries: STANDARD.iter().map(|a| (a.id, a.clone())).collect(),
        }
    }

    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn without(mut self, id: &str) -> Self {
        self.entries.remove(id);
        self
    }

    pub fn with_value(mut self, id: &str, value: i64) -> Self {
        if let Some(a) = self.entries.get_mut(id) {
            a.value = value;
        }
        self
    }

    pub fn get(&self, id: &str) -> Result<&Axiom> {
        self.entries
            .get(id)
            .ok_or_else(|| EngineError::MissingAxiom(id.to_string()))
    }

    pub fn value(&self, id: &str) -> Result<i64> {
        Ok(self.get(id)?.value)
    }

    pub fn all(&self) -> impl Iterator<Item = &Axiom> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Records which axioms a computation read.
#[derive(Debug)]
pub struct AxiomTrail<'a> {
    registry: &'a AxiomRegistry,
    used: Vec<String>,
}

impl<'a> AxiomTrail<'a> {
    pub fn new(registry: &'a AxiomRegistry) -> Self {
        Self {
            registry,
            used: Vec::new(),
        }
    }

    pub fn take(&mut self, id: &str) -> Result<i64> {
        let v = self.registry.value(id)?;
        if !self.used.iter().any(|u| u == id) {
            self.used.push(id.to_string());
        }
        Ok(v)
    }

    pub fn finish(self) -> Vec<String> {
        self.used
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_axiom_is_an_error() {
        let r = AxiomRegistry::standard().without(C1C2);
        assert_eq!(
            r.value(C1C2),
            Err(EngineError::MissingAxiom(C1C2.to_string()))
        );
        assert_eq!(AxiomRegistry::standard().value(C1C2), Ok(24));
    }

    #[test]
    fn trail_deduplicates() {
        let r = AxiomRegistry::standard();
        let mut t = AxiomTrail::new(&r);
        t.take(H0_SK_L1).unwrap();
        t.take(H0_SK_L1).unwrap();
        assert_eq!(t.finish(), vec![H0_SK_L1.to_string()]);
    }
}
