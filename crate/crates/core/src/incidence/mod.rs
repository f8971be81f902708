//! Threefold incidence data: exceptional components, pairing table and bundle algebra.

pub mod bundle;
pub mod checks;
pub mod complex;
pub mod pairing;

pub use bundle::{BundleExpression, Sym};
pub use checks::Threefold;
pub use complex::{build_incidence, CurveSym, DivSym, IncidenceComplex, Side, Sign};
pub use pairing::{
    complete_pairings, complete_pairings_shuffled, complete_pairings_with, AnchorMode,
    PairingTable,
};
