//! Exact verification engine for blowup lattices, pairing tables, elimination towers
//! and scroll quartics.

pub mod axioms;
pub mod elimination;
pub mod error;
pub mod incidence;
pub mod lattice;
pub mod linsolve;
pub mod poly;
pub mod qfield;
pub mod report;
pub mod scroll;
pub mod surface;

pub use error::{EngineError, Result};
pub use lattice::{
    anticanonical_cycle_check, build_surface_s, intersect, new_quadric_lattice, BlowupTower,
    DivisorClass, LatticeBasis, SurfaceS,
};
pub use axioms::{AxiomRegistry, AxiomTrail};
