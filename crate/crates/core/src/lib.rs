//! Open-system simulator for one atom coupled to two leaky cavities and
//! driven only by incoherent thermal (white) noise.
//!
//! The crate builds the model in two equivalent pictures — the physical one
//! (atom ⊗ mode a ⊗ mode b) and a reduced effective one (atom ⊗ mode c,
//! with c the coupling-weighted combination of a and b) — integrates or
//! directly solves the master equation, and quantifies entanglement between
//! the two cavity fields by the logarithmic negativity of the partial
//! transpose. A CLI front end runs parameter scans to CSV and a named
//! validation suite.

pub mod config;
pub mod dynamics;
pub mod entanglement;
pub mod model;
pub mod numerics;
pub mod scan;
pub mod validate;

pub use numerics::{C64, ComplexMatrix};
