//! Lower levels of the induced-substructure order on finite digraphs.
//!
//! The crate builds levels one to four (optionally five) of the order,
//! implements the local automorphisms that rewrite two-element
//! substructures, tests extendability of level automorphisms through lower
//! cover signatures, and replays the argument that pins the automorphisms
//! of the first three levels that survive to level four.

pub mod automorphism;
pub mod digraph;
pub mod error;
pub mod extension;
pub mod poset;
pub mod report;
pub mod store;
pub mod theorem;

pub use digraph::{
    canonical_form, induced_substructure, is_substructure, two_element_type, CanonicalCode,
    Digraph, PairType,
};
pub use error::{Error, Result};
pub use poset::{build_level, CoverSignature, Group, Level, PosetStore};
