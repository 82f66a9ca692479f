//! One-way topological automata over finite topologies and lazy
//! configuration spaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`topology`]: explicit finite topologies, products, subspaces, the
//!   lattice of topologies and the Vietoris hyperspace.
//! - [`operators`]: single- and multi-valued operators, continuity,
//!   composition, inversion and lifting to hyperspaces.
//! - [`machine`]: deterministic and nondeterministic topological automata,
//!   lazy machines over infinite spaces, classical DFAs.
//! - [`constructions`]: machine-to-machine transformations.
//! - [`zoo`]: classical and quantum automata expressed as topological automata.
//! - [`verify`]: brute-force oracles used to check the constructions.
//! - [`format`]: the JSON machine file format.

pub mod constructions;
pub mod format;
pub mod machine;
pub mod operators;
mod pointset;
pub mod sample;
pub mod topology;
pub mod verify;
pub mod zoo;

pub use machine::{
    Alphabet, Dfa, Endmarkers, ExtSymbol, FiniteTopMachine, ObservablePair, Recognizer, RejectMode, Verdict,
};
pub use operators::{MultiOp, SingleOp};
pub use pointset::PointSet;
pub use topology::{FiniteTopology, PointPartition};

/// Tolerance shared by every floating-point threshold and invariant check.
pub const TOLERANCE: f64 = 1e-9;
