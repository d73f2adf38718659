//! Composite fermions built from a (deformed) boson and a fermion: truncated
//! Fock-space operators, realization conditions on structural matrices, and
//! bipartite entanglement of the composite state.

pub mod algebra;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod realization;
pub mod sparse;

pub use error::{Error, Result};
