//! Learning evolution operators of PDEs from short trajectory snapshots.
//!
//! The crate is split into a data side (grids, samplers, reference
//! solvers, binary formats) and a learning side (tape autodiff, the
//! disassembly/assembly network, training and rollout). The learning side
//! only ever sees nodal value vectors, never coordinates, which is what
//! makes trained models transferable across node orderings.

pub mod autodiff;
pub mod config;
pub mod error;
pub mod grid;
pub mod model;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod rollout;
pub mod sampling;
pub mod solvers;
pub mod spectral;
pub mod training;

pub use error::{Error, Result};
