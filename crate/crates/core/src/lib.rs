//! Meshless PDE toolkit built on polyharmonic-spline RBF-FD: node
//! generation, stencil selection, differentiation weights, global sparse
//! solves and error analysis.

pub mod analysis;
pub mod basis;
pub mod bench;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod neighbors;
pub mod nodegen;
pub mod pde;
pub mod point;
pub mod weights;

pub use error::{Error, Result};
