//! Alternating projections between a manifold and a closed set, with
//! linearized, inexact and approximate variants and rate diagnostics.

pub mod linalg;
pub mod polymap;
pub mod qp;
pub mod sets;
pub mod alternating;
pub mod linconstr;
pub mod inclusion;
pub mod diagnostics;

pub use linalg::{Matrix, Vector};
pub use polymap::{Monomial, PolyMap};
pub use sets::ProjectableSet;
