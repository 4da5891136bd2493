//! Deterministic planar partition trees over exact rational arithmetic.
//!
//! The crate builds hierarchical simplicial partitions of a planar point
//! set by iterated weighted cuttings, then layers range-counting,
//! triangle-stabbing, segment-intersection and ray-shooting structures
//! on top. Every predicate is evaluated over arbitrary-precision
//! rationals, so identical inputs and parameters reproduce identical
//! structures bit for bit.

pub mod arrangement;
pub mod cell;
pub mod cutting;
pub mod gen;
pub mod geom;
pub mod io;
pub mod oracle;
pub mod par;
pub mod rangecount;
pub mod rayshoot;
pub mod refine;
pub mod scalar;
pub mod segquery;
pub mod stabbing;
pub mod tree;
