//! Numerical harmonic analysis on one-dimensional dyadic grids: shifted dyadic
//! lattices, sparse families, Muckenhoupt weights, Orlicz maximal operators,
//! commutators of singular integrals, and experiment drivers that measure both
//! sides of weighted inequalities for them.

pub mod grid;
pub mod orlicz;
pub mod maximal;
pub mod weights;
pub mod sparse;
mod stats;
pub mod operators;
pub mod harness;
