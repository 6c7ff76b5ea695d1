//! Exact computations with zigzag algebras, curved modules and reflection functors.

pub mod scalars;
pub mod quiver;
pub mod algebra;
pub mod duplex;
pub mod bimodule;
pub mod mckay;
pub mod harness;
pub mod io;
