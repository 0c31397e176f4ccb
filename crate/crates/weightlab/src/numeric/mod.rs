//! Number kernel: wide floats, exact-or-interval reals, quadrature.

pub mod quad;
pub mod real;
pub mod wide;

pub use real::Real;
pub use wide::{Dir, W};
