//! Condition functionals for radial weights on the unit disc, computed
//! through the one-dimensional profile `f` with `w(z) = f(1 - |z|^2)`.

pub mod numeric;
pub mod conditions;
pub mod disc;
pub mod error;
pub mod families;
pub mod implication;
pub mod maximal;
pub mod profile;

pub use error::{Error, Result};
pub use numeric::Real;
