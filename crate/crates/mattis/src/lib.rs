//! Numerics for the exactly solvable 2+1D Mattis model.

pub mod bogoliubov;
pub mod ed;
pub mod error;
pub mod lattice;
pub mod model;
pub mod params;
pub mod qft;
pub mod quad;
pub mod special;
pub mod correlators;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{chi, Momentum2};
pub use params::{Beta, DerivedConstants, FlavorIndex, ModelParams, ParamViolation, Sign};
