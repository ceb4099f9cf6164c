pub mod banded;
pub mod cone;
pub mod convex;
pub mod deform;
pub mod cosmology;
pub mod error;
pub mod function;
pub mod grid;
pub mod io;
pub(crate) mod lp;
pub mod pipeline;
pub mod sphere;
pub mod verify;

pub use error::{Error, Result};
pub use function::GridFunction;
pub use grid::{GridDomain, Shape, Vec2};
