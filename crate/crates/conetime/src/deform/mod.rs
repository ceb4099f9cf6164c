//! Affine deformations of cone-dividing groups and their invariant domains.

pub mod bending;
pub mod cocycle;
pub mod domain;
pub mod fixture;
pub mod group;
pub mod orbit;

pub use bending::{bend_translation, bulge, limit_set_samples, projective_embed, LimitSet, Splitting};
pub use cocycle::{AffineMap, Cocycle};
pub use domain::{act_on_support, equivariance_residual, maximal_domain, MaximalDomain};
pub use fixture::{genus_two, GenusTwo};
pub use group::{GroupRep, Letter, Mat3, Word};
pub use orbit::{estimate_boundary_function, orbit_points, BoundaryEstimate, Orbit};
