//! Topology-preserving blending of implicit porous structures.
//!
//! Two or more implicit solids are mixed through a B-spline weight field
//! inside a user-chosen blending region. The weight is then repaired by
//! gradient descent on a persistent-homology loss until the blended solid
//! has no isolated components or enclosed voids inside that region.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod field;
pub mod geometry;
pub mod init;
pub mod io;
pub mod optimize;
pub mod pipeline;
pub mod spatial;
pub mod spline;
pub mod topology;

pub use error::{Error, Result};
pub use geometry::{Aabb, Axis, Lattice, Point};
