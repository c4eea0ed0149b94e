//! Corner-sharing triangle and tetrahedron (CoST) microstructures.
//!
//! A CoST is a bar-joint constraint graph in which every joint is shared by
//! exactly two edge-disjoint simplices (triangles in the plane, tetrahedra in
//! space) drawn from a stored *witness set*. Joints on the boundary of a finite
//! piece belong to a single simplex.
//!
//! The crate is organized by what a designer does with such a structure:
//!
//! * [`cost`] holds the data model, validation, and the bijections with
//!   regular graphs and planar triangulations.
//! * [`generators`] builds Kagome seeds (bivariate and foliated trivariate)
//!   and maps them into physical domains.
//! * [`rigidity`] answers combinatorial and numerical rigidity questions:
//!   pebble games, rigidity and stiffness matrices, flexes and self-stresses,
//!   Laplacians and effective resistance.
//! * [`editing`] modifies structures: boundary stiffening, hierarchical
//!   refinement, diagonal flips (single, randomized, channel carving),
//!   joining, rebalancing and local re-realization.
//! * [`continuum`] converts a realized structure into continuous
//!   representations: bi-quadratic beam surfaces with exact volume, box-spline
//!   fields with their level sets, and planar slices.
//!
//! The crate is `no_std` compatible (it needs `alloc`); disable the default
//! `std` feature to build it that way.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod continuum;
pub mod cost;
pub mod editing;
pub mod generators;
pub mod rigidity;

mod math;

pub use math::Vec3;

/// The linear-algebra crate used in public signatures.
pub use nalgebra;
