//! Kinematic simulation and force analysis for process damping in
//! orthogonal metal cutting.
//!
//! A tool vibrating vertically while it advances leaves a wavy surface. When
//! the relief angle is small the relief face runs into material the cutting
//! edge has just left, crushing it. This crate generates the machined
//! surface ([`surface`]), measures relief-face contact through each
//! oscillation ([`engagement`]), evaluates the sliding-line shear-plane
//! model on a wavy surface ([`shearplane`]), and provides the fits and force
//! decompositions used to analyse cutting-force records ([`fit`],
//! [`forces`]).
//!
//! Lengths are in mils, angles in radians, forces in lbf.

pub mod engagement;
pub mod error;
pub mod fit;
pub mod forces;
pub mod io;
pub mod model;
pub mod shearplane;
pub mod surface;

pub use error::{Error, Result};
