//! Loxodromic Moebius maps: fixed points and multiplier, the Apollonius and
//! pole-centred regions of the conjugated dilation, the avoided region around
//! the backward orbit of infinity, and Hyers-Ulam bounds for perturbed orbits.

pub mod algebra;
pub mod avoided;
pub mod config;
pub mod error;
pub mod geometry;
pub mod report;
pub mod stability;
pub mod verify;

pub use algebra::{Complex, ExtendedComplex, LoxodromicData, MapClass, MoebiusMap};
pub use error::{Error, Result};
