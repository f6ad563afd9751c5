//! Synthesis and numerical analysis of constant-mean-curvature-one surfaces
//! in hyperbolic 3-space and CMC-1 faces in de Sitter 3-space, built from
//! their holomorphic representation data `(g, f dz)`.

pub mod bryant_data;
pub mod coverage;
pub mod duality;
pub mod error;
pub mod geometry_analysis;
pub mod grid;
pub mod immersion;
pub mod meromorphic;
pub mod null_lift;
pub mod sl2;

pub use error::{Error, Result};
