//! Coxeter-Schlafli orthoschemes in the projective model of spherical,
//! Euclidean and hyperbolic space, Archimedean cells, face-pairing space
//! forms and their first homology.

pub mod error;
pub mod fixture;
pub mod gram;
pub mod homology;
pub mod orthoscheme;
pub mod pairing;
pub mod pipeline;
pub mod polytope;
pub mod projmetric;
pub mod render;

pub use error::{Error, Result};
