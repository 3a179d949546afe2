//! Elliptic surfaces over the projective line: fiber data, invariants,
//! Picard-Fuchs operators, monodromy and inhomogeneous de Rham cohomology.

pub mod exactcore;
pub mod weiermodel;
pub mod invariants;
pub mod gaussmanin;
pub mod localsolve;
pub mod idrcohomology;
pub mod monodromy;
pub mod cli;
