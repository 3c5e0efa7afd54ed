//! Exact symbolic workbench for almost Hermitian coframe models.
//!
//! The crate represents a manifold by a unitary `(1,0)`-coframe and its
//! structure equations, over an exact coefficient ring (Gaussian rationals
//! extended by formal frame-derivative symbols). On top of that it builds
//! the bigraded operator calculus (the four components of `d`, the Hodge
//! star, pointwise adjoints, the Lefschetz pair, five Laplacians), exact
//! primitive decompositions, and coframe-constant harmonic spaces, together
//! with batch audits of their structural properties.

pub mod audit;
pub mod exterior;
pub mod harmonic;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod parse;
pub mod primitive;
pub mod props;
pub mod reproduce;
pub mod scalars;

pub use exterior::{BasisForm, Form};
pub use model::{Model, ValidationReport};
pub use scalars::{DiffPoly, GaussRat};
