//! Discrete-time stability geometry.
//!
//! The Schur stability region of a monic polynomial
//! `z^n + x_1 z^{n-1} + ... + x_n` is a nonconvex semialgebraic set in the
//! coefficient space `R^n`. This module provides the three handles on that
//! geometry used by the inner-approximation pipeline:
//!
//! - the Hermite matrix `P(x)`, quadratic in `x`, with `P(x) > 0` iff the
//!   polynomial is Schur stable ([`hermite_matrix`]);
//! - the multiaffine reflection-coefficient map `f` with
//!   `f((-1,1)^n) = int P`, together with its symbolic Jacobian determinant
//!   ([`reflection_map`]);
//! - the simplex `conv P`, whose vertices are the coefficient vectors of the
//!   polynomials with all roots at `-1` or `+1` ([`stable_simplex_vertices`]),
//!   and affine sections of it for design problems
//!   ([`section_bounding_simplex`]).

mod hermite;
mod reflection;
mod section;

pub use hermite::{hermite_matrix, stability_body_constraints, HermiteInstance};
pub use reflection::{reflection_map, stable_simplex_vertices, ReflectionMap};
pub use section::{barycentric_functionals, section_bounding_simplex};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("affine section does not intersect the stability simplex")]
    InfeasibleSection,
    #[error("degenerate simplex: vertex matrix is rank-deficient")]
    DegenerateSimplex,
}
