//! Inner approximations of parametrized polynomial matrix inequality (PMI)
//! feasibility sets.
//!
//! Given a symmetric matrix `P(x,u)` of polynomials, a parameter set
//! `U = {u : a_i(u) >= 0}` and a bounding set `B = {x : b_j(x) >= 0}` with
//! known Lebesgue moments, this crate assembles and solves a hierarchy of
//! semidefinite programs whose solutions `g_d` define certified inner
//! approximations `G_d = {x in B : g_d(x) >= 0}` of
//! `P = {x : P(x,u) >= 0 for all u in U}`.
//!
//! Module map:
//! - [`polyalg`]: sparse multivariate polynomials over a fixed `(x,u,v)`
//!   variable universe.
//! - [`moments`]: closed-form Lebesgue moments of the supported bounding sets.
//! - [`stability`]: Hermite matrices and the reflection-coefficient geometry
//!   of discrete-time stability regions.
//! - [`sosbuild`]: compilation of the sum-of-squares program into a block SDP.
//! - [`sdpcore`]: a dense primal-dual interior-point solver for those SDPs.
//! - [`verify`]: sampling-based verification oracles (eigenvalues, membership,
//!   Monte-Carlo volumes, L1 gaps).

pub mod moments;
pub mod polyalg;
pub mod sdpcore;
pub mod sosbuild;
pub mod stability;
pub mod verify;
