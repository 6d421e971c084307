//! Compilation of the inner-approximation program into a block SDP.
//!
//! The program computed at relaxation order `d` finds a polynomial `g` of
//! bounded degree maximizing `int_B g dx` subject to the certificate
//! identity
//!
//! ```text
//! v^T P(x,u) v - g(x) = r(x,u,v)(1 - v^T v)
//!                     + sum_i s_i(x,u,v) a_i(u) + sum_j t_j(x,u,v) b_j(x)
//! ```
//!
//! with free `r` and SOS multipliers `s_i`, `t_j`. Both sides are reduced
//! modulo the ideal of `1 - v^T v` (every `v_m`-exponent brought below 2),
//! which shrinks all Gram bases and absorbs the free multiplier `r`
//! entirely: coefficient matching happens in the quotient basis, and `r` is
//! reconstructed afterwards as the reduction remainder. Optional variants
//! append the nestedness identity (`g - g_prev` SOS on `B`) or the convexity
//! identity (`v^T grad^2 g v` SOS on `B x ball`).

mod assemble;
mod degrees;
mod extract;
mod momentform;
mod reduce;
mod sdpexport;

pub use assemble::{build_inner_sdp, BlockRole, BuildMeta, GramBlock, SosBuild, Variant};
pub use degrees::{min_order, multiplier_degrees, DegreeAssignment};
pub use extract::{extract_solution, Diagnostics, InnerApprox, Multipliers};
pub use momentform::{build_moment_sdp, MomentBuild};
pub use reduce::{sphere_reduce, sphere_reduce_with_quotient};
pub use sdpexport::export_sdp_text;

use thiserror::Error;

use crate::moments::{MomentKind, MomentSource};
use crate::polyalg::{MatrixPolynomial, Polynomial, Universe};
use crate::sdpcore::{Residuals, SolveStatus};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("relaxation order {d} is below the minimum order {d0}")]
    OrderTooSmall { d: u32, d0: u32 },
    #[error("moment source dimension {src} does not match the problem's {n} decision variables")]
    MomentDimensionMismatch { src: usize, n: usize },
    #[error("nested variant needs the previous solution of degree <= {max}, got {deg}")]
    NestedPrevDegree { deg: i32, max: u32 },
    #[error("constraint polynomial uses variables outside its declared group: {0}")]
    MixedVariables(String),
}

/// Typed failure carrying the solver outcome when it is not `Optimal`.
#[derive(Debug, Error)]
#[error("solver finished with status {status} (primal {rp:.3e}, dual {rd:.3e}, gap {gap:.3e})", rp = .residuals.primal, rd = .residuals.dual, gap = .residuals.gap)]
pub struct NotOptimal {
    pub status: SolveStatus,
    pub residuals: Residuals,
}

/// A full parametrized PMI instance: the matrix `P(x,u)`, the semialgebraic
/// descriptions of `U` and `B`, and the moment source for `B`.
#[derive(Clone, Debug)]
pub struct PmiProblem {
    universe: Universe,
    matrix: MatrixPolynomial,
    u_constraints: Vec<Polynomial>,
    b_constraints: Vec<Polynomial>,
    moment_source: MomentSource,
    u_box: Option<Vec<(f64, f64)>>,
}

impl PmiProblem {
    /// Assemble an instance. The universe is taken from the matrix; `a_i`
    /// must involve only u-slots and `b_j` only x-slots.
    pub fn new(
        matrix: MatrixPolynomial,
        u_constraints: Vec<Polynomial>,
        b_constraints: Vec<Polynomial>,
        moment_source: MomentSource,
        u_box: Option<Vec<(f64, f64)>>,
    ) -> Result<Self, BuildError> {
        let universe = *matrix.universe();
        assert_eq!(universe.m, matrix.size(), "universe v-slots must match matrix size");
        if moment_source.dimension() != universe.n {
            return Err(BuildError::MomentDimensionMismatch {
                src: moment_source.dimension(),
                n: universe.n,
            });
        }
        for a in &u_constraints {
            if a.degree_over(|s| s < universe.n || s >= universe.n + universe.p) > 0 {
                return Err(BuildError::MixedVariables(a.to_string()));
            }
        }
        for b in &b_constraints {
            if b.degree_over(|s| s >= universe.n) > 0 {
                return Err(BuildError::MixedVariables(b.to_string()));
            }
        }
        Ok(PmiProblem {
            universe,
            matrix,
            u_constraints,
            b_constraints,
            moment_source,
            u_box,
        })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn matrix(&self) -> &MatrixPolynomial {
        &self.matrix
    }

    pub fn u_constraints(&self) -> &[Polynomial] {
        &self.u_constraints
    }

    pub fn b_constraints(&self) -> &[Polynomial] {
        &self.b_constraints
    }

    pub fn moment_source(&self) -> &MomentSource {
        &self.moment_source
    }

    /// Sampling box for the parameters, either declared or derived from a
    /// ball constraint on `u`.
    pub fn u_sample_box(&self) -> Option<Vec<(f64, f64)>> {
        if let Some(b) = &self.u_box {
            return Some(b.clone());
        }
        if self.universe.p == 0 {
            return None;
        }
        let u_slots: Vec<usize> = (0..self.universe.p).map(|i| self.universe.u(i)).collect();
        for a in &self.u_constraints {
            if let Some(r) = origin_ball_radius(a, &u_slots) {
                return Some(vec![(-r, r); self.universe.p]);
            }
        }
        None
    }

    /// Append the Archimedean ball constraints `R^2 - x^T x` (and
    /// `R^2 - u^T u` when parameters are present) with `R = 1.05` times an
    /// outer bound read off the bounding-set description, skipping each
    /// guard when an origin-centered ball constraint is already declared.
    pub fn add_archimedean_guards(&mut self) {
        let u = self.universe;
        let x_slots: Vec<usize> = (0..u.n).map(|i| u.x(i)).collect();
        let has_x_ball = self
            .b_constraints
            .iter()
            .any(|b| origin_ball_radius(b, &x_slots).is_some());
        if !has_x_ball {
            let r = 1.05 * outer_bound(self.moment_source.kind());
            let mut guard = Polynomial::constant(&u, r * r);
            for &s in &x_slots {
                guard = &guard - &Polynomial::variable(&u, s).pow(2);
            }
            self.b_constraints.push(guard);
        }
        if u.p > 0 {
            let u_slots: Vec<usize> = (0..u.p).map(|i| u.u(i)).collect();
            let has_u_ball = self
                .u_constraints
                .iter()
                .any(|a| origin_ball_radius(a, &u_slots).is_some());
            if !has_u_ball {
                if let Some(bx) = &self.u_box {
                    let r = 1.05
                        * bx.iter()
                            .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
                            .sum::<f64>()
                            .sqrt();
                    let mut guard = Polynomial::constant(&u, r * r);
                    for &s in &u_slots {
                        guard = &guard - &Polynomial::variable(&u, s).pow(2);
                    }
                    self.u_constraints.push(guard);
                }
            }
        }
    }
}

/// Recognize `c - lambda * sum_{s in slots} s^2` with `c, lambda > 0` and no
/// other terms; returns the ball radius `sqrt(c / lambda)`.
fn origin_ball_radius(p: &Polynomial, slots: &[usize]) -> Option<f64> {
    let mut constant = None;
    let mut quad: Vec<Option<f64>> = vec![None; slots.len()];
    for (mono, c) in p.terms() {
        if mono.is_one() {
            constant = Some(c);
            continue;
        }
        let mut matched = false;
        for (idx, &s) in slots.iter().enumerate() {
            if mono.degree_in(s) == 2 && mono.degree() == 2 {
                quad[idx] = Some(c);
                matched = true;
                break;
            }
        }
        if !matched {
            return None;
        }
    }
    let c = constant.filter(|&c| c > 0.0)?;
    let lam = -(quad[0]?);
    if lam <= 0.0 {
        return None;
    }
    for q in &quad {
        match q {
            Some(v) if (-v - lam).abs() <= 1e-12 * lam => {}
            _ => return None,
        }
    }
    Some((c / lam).sqrt())
}

/// Outer radius of a bounding set, from its description.
fn outer_bound(kind: &MomentKind) -> f64 {
    match kind {
        MomentKind::Box { bounds } => bounds
            .iter()
            .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
            .sum::<f64>()
            .sqrt(),
        MomentKind::Ball { center, radius } => {
            center.iter().map(|c| c * c).sum::<f64>().sqrt() + radius
        }
        MomentKind::Simplex { vertices } => vertices
            .iter()
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max),
        MomentKind::StabilityBody { n, .. } => crate::stability::stable_simplex_vertices(*n)
            .iter()
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max),
    }
}
