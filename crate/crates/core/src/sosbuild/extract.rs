use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::moments::MomentKind;
use crate::polyalg::{quad_form, Monomial, Polynomial};
use crate::sdpcore::{Residuals, SdpSolution, SolveStatus};

use super::assemble::{BlockRole, SosBuild};
use super::reduce::sphere_reduce_with_quotient;
use super::{NotOptimal, PmiProblem};

/// Certificate multipliers recovered from the Gram blocks. `r` is the free
/// sphere multiplier, reconstructed as the quotient of the matching
/// remainder by `1 - v^T v`.
#[derive(Clone, Debug)]
pub struct Multipliers {
    pub r: Polynomial,
    pub s: Vec<Polynomial>,
    pub t: Vec<Polynomial>,
    /// Variant multipliers (nested or convex), in block order.
    pub c: Vec<Polynomial>,
}

#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub solver_status: SolveStatus,
    pub iterations: usize,
    pub solver_residuals: Residuals,
    /// Max certificate-identity mismatch over 200 random sample points.
    pub identity_residual_abs: f64,
    /// Same, scaled by `1 + max coefficient magnitude`.
    pub identity_residual: f64,
}

/// One rung of the hierarchy: the polynomial `g`, its superlevel set
/// `G = {x in B : g(x) >= 0}`, and the certificate behind it.
#[derive(Clone, Debug)]
pub struct InnerApprox {
    pub g: Polynomial,
    pub order: u32,
    pub g_degree: u32,
    /// `int_B g dx`, recomputed from the moment source.
    pub objective_value: f64,
    pub multipliers: Multipliers,
    pub diagnostics: Diagnostics,
}

/// Gram-block polynomial `z^T Q z` (unreduced, unweighted).
fn gram_polynomial(basis: &[Monomial], q: &nalgebra::DMatrix<f64>, universe: &crate::polyalg::Universe) -> Polynomial {
    let mut p = Polynomial::zero(universe);
    for k in 0..basis.len() {
        for l in k..basis.len() {
            let w = if k == l { 1.0 } else { 2.0 };
            p.add_term(basis[k].mul(&basis[l]), w * q[(k, l)]);
        }
    }
    p
}

/// Axis-aligned bounding box of a moment source, for residual sampling.
fn source_bbox(kind: &MomentKind) -> Vec<(f64, f64)> {
    match kind {
        MomentKind::Box { bounds } => bounds.clone(),
        MomentKind::Ball { center, radius } => center
            .iter()
            .map(|c| (c - radius, c + radius))
            .collect(),
        MomentKind::Simplex { vertices } => vertex_bbox(vertices),
        MomentKind::StabilityBody { n, .. } => {
            vertex_bbox(&crate::stability::stable_simplex_vertices(*n))
        }
    }
}

fn vertex_bbox(vertices: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let n = vertices[0].len();
    (0..n)
        .map(|i| {
            let lo = vertices.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
            let hi = vertices
                .iter()
                .map(|v| v[i])
                .fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect()
}

/// Read the solved program back into an [`InnerApprox`]. Non-optimal solver
/// statuses are surfaced as a typed failure.
pub fn extract_solution(
    problem: &PmiProblem,
    build: &SosBuild,
    solution: &SdpSolution,
) -> Result<InnerApprox, NotOptimal> {
    if solution.status != SolveStatus::Optimal {
        return Err(NotOptimal {
            status: solution.status,
            residuals: solution.residuals,
        });
    }
    let u = build.meta.universe;
    let g_vals = &solution.free_values[0];
    let g = Polynomial::from_terms(
        &u,
        build
            .meta
            .g_basis
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), g_vals[i])),
    );

    let mut s = Vec::new();
    let mut t = Vec::new();
    let mut c = Vec::new();
    for (bi, gb) in build.meta.blocks.iter().enumerate() {
        let poly = gram_polynomial(&gb.basis, &solution.psd_values[bi], &gb.universe);
        match gb.role {
            BlockRole::S(_) => s.push(poly),
            BlockRole::T(_) => t.push(poly),
            BlockRole::NestedC(_) | BlockRole::ConvexC(_) => c.push(poly),
        }
    }

    // matching remainder: v^T P v - g - sum s_i a_i - sum t_j b_j lies in the
    // sphere ideal; its quotient is the free multiplier r
    let mut delta = &quad_form(problem.matrix()) - &g;
    for (si, a) in s.iter().zip(
        std::iter::once(Polynomial::constant(&u, 1.0))
            .chain(problem.u_constraints().iter().cloned()),
    ) {
        delta = &delta - &(si * &a);
    }
    for (tj, b) in t.iter().zip(problem.b_constraints()) {
        delta = &delta - &(tj * b);
    }
    let (remainder, r) = sphere_reduce_with_quotient(&delta);

    // identity residual at 200 seeded random points: x in the bounding box
    // of B, u in its sampling box, v on the unit sphere
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let bbox = source_bbox(problem.moment_source().kind());
    let ubox = problem
        .u_sample_box()
        .unwrap_or_else(|| vec![(-1.0, 1.0); u.p]);
    let mut sphere = Polynomial::constant(&u, 1.0);
    for i in 0..u.m {
        sphere = &sphere - &Polynomial::variable(&u, u.v(i)).pow(2);
    }
    let vpv = quad_form(problem.matrix());
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let mut point = vec![0.0; u.total()];
        for (i, (lo, hi)) in bbox.iter().enumerate() {
            point[u.x(i)] = rng.random_range(*lo..*hi);
        }
        for (i, (lo, hi)) in ubox.iter().enumerate() {
            point[u.u(i)] = rng.random_range(*lo..*hi);
        }
        let mut norm_sq = 0.0;
        for i in 0..u.m {
            let z: f64 = rng.random_range(-1.0..1.0);
            point[u.v(i)] = z;
            norm_sq += z * z;
        }
        let norm = norm_sq.sqrt().max(1e-9);
        for i in 0..u.m {
            point[u.v(i)] /= norm;
        }

        let mut rhs = g.eval(&point) + r.eval(&point) * sphere.eval(&point);
        rhs += s
            .iter()
            .zip(
                std::iter::once(1.0)
                    .chain(problem.u_constraints().iter().map(|a| a.eval(&point))),
            )
            .map(|(si, av)| si.eval(&point) * av)
            .sum::<f64>();
        rhs += t
            .iter()
            .zip(problem.b_constraints())
            .map(|(tj, b)| tj.eval(&point) * b.eval(&point))
            .sum::<f64>();
        worst = worst.max((vpv.eval(&point) - rhs).abs());
    }
    // the reduction remainder is part of the certificate error
    worst = worst.max(remainder.max_abs_coeff());

    let coeff_scale = [
        problem.matrix().max_abs_coeff(),
        g.max_abs_coeff(),
        r.max_abs_coeff(),
        s.iter().fold(0.0f64, |a, p| a.max(p.max_abs_coeff())),
        t.iter().fold(0.0f64, |a, p| a.max(p.max_abs_coeff())),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);

    let objective_value = build
        .meta
        .g_basis
        .iter()
        .enumerate()
        .map(|(i, m)| g_vals[i] * problem.moment_source().get(&m.exponents()[..u.n]))
        .sum();

    Ok(InnerApprox {
        g,
        order: build.meta.degrees.order,
        g_degree: build.meta.degrees.g_degree,
        objective_value,
        multipliers: Multipliers { r, s, t, c },
        diagnostics: Diagnostics {
            solver_status: solution.status,
            iterations: solution.iterations,
            solver_residuals: solution.residuals,
            identity_residual_abs: worst,
            identity_residual: worst / (1.0 + coeff_scale),
        },
    })
}
