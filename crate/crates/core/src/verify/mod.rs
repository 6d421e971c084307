//! Sampling-based verification oracles, independent of the SDP pipeline.
//!
//! Everything here is falsification-oriented: the robust minimum-eigenvalue
//! function is sampled (never globally minimized), volumes and L1 gaps are
//! Monte-Carlo estimates with reported standard errors, and every sampled
//! report carries its seed so reruns reproduce it bit for bit.

mod eig;
mod sampling;

pub use eig::eig_sym;
pub use sampling::{
    l1_gap, lambda_min, mc_volume, membership, u_samples, McEstimate, UniformSampler,
};

use thiserror::Error;

use crate::polyalg::Polynomial;
use crate::sosbuild::PmiProblem;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("matrix is not symmetric within 1e-12")]
    Asymmetric,
    #[error("no parameter samples survived rejection against the U constraints")]
    EmptyAfterRejection,
}

/// Outcome of a sampled check; same seed, same report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleReport {
    pub samples: usize,
    pub violations: usize,
    /// Min over samples of the tested quantity.
    pub worst_margin: f64,
    pub seed: u64,
}

/// Pointwise max of a family of polynomials.
pub fn eval_piecewise_max(g_list: &[Polynomial], x: &[f64]) -> f64 {
    assert!(!g_list.is_empty());
    g_list
        .iter()
        .map(|g| g.eval(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Tensor grid over a bounding box, row-major with the first axis slowest.
pub fn grid_points(bbox: &[(f64, f64)], resolution: usize) -> Vec<Vec<f64>> {
    assert!(resolution >= 2);
    let n = bbox.len();
    let mut out = Vec::with_capacity(resolution.pow(n as u32));
    let mut idx = vec![0usize; n];
    loop {
        out.push(
            idx.iter()
                .zip(bbox)
                .map(|(&i, &(lo, hi))| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
                .collect(),
        );
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < resolution {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Grid soundness sweep: on every in-`B` grid point with
/// `g(x) >= positive_tol`, the sampled robust minimum eigenvalue must stay
/// above `-eig_tol`. `worst_margin` is the smallest sampled eigenvalue over
/// the tested points.
pub fn soundness_grid(
    problem: &PmiProblem,
    g: &Polynomial,
    resolution: usize,
    u_plan_seed: u64,
    positive_tol: f64,
    eig_tol: f64,
) -> Result<SampleReport, VerifyError> {
    let us = u_samples(problem, u_plan_seed)?;
    let u = *problem.universe();
    let bbox = sampling::source_bbox(problem.moment_source().kind());
    let mut report = SampleReport {
        samples: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        seed: u_plan_seed,
    };
    let mut point = vec![0.0; u.total()];
    for x in grid_points(&bbox, resolution) {
        point[..u.n].copy_from_slice(&x);
        let in_b = problem
            .b_constraints()
            .iter()
            .all(|b| b.eval(&point) >= 0.0)
            && sampling::in_source(problem.moment_source().kind(), &x);
        if !in_b {
            continue;
        }
        if g.eval(&point) < positive_tol {
            continue;
        }
        report.samples += 1;
        let lm = lambda_min(problem, &x, &us);
        report.worst_margin = report.worst_margin.min(lm);
        if lm < -eig_tol {
            report.violations += 1;
        }
    }
    Ok(report)
}
