use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::moments::{MomentKind, MomentSource};
use crate::polyalg::Polynomial;
use crate::sosbuild::PmiProblem;
use crate::stability::hermite_matrix;

use super::{eig_sym, VerifyError};

pub(super) fn source_bbox(kind: &MomentKind) -> Vec<(f64, f64)> {
    match kind {
        MomentKind::Box { bounds } => bounds.clone(),
        MomentKind::Ball { center, radius } => {
            center.iter().map(|c| (c - radius, c + radius)).collect()
        }
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

/// Membership in the bounding set described by a moment source.
pub(super) fn in_source(kind: &MomentKind, x: &[f64]) -> bool {
    match kind {
        MomentKind::Box { bounds } => bounds
            .iter()
            .zip(x)
            .all(|(&(lo, hi), &v)| v >= lo && v <= hi),
        MomentKind::Ball { center, radius } => {
            center
                .iter()
                .zip(x)
                .map(|(c, v)| (v - c) * (v - c))
                .sum::<f64>()
                <= radius * radius
        }
        MomentKind::Simplex { vertices } => in_simplex(vertices, x),
        MomentKind::StabilityBody { n, .. } => {
            let h = hermite_matrix(*n);
            let m = h.eval(x);
            m.symmetric_eigenvalues().min() >= -1e-9
        }
    }
}

fn in_simplex(vertices: &[Vec<f64>], x: &[f64]) -> bool {
    let n = x.len();
    let m = DMatrix::from_fn(n, n, |i, j| vertices[j + 1][i] - vertices[0][i]);
    let rhs = nalgebra::DVector::from_fn(n, |i, _| x[i] - vertices[0][i]);
    match m.lu().solve(&rhs) {
        Some(lam) => {
            let sum: f64 = lam.iter().sum();
            lam.iter().all(|&l| l >= -1e-9) && sum <= 1.0 + 1e-9
        }
        None => false,
    }
}

/// Uniform sampler over a bounding set. Boxes, balls and simplices are
/// sampled directly; the stability body is sampled by rejection from its
/// simplex hull with the Hermite PSD test as the membership oracle. Draws
/// report whether the point landed inside `B`, and estimates scale by the
/// volume of the enclosing region.
pub struct UniformSampler {
    kind: MomentKind,
    enclosing_volume: f64,
    hull: Option<Vec<Vec<f64>>>,
}

impl UniformSampler {
    pub fn new(source: &MomentSource) -> Self {
        let kind = source.kind().clone();
        match &kind {
            MomentKind::Box { bounds } => {
                let vol = bounds.iter().map(|(lo, hi)| hi - lo).product();
                UniformSampler {
                    kind,
                    enclosing_volume: vol,
                    hull: None,
                }
            }
            MomentKind::Ball { center, radius } => {
                let vol = crate::moments::ball_moments(
                    center.len(),
                    *radius,
                    &vec![0; center.len()],
                );
                UniformSampler {
                    kind,
                    enclosing_volume: vol,
                    hull: None,
                }
            }
            MomentKind::Simplex { vertices } => {
                let vol = crate::moments::simplex_moments(vertices, &vec![0; vertices[0].len()])
                    .expect("validated simplex");
                UniformSampler {
                    kind,
                    enclosing_volume: vol,
                    hull: None,
                }
            }
            MomentKind::StabilityBody { n, .. } => {
                let hull = crate::stability::stable_simplex_vertices(*n);
                let vol =
                    crate::moments::simplex_moments(&hull, &vec![0; *n]).expect("hull simplex");
                UniformSampler {
                    kind,
                    enclosing_volume: vol,
                    hull: Some(hull),
                }
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            MomentKind::Box { bounds } => bounds.len(),
            MomentKind::Ball { center, .. } => center.len(),
            MomentKind::Simplex { vertices } => vertices[0].len(),
            MomentKind::StabilityBody { n, .. } => *n,
        }
    }

    /// Lebesgue volume of the region actually sampled (the hull simplex for
    /// the stability body, `B` itself otherwise).
    pub fn enclosing_volume(&self) -> f64 {
        self.enclosing_volume
    }

    /// One uniform draw from the enclosing region; the flag says whether the
    /// point belongs to `B`.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, bool) {
        match &self.kind {
            MomentKind::Box { bounds } => {
                let x = bounds
                    .iter()
                    .map(|&(lo, hi)| rng.random_range(lo..hi))
                    .collect();
                (x, true)
            }
            MomentKind::Ball { center, radius } => {
                let n = center.len();
                // isotropic direction via Box-Muller pairs, then radial CDF
                let mut z: Vec<f64> = Vec::with_capacity(n);
                while z.len() < n {
                    let u1: f64 = rng.random_range(1e-12..1.0);
                    let u2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let r = (-2.0 * u1.ln()).sqrt();
                    z.push(r * u2.cos());
                    if z.len() < n {
                        z.push(r * u2.sin());
                    }
                }
                let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
                let rad = radius * rng.random_range(0.0..1.0f64).powf(1.0 / n as f64);
                let x = center
                    .iter()
                    .zip(&z)
                    .map(|(c, zi)| c + rad * zi / norm)
                    .collect();
                (x, true)
            }
            MomentKind::Simplex { vertices } => (sample_simplex(vertices, rng), true),
            MomentKind::StabilityBody { n, .. } => {
                let hull = self.hull.as_ref().expect("hull stored");
                let x = sample_simplex(hull, rng);
                let h = hermite_matrix(*n);
                let inside = h.eval(&x).symmetric_eigenvalues().min() >= 0.0;
                (x, inside)
            }
        }
    }
}

fn sample_simplex(vertices: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<f64> {
    // Dirichlet(1,..,1) barycentric weights from exponential spacings
    let k = vertices.len();
    let n = vertices[0].len();
    let mut w: Vec<f64> = (0..k)
        .map(|_| -rng.random_range(1e-300..1.0f64).ln())
        .collect();
    let total: f64 = w.iter().sum();
    for wi in &mut w {
        *wi /= total;
    }
    (0..n)
        .map(|i| vertices.iter().zip(&w).map(|(v, wi)| v[i] * wi).sum())
        .collect()
}

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub hits: usize,
    /// Soundness violations observed while sampling (L1 gap only).
    pub violations: usize,
    pub seed: u64,
}

/// Monte-Carlo volume of `{x in B : pred(x)}`:
/// `vol(E) * hits / N` with standard error
/// `vol(E) * sqrt(p(1-p)/N)`, `E` the enclosing sampled region.
pub fn mc_volume<F: Fn(&[f64]) -> bool>(
    pred: F,
    source: &MomentSource,
    n: usize,
    seed: u64,
) -> McEstimate {
    let sampler = UniformSampler::new(source);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..n {
        let (x, in_b) = sampler.draw(&mut rng);
        if in_b && pred(&x) {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    McEstimate {
        value: sampler.enclosing_volume() * p,
        std_error: sampler.enclosing_volume() * (p * (1.0 - p) / n as f64).sqrt(),
        samples: n,
        hits,
        violations: 0,
        seed,
    }
}

/// Parameter sampling plan: a tensor grid of 33 points per u-dimension over
/// the declared sampling box, plus 1000 seeded rejection samples, all
/// filtered by `a_i(u) >= 0`. Problems without parameters get the single
/// empty sample.
pub fn u_samples(problem: &PmiProblem, seed: u64) -> Result<Vec<Vec<f64>>, VerifyError> {
    let u = *problem.universe();
    if u.p == 0 {
        return Ok(vec![vec![]]);
    }
    let ubox = problem
        .u_sample_box()
        .unwrap_or_else(|| vec![(-1.0, 1.0); u.p]);
    let accepts = |uv: &[f64]| -> bool {
        let mut point = vec![0.0; u.total()];
        for (i, &v) in uv.iter().enumerate() {
            point[u.u(i)] = v;
        }
        problem
            .u_constraints()
            .iter()
            .all(|a| a.eval(&point) >= -1e-12)
    };
    let mut out: Vec<Vec<f64>> = super::grid_points(&ubox, 33)
        .into_iter()
        .filter(|uv| accepts(uv))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let uv: Vec<f64> = ubox
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect();
        if accepts(&uv) {
            out.push(uv);
        }
    }
    if out.is_empty() {
        return Err(VerifyError::EmptyAfterRejection);
    }
    Ok(out)
}

/// Sampled robust minimum eigenvalue: `min_u lambda_min(P(x, u))` over the
/// provided parameter samples. An upper bound on the true `lambda(x)` that
/// tightens as the sampling refines.
pub fn lambda_min(problem: &PmiProblem, x: &[f64], u_samples: &[Vec<f64>]) -> f64 {
    assert!(!u_samples.is_empty());
    let u = *problem.universe();
    assert_eq!(x.len(), u.n);
    let mut point = vec![0.0; u.total()];
    point[..u.n].copy_from_slice(x);
    let mut worst = f64::INFINITY;
    for uv in u_samples {
        for (i, &v) in uv.iter().enumerate() {
            point[u.u(i)] = v;
        }
        let m = problem.matrix().eval(&point);
        let eigs = eig_sym(&m).expect("matrix evaluation is symmetric");
        worst = worst.min(eigs[0]);
    }
    worst
}

/// Sampled membership in `P`: true iff the sampled robust minimum
/// eigenvalue stays above `-1e-9`; the margin is that eigenvalue.
pub fn membership(problem: &PmiProblem, x: &[f64], u_samples: &[Vec<f64>]) -> (bool, f64) {
    let margin = lambda_min(problem, x, u_samples);
    (margin >= -1e-9, margin)
}

/// Monte-Carlo estimate of the L1 gap `int_B (lambda - g) dx`. Samples with
/// `g > lambda + 1e-6` are counted as violations (not clipped).
pub fn l1_gap(
    g: &Polynomial,
    problem: &PmiProblem,
    n: usize,
    seed: u64,
) -> Result<McEstimate, VerifyError> {
    let us = u_samples(problem, seed)?;
    let u = *problem.universe();
    let sampler = UniformSampler::new(problem.moment_source());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut hits = 0usize;
    let mut violations = 0usize;
    let mut point = vec![0.0; u.total()];
    for _ in 0..n {
        let (x, in_b) = sampler.draw(&mut rng);
        let f = if in_b {
            hits += 1;
            point[..u.n].copy_from_slice(&x);
            let gval = g.eval(&point);
            let lam = lambda_min(problem, &x, &us);
            if gval > lam + 1e-6 {
                violations += 1;
            }
            lam - gval
        } else {
            0.0
        };
        sum += f;
        sum_sq += f * f;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    Ok(McEstimate {
        value: sampler.enclosing_volume() * mean,
        std_error: sampler.enclosing_volume() * (var / n as f64).sqrt(),
        samples: n,
        hits,
        violations,
        seed,
    })
}
